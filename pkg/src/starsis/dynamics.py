"""Trajectories of the reduced star map and the region geometry around them.

The curves ``x = phi1(y)`` and ``y = phi2(x)`` cut the unit square into
four regions:

=======  ======================  ======================
Region   hub vs ``phi1(y)``      spoke vs ``phi2(x)``
=======  ======================  ======================
I        x < phi1(y)             y < phi2(x)
II       x > phi1(y)             y < phi2(x)
III      x > phi1(y)             y > phi2(x)
IV       x < phi1(y)             y > phi2(x)
=======  ======================  ======================

Points within ``CURVE_TOL`` of a curve are labelled ``OnPhi1``/``OnPhi2``
(``OnPhi1`` wins when both apply) and the origin is its own label.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import kernels
from .errors import ConvergenceError, InsufficientSamplesError, RegimeError, RegionError
from .reduced_map import (
    CURVE_TOL,
    FixedPointReport,
    Regime,
    StarParams,
    State2,
    apply_F,
    as_state2,
    phi1,
    phi2_of_x,
    solve_fixed_points,
)

DEFAULT_MAX_ITERS = 10**6
DEFAULT_TOL = 1e-10
MIN_CORNER = 1e-6
FLIP_SEED = 20110601
PROXIMITY = 10.0


class Region(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    ON_PHI1 = "OnPhi1"
    ON_PHI2 = "OnPhi2"
    ORIGIN = "Origin"

    def __str__(self):
        return self.value


class LimitKind(str, enum.Enum):
    TRIVIAL = "Trivial"
    NONTRIVIAL = "Nontrivial"
    UNRESOLVED = "Unresolved"

    def __str__(self):
        return self.value


class Monotonicity(str, enum.Enum):
    INCREASED_BOTH = "IncreasedBoth"
    DECREASED_BOTH = "DecreasedBoth"
    MIXED = "Mixed"

    def __str__(self):
        return self.value


class FlipLabel(str, enum.Enum):
    FLIPPING = "Flipping"
    NON_FLIPPING = "NonFlipping"
    INCONSISTENT = "Inconsistent"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Trajectory:
    points: np.ndarray
    converged_to: State2 | None
    iterations_used: int
    limit_kind: LimitKind

    def __post_init__(self):
        if (self.converged_to is None) != (self.limit_kind is LimitKind.UNRESOLVED):
            raise ValueError("converged_to must be present exactly when the limit is resolved")

    @property
    def final(self) -> State2:
        return State2(float(self.points[-1, 0]), float(self.points[-1, 1]))


@dataclass(frozen=True)
class Envelope:
    lower: State2
    upper: State2

    def __post_init__(self):
        lo, up = as_state2(self.lower), as_state2(self.upper)
        if lo.x > up.x or lo.y > up.y:
            raise ValueError(f"lower corner {lo} is not below upper corner {up}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    def contains(self, s) -> bool:
        return (self.lower.x <= s[0] <= self.upper.x) and (self.lower.y <= s[1] <= self.upper.y)


@dataclass
class FlipReport:
    label: FlipLabel
    transitions: dict[str, dict[str, int]]
    samples_drawn: int
    in_region: dict[str, int]
    offending: list[tuple[str, State2, str]] = field(default_factory=list)


def _fixed_points(sp: StarParams, fps: FixedPointReport | None) -> FixedPointReport:
    return fps if fps is not None else solve_fixed_points(sp)


def classify_region(sp: StarParams, s) -> Region:
    x, y = as_state2(s)
    if x == 0.0 and y == 0.0:
        return Region.ORIGIN
    d1 = x - phi1(sp, y)
    d2 = y - phi2_of_x(sp.params, x)
    if abs(d1) <= CURVE_TOL:
        return Region.ON_PHI1
    if abs(d2) <= CURVE_TOL:
        return Region.ON_PHI2
    if d1 < 0.0:
        return Region.I if d2 < 0.0 else Region.IV
    return Region.II if d2 < 0.0 else Region.III


def _limit_kind(s: State2, fps: FixedPointReport, near: float) -> tuple[LimitKind, State2 | None]:
    d0 = max(abs(s.x), abs(s.y))
    best = (LimitKind.TRIVIAL, fps.trivial, d0) if d0 < near else None
    if fps.nontrivial is not None:
        fp = fps.nontrivial
        d1 = max(abs(s.x - fp.x), abs(s.y - fp.y))
        if d1 < near and (best is None or d1 < best[2]):
            best = (LimitKind.NONTRIVIAL, fp, d1)
    if best is None:
        return LimitKind.UNRESOLVED, None
    return best[0], best[1]


def _targets(fps: FixedPointReport) -> tuple[float, float]:
    if fps.nontrivial is None:
        return float("nan"), float("nan")
    return fps.nontrivial.x, fps.nontrivial.y


def iterate(sp: StarParams, s0, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
            fixed_points: FixedPointReport | None = None) -> Trajectory:
    """Iterate F from ``s0`` until it settles, recording every point.

    Settling means one step and the following residual are both below
    ``tol`` *and* the point is within ``10 * tol`` of a known fixed point.
    The proximity condition keeps slowly contracting orbits (rate near 1)
    running until they are actually close, rather than stopping on a small
    step far from the limit. Hitting ``max_iters`` gives ``Unresolved``.
    """
    x0, y0 = as_state2(s0)
    fps = _fixed_points(sp, fixed_points)
    tx, ty = _targets(fps)
    near = PROXIMITY * tol
    path = np.empty((max_iters + 1, 2))
    x, y, k, _ = kernels.active.star_orbit(sp.a, sp.b, sp.n, x0, y0, tx, ty, near,
                                          int(max_iters), float(tol), path)
    pts = path[: k + 1].copy()
    kind, lim = _limit_kind(State2(x, y), fps, near)
    return Trajectory(pts, lim, int(k), kind)


def orbit(sp: StarParams, s0, steps: int) -> np.ndarray:
    """Exactly ``steps`` applications of F; returns ``(steps + 1, 2)`` points."""
    x0, y0 = as_state2(s0)
    path = np.empty((steps + 1, 2))
    kernels.active.star_orbit(sp.a, sp.b, sp.n, x0, y0, 0.0, 0.0, 0.0, int(steps), -1.0, path)
    return path


def settle_many(a, b, n, x0, y0, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
                targets=None):
    """Batch version of :func:`iterate` returning only the end points.

    ``targets`` is an optional ``(tx, ty)`` pair of arrays with the
    nontrivial fixed point of each run (NaN where none exists). Returns
    ``(x, y, iterations, settled)`` arrays.
    """
    a = np.ascontiguousarray(a, dtype=float)
    m = a.shape[0]
    b = np.ascontiguousarray(b, dtype=float)
    n = np.ascontiguousarray(np.broadcast_to(n, (m,)), dtype=np.int64)
    x0 = np.ascontiguousarray(x0, dtype=float)
    y0 = np.ascontiguousarray(y0, dtype=float)
    if targets is None:
        tx = np.full(m, np.nan)
        ty = np.full(m, np.nan)
        near = 0.0
    else:
        tx = np.ascontiguousarray(targets[0], dtype=float)
        ty = np.ascontiguousarray(targets[1], dtype=float)
        near = PROXIMITY * tol
    x, y, iters, status = kernels.active.star_settle_batch(a, b, n, x0, y0, tx, ty, near,
                                                           int(max_iters), float(tol))
    return x, y, iters, status == kernels.SETTLED


def region_step_monotonicity_check(sp: StarParams, s) -> Monotonicity:
    s = as_state2(s)
    region = classify_region(sp, s)
    if region not in (Region.I, Region.III):
        raise RegionError(f"{s} is in {region}, not strictly inside Region I or III")
    fx, fy = apply_F(sp, s)
    if fx > s.x and fy > s.y:
        return Monotonicity.INCREASED_BOTH
    if fx < s.x and fy < s.y:
        return Monotonicity.DECREASED_BOTH
    return Monotonicity.MIXED


def _require_supercritical(sp: StarParams, fps: FixedPointReport) -> State2:
    if fps.regime is not Regime.SUPERCRITICAL:
        raise RegimeError(f"{sp} is {fps.regime}; needs the supercritical regime")
    return fps.nontrivial


def _at(s: State2, fp: State2, tol: float) -> bool:
    return max(abs(s.x - fp.x), abs(s.y - fp.y)) <= tol


def envelope_iterate(sp: StarParams, env: Envelope, max_iters: int = DEFAULT_MAX_ITERS,
                     tol: float = DEFAULT_TOL) -> tuple[Trajectory, Trajectory, bool]:
    """Iterate the corners of a rectangle whose lower corner is in Region I
    and upper corner in Region III.

    F is order-preserving, so every point of the rectangle stays between the
    two corner orbits; when both corners reach the nontrivial fixed point,
    so does every point inside. A corner sitting exactly on the fixed point
    is accepted (degenerate rectangle).
    """
    fps = solve_fixed_points(sp)
    fp = _require_supercritical(sp, fps)
    lo, up = env.lower, env.upper
    if not _at(lo, fp, tol):
        if min(lo.x, lo.y) < MIN_CORNER:
            raise RegionError(f"lower corner {lo} must have both coordinates >= {MIN_CORNER}")
        if classify_region(sp, lo) is not Region.I:
            raise RegionError(f"lower corner {lo} is not in Region I")
    if not _at(up, fp, tol) and classify_region(sp, up) is not Region.III:
        raise RegionError(f"upper corner {up} is not in Region III")
    t_lo = iterate(sp, lo, max_iters, tol, fps)
    t_up = iterate(sp, up, max_iters, tol, fps)
    certified = all(
        t.limit_kind is LimitKind.NONTRIVIAL and _at(t.final, fp, tol * PROXIMITY)
        for t in (t_lo, t_up))
    return t_lo, t_up, certified


def convergence_time(sp: StarParams, s, tol: float = DEFAULT_TOL,
                     max_iters: int = DEFAULT_MAX_ITERS,
                     fixed_points: FixedPointReport | None = None) -> int:
    """Number of applications of F until ``s`` is within ``tol`` (sup-norm)
    of the nontrivial fixed point."""
    x, y = as_state2(s)
    fps = _fixed_points(sp, fixed_points)
    fp = _require_supercritical(sp, fps)
    if x == 0.0 and y == 0.0:
        raise RegionError("the origin is fixed and never approaches the nontrivial point")
    t = kernels.active.star_hit_time(sp.a, sp.b, sp.n, x, y, fp.x, fp.y, float(tol),
                                     int(max_iters))
    if t < 0:
        raise ConvergenceError(f"{s} not within {tol} of {fp} after {max_iters} iterations")
    return int(t)


def flip_classifier(sp: StarParams, samples: int, seed: int = FLIP_SEED, chunk: int = 4096,
                    max_draws: int | None = None, keep_offending: int = 20) -> FlipReport:
    """Empirical check of the II/IV "flipping" dichotomy.

    Draws scrambled Halton points in the unit square until ``samples`` have
    landed strictly inside each of Regions II and IV (curve points are
    skipped), maps each once, and tallies the region of the image.

    Labels: ``Flipping`` when no II image stays in II, no IV image stays in
    IV and images cross both ways (II to IV and IV to II); ``NonFlipping``
    when no II image lands in IV and no IV image in II; otherwise
    ``Inconsistent``. The raw transition tallies are returned with the
    label so other readings can be applied, along with the first few
    points whose image stayed in its own region.
    """
    fps = solve_fixed_points(sp)
    _require_supercritical(sp, fps)
    if samples < 1:
        raise ValueError("samples must be positive")
    max_draws = max_draws if max_draws is not None else 512 * samples
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    counts: Counter = Counter()
    trans = {"II": Counter(), "IV": Counter()}
    offending: list = []
    drawn = 0
    while (counts["II"] < samples or counts["IV"] < samples) and drawn < max_draws:
        drawn += chunk
        for x, y in sampler.random(chunk):
            s = State2(float(x), float(y))
            r = classify_region(sp, s)
            # stop feeding a region once it is full so the tallies stay balanced
            if r not in (Region.II, Region.IV) or counts[r.value] >= samples:
                continue
            counts[r.value] += 1
            img = classify_region(sp, apply_F(sp, s))
            trans[r.value][img.value] += 1
            if img is r and len(offending) < keep_offending:
                offending.append((r.value, s, img.value))
    if counts["II"] < samples or counts["IV"] < samples:
        raise InsufficientSamplesError(
            f"only {counts['II']} Region II and {counts['IV']} Region IV points in {drawn} draws")

    ii, iv = trans["II"], trans["IV"]
    if ii["II"] == 0 and iv["IV"] == 0 and ii["IV"] > 0 and iv["II"] > 0:
        label = FlipLabel.FLIPPING
    elif ii["IV"] == 0 and iv["II"] == 0:
        label = FlipLabel.NON_FLIPPING
    else:
        label = FlipLabel.INCONSISTENT
    return FlipReport(
        label=label,
        transitions={k: dict(sorted(v.items())) for k, v in trans.items()},
        samples_drawn=drawn,
        in_region=dict(counts),
        offending=offending,
    )


def sample_region(sp: StarParams, region: Region, count: int, rng: np.random.Generator,
                  box: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
                  max_draws: int = 10**6) -> np.ndarray:
    """Rejection-sample ``count`` points strictly inside ``region``."""
    x0, x1, y0, y1 = box
    out = []
    drawn = 0
    while len(out) < count and drawn < max_draws:
        batch = rng.uniform((x0, y0), (x1, y1), size=(256, 2))
        drawn += 256
        for x, y in batch:
            if classify_region(sp, (x, y)) is region:
                out.append((x, y))
                if len(out) == count:
                    break
    if len(out) < count:
        raise InsufficientSamplesError(f"found {len(out)} of {count} points in Region {region}")
    return np.array(out)
