"""Reduced dynamics on multilevel stars.

A multilevel star with counts ``[n1, ..., n_{L-1}]`` has one hub, ``n1``
children of the hub, ``n2`` children of each of those, and so on. When all
nodes on a level share a value the recursion collapses to ``L`` unknowns::

    s1' = 1 - (1 - a s1) (1 - b s2)**n1
    sk' = 1 - (1 - a sk) (1 - b s_{k-1}) (1 - b s_{k+1})**nk     (1 < k < L)
    sL' = 1 - (1 - a sL) (1 - b s_{L-1})

For L = 2 this is the ordinary star map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConvergenceError, DimensionError, ParameterError, StateRangeError
from .model_core import Params

FP_TOL = 1e-12
FP_MAX_ITERS = 10**7
DETECT = 1e-6
BISECT_WIDTH = 1e-4


@dataclass(frozen=True)
class LevelParams:
    params: Params
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(self.counts)
        if not counts:
            raise ParameterError("need at least one level count (two levels)")
        for c in counts:
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)) or c < 1:
                raise ParameterError(f"level counts must be positive integers, got {c!r}")
        object.__setattr__(self, "counts", tuple(int(c) for c in counts))

    @classmethod
    def of(cls, a: float, b: float, counts: Sequence[int]) -> "LevelParams":
        return cls(Params(a, b), tuple(counts))

    @property
    def levels(self) -> int:
        return len(self.counts) + 1

    @property
    def a(self) -> float:
        return self.params.a

    @property
    def b(self) -> float:
        return self.params.b

    def counts_array(self) -> np.ndarray:
        # last level has no children; the kernels never read this slot
        return np.array(self.counts + (0,), dtype=np.int64)


def _state(lp: LevelParams, s) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if arr.shape != (lp.levels,):
        raise DimensionError(f"expected {lp.levels} level values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise StateRangeError("level values must lie in [0, 1]")
    return arr


def apply_F_multilevel(lp: LevelParams, s) -> np.ndarray:
    arr = _state(lp, s)
    return kernels.NUMPY.level_step(lp.a, lp.b, lp.counts_array(), arr, np.empty_like(arr))


def level_residual(lp: LevelParams, s) -> float:
    s = _state(lp, s)
    return float(np.max(np.abs(apply_F_multilevel(lp, s) - s)))


def threshold_levels(a: float, counts: Sequence[int]) -> float:
    """``(1 - a)/sqrt(n1 + ... + n_{L-1})``.

    Exact for two and three levels. Beyond that the iteration follows
    :func:`linearized_threshold` instead (e.g. 0.2185 rather than 0.2041 for
    a = 0.5, counts [2, 2, 2]).
    """
    a = float(a)
    if not (0.0 < a < 1.0):
        raise ParameterError(f"a must lie strictly inside (0, 1), got {a!r}")
    counts = list(counts)
    if not counts or any(isinstance(c, bool) or int(c) != c or c < 1 for c in counts):
        raise ParameterError(f"counts must be positive integers, got {counts!r}")
    return (1.0 - a) / math.sqrt(sum(counts))


def threshold_3level(a: float, n1: int, n2: int) -> float:
    return threshold_levels(a, [n1, n2])


def linearized_threshold(a: float, counts: Sequence[int]) -> float:
    """``(1 - a)/rho`` with ``rho`` the spectral radius of the level coupling
    at the origin.

    The origin linearization is ``a I + b T`` where ``T`` is tridiagonal with
    ``counts`` above the diagonal and ones below; it is similar to the
    symmetric tridiagonal matrix with off-diagonal ``sqrt(counts)``. This
    equals :func:`threshold_levels` for two and three levels but not beyond.
    """
    threshold_levels(a, counts)
    off = np.sqrt(np.asarray(counts, dtype=float))
    L = off.size + 1
    sym = np.zeros((L, L))
    sym[np.arange(L - 1), np.arange(1, L)] = off
    sym[np.arange(1, L), np.arange(L - 1)] = off
    rho = float(np.max(np.linalg.eigvalsh(sym)))
    return (1.0 - float(a)) / rho


def surfaces_3level(lp: LevelParams, point) -> tuple[float, float, float]:
    """Partial-fixed-point surfaces of the 3-level map at ``(x, y, z)``.

    Returns ``phi1(y)`` (hub-invariant x), the residual ``f2(x, y, z) - y``
    of the middle-level relation, and ``phi3(y)`` (leaf-invariant z).
    """
    if lp.levels != 3:
        raise DimensionError("surfaces_3level needs exactly three levels")
    x, y, z = _state(lp, point)
    a, b = lp.a, lp.b
    n1, n2 = lp.counts
    c = (1.0 - b * y) ** n1
    phi1 = (1.0 - c) / (1.0 - a * c)
    f2 = 1.0 - (1.0 - a * y) * (1.0 - b * x) * (1.0 - b * z) ** n2
    phi3 = b * y / (1.0 - a + a * b * y)
    return phi1, f2 - y, phi3


def middle_curve_x(lp: LevelParams, y: float) -> float:
    """Hub value making the middle level invariant once the leaves sit on
    their own invariant surface, as a function of ``y``."""
    if lp.levels != 3:
        raise DimensionError("middle_curve_x needs exactly three levels")
    a, b = lp.a, lp.b
    n2 = lp.counts[1]
    lead = 1.0 - b * b * y / (1.0 - a + a * b * y)
    return (y - 1.0) / (b * (1.0 - a * y) * lead**n2) + 1.0 / b


def curve_slopes_at_origin_3level(lp: LevelParams) -> tuple[float, float]:
    """``phi1'(0) = b n1/(1-a)`` and the middle curve slope
    ``((1-a)**2 - b**2 n2) / (b (1-a))``."""
    a, b = lp.a, lp.b
    n1, n2 = lp.counts
    return b * n1 / (1.0 - a), ((1.0 - a) ** 2 - b * b * n2) / (b * (1.0 - a))


def iterate_levels(lp: LevelParams, s0, max_iters: int, tol: float,
                   record: bool = False) -> tuple[np.ndarray, int, bool, np.ndarray | None]:
    """Iterate the level map until a step is below ``tol``.

    Returns ``(state, iterations, settled, path)``; ``path`` is ``None``
    unless ``record``.
    """
    s0 = _state(lp, s0)
    path = np.empty((max_iters + 1, lp.levels)) if record else np.empty((0, lp.levels))
    s, k, status = kernels.active.level_orbit(lp.a, lp.b, lp.counts_array(), s0,
                                              int(max_iters), float(tol), path)
    return np.asarray(s).copy(), int(k), status == kernels.SETTLED, (path[: k + 1] if record else None)


def solve_fixed_point_multilevel(lp: LevelParams, tol: float = FP_TOL,
                                 max_iters: int = FP_MAX_ITERS,
                                 detect: float = DETECT) -> np.ndarray | None:
    """Largest fixed point of the level map, or ``None`` if it is the origin.

    The map is componentwise monotone, so iterating from the all-ones state
    decreases monotonically to the largest fixed point. A limit whose
    sup-norm is at most ``detect`` is reported as absent.
    """
    s, k, settled, _ = iterate_levels(lp, np.ones(lp.levels), max_iters, tol)
    if not settled:
        raise ConvergenceError(f"level map for {lp} did not settle in {max_iters} iterations")
    if float(np.max(s)) > detect:
        return s
    return None


def empirical_threshold(a: float, counts: Sequence[int], width: float = BISECT_WIDTH,
                        detect: float = DETECT, tol: float = FP_TOL,
                        max_iters: int = FP_MAX_ITERS) -> float:
    """Bisect on ``b`` for the onset of a nontrivial fixed point.

    Returns the midpoint of the final bracket, whose width is at most
    ``width``.
    """
    counts = tuple(counts)

    def present(b):
        return solve_fixed_point_multilevel(LevelParams.of(a, b, counts), tol, max_iters,
                                            detect) is not None

    lo, hi = 1e-9, 1.0 - 1e-9
    if present(lo) or not present(hi):
        raise ConvergenceError(f"predicate is constant over (0, 1) for a={a}, counts={counts}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if present(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
