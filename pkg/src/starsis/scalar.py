"""One-spoke specialization, where hub and spoke are indistinguishable.

On the diagonal ``x = y`` the star map with ``n = 1`` reduces to::

    f(x) = 1 - (1 - a x)(1 - b x),    f'(x) = (a + b) - 2 a b x

Besides 0, ``f`` has the fixed point ``x_f = (a + b - 1)/(a b)`` exactly when
``a + b > 1``; ``f'`` equals 1 at ``x_c = x_f / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .dynamics import DEFAULT_MAX_ITERS, DEFAULT_TOL, PROXIMITY, LimitKind
from .errors import StateRangeError
from .model_core import Params


@dataclass(frozen=True)
class ScalarReport:
    x_f: float | None
    x_c: float | None
    f_prime_at_0: float
    f_prime_at_1: float

    @property
    def supercritical(self) -> bool:
        return self.x_f is not None


@dataclass(frozen=True)
class ScalarLimit:
    limit: float
    iterations: int
    limit_kind: LimitKind


def _unit(x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise StateRangeError(f"x must lie in [0, 1], got {x!r}")
    return x


def f_scalar(p: Params, x: float) -> float:
    x = _unit(x)
    return 1.0 - (1.0 - p.a * x) * (1.0 - p.b * x)


def f_prime(p: Params, x: float) -> float:
    return (p.a + p.b) - 2.0 * p.a * p.b * _unit(x)


def scalar_report(p: Params) -> ScalarReport:
    a, b = p.a, p.b
    x_f = x_c = None
    if a + b > 1.0:
        x_f = (a + b - 1.0) / (a * b)
        x_c = 0.5 * x_f
    return ScalarReport(x_f, x_c, a + b, a + b - 2.0 * a * b)


def iterate_scalar(p: Params, x0: float, max_iters: int = DEFAULT_MAX_ITERS,
                   tol: float = DEFAULT_TOL) -> ScalarLimit:
    """Iterate ``f`` from ``x0`` until a step and the next residual are both
    below ``tol`` and the point is within ``10 * tol`` of a fixed point."""
    x = _unit(x0)
    x_f = scalar_report(p).x_f
    near = PROXIMITY * tol
    a, b = p.a, p.b
    for k in range(int(max_iters)):
        nx = 1.0 - (1.0 - a * x) * (1.0 - b * x)
        step = abs(nx - x)
        x = nx
        if step < tol:
            fx = 1.0 - (1.0 - a * x) * (1.0 - b * x)
            if abs(fx - x) < tol:
                if x < near:
                    return ScalarLimit(x, k + 1, LimitKind.TRIVIAL)
                if x_f is not None and abs(x - x_f) < near:
                    return ScalarLimit(x, k + 1, LimitKind.NONTRIVIAL)
    return ScalarLimit(x, int(max_iters), LimitKind.UNRESOLVED)
