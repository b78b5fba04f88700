"""The continuous initial-boundary value problem.

    u_t - eps u_xx + a(x,t) u = f(x,t)        on (0,1) x (0,T]
    u(0,t) - u_x(0,t) = phi_L(t)
    u(1,t) + u_x(1,t) = phi_R(t)
    u(x,0) = phi_B(x)

with 0 < alpha < a(x,t).  Data fields are plain callables that must accept
numpy arrays (broadcasting like ufuncs); scalar-only callables work but are
slow.

Corner compatibility beyond level 0 (agreement of time derivatives of the
boundary data with the equation at the corners) is a user obligation and is
not checked here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import exprlang
from .errors import DataEvaluationError

ScalarField2 = Callable[[np.ndarray, np.ndarray], np.ndarray]
ScalarField1 = Callable[[np.ndarray], np.ndarray]

__all__ = [
    "Problem", "ValidationReport", "ExprField2", "ExprField1",
    "validate_problem", "check_corner_compatibility", "example_problem",
    "constant_problem", "sample2", "sample1",
]


@dataclass(frozen=True)
class Problem:
    a: ScalarField2
    f: ScalarField2
    phi_L: ScalarField1
    phi_R: ScalarField1
    phi_B: ScalarField1
    epsilon: float
    alpha: float
    T: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "alpha", "T"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")

    def with_epsilon(self, epsilon: float) -> "Problem":
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class ValidationReport:
    positivity_ok: bool
    min_sampled_a: float
    min_location: tuple[float, float]
    compatibility_residuals: tuple[float, float]


@dataclass(frozen=True)
class ExprField2:
    """A two-variable data field backed by an exprlang expression."""

    source: str
    expr: exprlang.Expr = field(init=False, repr=False, compare=False)
    program: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        expr = exprlang.parse(self.source)
        object.__setattr__(self, "expr", expr)
        object.__setattr__(self, "program", exprlang.compile_expr(expr))

    def __call__(self, x, t):
        if np.ndim(x) == 0 and np.ndim(t) == 0:
            return float(exprlang.run(self.program, float(x), float(t)))
        x = np.asarray(x, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        with np.errstate(all="ignore"):
            out = exprlang.run(self.program, x, t)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), np.broadcast(x, t).shape)


@dataclass(frozen=True)
class ExprField1:
    """A one-variable field from an expression in ``x`` and ``t``.

    ``variable`` names the argument; the other variable is held at ``fixed``
    (x=0 for phi_L, x=1 for phi_R, t=0 for phi_B).
    """

    source: str
    variable: str
    fixed: float = 0.0
    inner: ExprField2 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variable not in exprlang.VARIABLES:
            raise ValueError(f"variable must be 'x' or 't', got {self.variable!r}")
        object.__setattr__(self, "inner", ExprField2(self.source))

    def __call__(self, s):
        if self.variable == "x":
            return self.inner(s, self.fixed)
        return self.inner(self.fixed, s)


def _first_bad_point(fn, points):
    for pt in points:
        try:
            v = fn(*pt)
        except (ArithmeticError, ValueError):
            return pt
        if not np.all(np.isfinite(v)):
            return pt
    return None


def _fmt_point(names, pt):
    return "(" + ", ".join(f"{n}={float(v):.17g}" for n, v in zip(names, pt)) + ")"


def sample2(fn: ScalarField2, name: str, x, t) -> np.ndarray:
    """Evaluate a two-variable field on broadcast ``(x, t)``; raise on non-finite output."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    shape = np.broadcast(x, t).shape
    try:
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(fn(x, t), dtype=np.float64), shape)
        ok = bool(np.all(np.isfinite(out)))
    except (ArithmeticError, ValueError, TypeError):
        ok = False
    if ok:
        return out
    xb, tb = np.broadcast_arrays(x, t)
    bad = _first_bad_point(fn, zip(xb.ravel().tolist(), tb.ravel().tolist()))
    where = _fmt_point(("x", "t"), bad) if bad is not None else "(vectorized call failed)"
    raise DataEvaluationError(f"field {name} is not finite or failed to evaluate at {where}")


def sample1(fn: ScalarField1, name: str, s, var: str = "t") -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    try:
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(fn(s), dtype=np.float64), s.shape)
        ok = bool(np.all(np.isfinite(out)))
    except (ArithmeticError, ValueError, TypeError):
        ok = False
    if ok:
        return out
    bad = _first_bad_point(fn, ((v,) for v in s.ravel().tolist()))
    where = _fmt_point((var,), bad) if bad is not None else "(vectorized call failed)"
    raise DataEvaluationError(f"field {name} is not finite or failed to evaluate at {where}")


def check_corner_compatibility(p: Problem, h_fd: float = 1e-4) -> tuple[float, float]:
    """Signed level-0 corner residuals ``(r_left, r_right)``.

    r_left  = phi_B(0) - phi_L(0) - phi_B'(0)
    r_right = phi_B(1) - phi_R(0) + phi_B'(1)

    phi_B' is estimated with second-order one-sided three-point stencils of
    step ``h_fd``.
    """
    if not 0 < h_fd < 0.5:
        raise ValueError("h_fd must lie in (0, 1/2)")
    xs = np.array([0.0, h_fd, 2 * h_fd, 1.0 - 2 * h_fd, 1.0 - h_fd, 1.0])
    b = sample1(p.phi_B, "phi_B", xs, "x")
    left = sample1(p.phi_L, "phi_L", np.array([0.0]))[0]
    right = sample1(p.phi_R, "phi_R", np.array([0.0]))[0]
    d0 = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * h_fd)
    d1 = (3.0 * b[5] - 4.0 * b[4] + b[3]) / (2.0 * h_fd)
    return float(b[0] - left - d0), float(b[5] - right + d1)


def validate_problem(p: Problem, grid_density: int = 10, h_fd: float = 1e-4) -> ValidationReport:
    """Sample ``a`` on a uniform lattice and check ``a > alpha``; also compute corner residuals.

    Every data field is evaluated on the lattice (boundary data on its edge)
    so that non-finite data is reported before any solve.
    """
    if grid_density < 2:
        raise ValueError("grid_density must be at least 2")
    xs = np.linspace(0.0, 1.0, grid_density + 1)
    ts = np.linspace(0.0, p.T, grid_density + 1)
    X, Tm = np.meshgrid(xs, ts, indexing="ij")
    a = sample2(p.a, "a", X, Tm)
    sample2(p.f, "f", X, Tm)
    sample1(p.phi_L, "phi_L", ts)
    sample1(p.phi_R, "phi_R", ts)
    sample1(p.phi_B, "phi_B", xs, "x")
    i, k = np.unravel_index(np.argmin(a), a.shape)
    amin = float(a[i, k])
    return ValidationReport(
        positivity_ok=amin > p.alpha,
        min_sampled_a=amin,
        min_location=(float(xs[i]), float(ts[k])),
        compatibility_residuals=check_corner_compatibility(p, h_fd),
    )


# Module-level callables so the built-in problems pickle cleanly.

def _example_a(x, t):
    return 1.0 + 3.0 * np.asarray(t) + 0.0 * np.asarray(x)


def _example_f(x, t):
    return np.exp(3.0 * np.asarray(t)) + 0.0 * np.asarray(x)


def _example_boundary(t):
    return 1.0 + np.asarray(t) ** 5


def _one1(s):
    return np.ones_like(np.asarray(s, dtype=np.float64))


def _one2(x, t):
    return np.ones(np.broadcast(np.asarray(x), np.asarray(t)).shape)


def example_problem(epsilon: float = 2.0 ** -14) -> Problem:
    """u_t - eps u_xx + (1+3t) u = exp(3t), Robin data 1+t^5 at both ends, u(x,0)=1."""
    return Problem(
        a=_example_a,
        f=_example_f,
        phi_L=_example_boundary,
        phi_R=_example_boundary,
        phi_B=_one1,
        epsilon=epsilon,
        alpha=0.9,
        T=1.0,
    )


def constant_problem(epsilon: float = 2.0 ** -6, T: float = 1.0) -> Problem:
    """a = f = 1 and unit boundary/initial data; u = 1 solves it and its discretization exactly."""
    return Problem(a=_one2, f=_one2, phi_L=_one1, phi_R=_one1, phi_B=_one1,
                   epsilon=epsilon, alpha=0.5, T=T)
