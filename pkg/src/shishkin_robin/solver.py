"""Implicit finite-difference scheme on the Shishkin mesh.

At each level t_k the scheme

    (U_j^k - U_j^{k-1})/tau - eps d2x U_j^k + a(x_j,t_k) U_j^k = f(x_j,t_k),  0 < j < N
    U_0^k - (U_1^k - U_0^k)/h_1             = phi_L(t_k)
    U_N^k + (U_N^k - U_{N-1}^k)/h_N         = phi_R(t_k)

is one tridiagonal system, solved by the Thomas algorithm.  The second
difference on the nonuniform mesh is

    d2x U_j = 2/(h_j + h_{j+1}) * ((U_{j+1}-U_j)/h_{j+1} - (U_j-U_{j-1})/h_j).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataEvaluationError, NumericError
from .mesh import SpaceMesh, TimeMesh
from .problem import Problem, sample1, sample2

__all__ = [
    "TridiagonalSystem", "GridSolution", "second_difference", "assemble_time_step",
    "dominance_margins", "thomas_solve", "march", "discrete_residual",
    "discrete_x_derivative", "write_grid_csv",
]


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Row i reads lower[i-1]*u[i-1] + diag[i]*u[i] + upper[i]*u[i+1] = rhs[i]."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __len__(self):
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)


@dataclass(frozen=True, eq=False)
class GridSolution:
    """U(x_j, t_k) stored as ``values[j, k]``."""

    values: np.ndarray
    space_mesh: SpaceMesh
    time_mesh: TimeMesh
    problem: Problem

    @property
    def x(self) -> np.ndarray:
        return self.space_mesh.points

    @property
    def t(self) -> np.ndarray:
        return self.time_mesh.levels


def second_difference(U_prev, U_mid, U_next, h_left, h_right):
    return (2.0 / (h_left + h_right)) * ((U_next - U_mid) / h_right - (U_mid - U_prev) / h_left)


def dominance_margins(sys: TridiagonalSystem) -> np.ndarray:
    """|diag_i| - |lower_{i-1}| - |upper_i| per row; all positive for a strictly dominant system."""
    off = np.zeros_like(sys.diag)
    off[1:] += np.abs(sys.lower)
    off[:-1] += np.abs(sys.upper)
    return np.abs(sys.diag) - off


def assemble_time_step(p: Problem, sm: SpaceMesh, tau: float, t_k: float,
                       U_prev_level) -> TridiagonalSystem:
    x = sm.points
    N = len(x) - 1
    U_prev = np.asarray(U_prev_level, dtype=np.float64)
    if U_prev.shape != (N + 1,):
        raise ValueError(f"previous level has shape {U_prev.shape}, expected ({N + 1},)")
    h = np.diff(x)
    hl, hr = h[:-1], h[1:]
    xi = x[1:-1]
    a = sample2(p.a, "a", xi, t_k)
    f = sample2(p.f, "f", xi, t_k)
    tt = np.array([t_k])
    gl = sample1(p.phi_L, "phi_L", tt)[0]
    gr = sample1(p.phi_R, "phi_R", tt)[0]

    lo_in = -2.0 * p.epsilon / (hl * (hl + hr))
    up_in = -2.0 * p.epsilon / (hr * (hl + hr))

    lower = np.empty(N)
    upper = np.empty(N)
    diag = np.empty(N + 1)
    rhs = np.empty(N + 1)

    diag[0] = 1.0 + 1.0 / h[0]
    upper[0] = -1.0 / h[0]
    rhs[0] = gl

    lower[:-1] = lo_in
    upper[1:] = up_in
    # -(lo+up) equals 2 eps/(h_j h_{j+1}) algebraically
    diag[1:-1] = 1.0 / tau + a - lo_in - up_in
    rhs[1:-1] = f + U_prev[1:-1] / tau

    lower[-1] = -1.0 / h[-1]
    diag[-1] = 1.0 + 1.0 / h[-1]
    rhs[-1] = gr
    return TridiagonalSystem(lower, diag, upper, rhs)


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Forward elimination and back substitution without pivoting.

    Raises `NumericError` on a zero pivot, which cannot occur for strictly
    diagonally dominant input.
    """
    x = kernels.thomas_solve(sys.lower, sys.diag, sys.upper, sys.rhs)
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite solution of tridiagonal system")
    return x


def march(p: Problem, sm: SpaceMesh, tm: TimeMesh) -> GridSolution:
    """Step the scheme from t_0 to t_M; row 0 is phi_B at the mesh points."""
    if abs(tm.T - p.T) > 1e-12 * p.T:
        raise ValueError(f"time mesh ends at {tm.T}, problem at {p.T}")
    x = sm.points
    values = np.empty((len(x), tm.M + 1))
    values[:, 0] = sample1(p.phi_B, "phi_B", x, "x")
    for k in range(1, tm.M + 1):
        t_k = float(tm.levels[k])
        try:
            sys = assemble_time_step(p, sm, tm.tau, t_k, values[:, k - 1])
            values[:, k] = thomas_solve(sys)
        except (DataEvaluationError, NumericError) as exc:
            raise type(exc)(f"time level k={k} (t={t_k:.17g}): {exc}") from exc
    values.flags.writeable = False
    return GridSolution(values, sm, tm, p)


def discrete_residual(sol: GridSolution) -> tuple[float, float, float]:
    """Max |L U - f| over interior nodes and max Robin-row residuals over levels k >= 1."""
    p = sol.problem
    U = sol.values
    x = sol.x
    t = sol.t[1:]
    tau = sol.time_mesh.tau
    h = np.diff(x)
    hl, hr = h[:-1, None], h[1:, None]
    X, Tm = x[1:-1, None], t[None, :]
    Ui = U[1:-1, 1:]
    d2 = second_difference(U[:-2, 1:], Ui, U[2:, 1:], hl, hr)
    Lu = (Ui - U[1:-1, :-1]) / tau - p.epsilon * d2 + sample2(p.a, "a", X, Tm) * Ui
    interior = np.abs(Lu - sample2(p.f, "f", X, Tm))
    left = U[0, 1:] - (U[1, 1:] - U[0, 1:]) / h[0] - sample1(p.phi_L, "phi_L", t)
    right = U[-1, 1:] + (U[-1, 1:] - U[-2, 1:]) / h[-1] - sample1(p.phi_R, "phi_R", t)
    imax = float(interior.max()) if interior.size else 0.0
    return imax, float(np.abs(left).max()), float(np.abs(right).max())


def discrete_x_derivative(sol: GridSolution) -> np.ndarray:
    """D_x U on the grid: one-sided at the ends, width-weighted central average inside.

    The interior formula (h_j D+ + h_{j+1} D-)/(h_j + h_{j+1}) is exact for
    quadratics on a nonuniform mesh.
    """
    U = sol.values
    h = np.diff(sol.x)[:, None]
    slopes = np.diff(U, axis=0) / h
    D = np.empty_like(U)
    D[0] = slopes[0]
    D[-1] = slopes[-1]
    hl, hr = h[:-1], h[1:]
    D[1:-1] = (hl * slopes[1:] + hr * slopes[:-1]) / (hl + hr)
    return D


def write_grid_csv(sol: GridSolution, out=None, what: str = "solution") -> str | None:
    """CSV rows ``x,t,U`` (or ``x,t,DxU``), row-major over (k, j), 17 significant digits."""
    if what == "solution":
        data, col = sol.values, "U"
    elif what == "derivative":
        data, col = discrete_x_derivative(sol), "DxU"
    else:
        raise ValueError(f"unknown output {what!r}")
    buf = io.StringIO() if out is None else out
    buf.write(f"x,t,{col}\n")
    xs = [f"{v:.17g}" for v in sol.x]
    for k, tk in enumerate(sol.t):
        ts = f"{tk:.17g}"
        column = data[:, k]
        buf.write("".join(f"{xj},{ts},{u:.17g}\n" for xj, u in zip(xs, column)))
    return buf.getvalue() if out is None else None
