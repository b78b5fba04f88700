"""Two-mesh estimates of parameter-uniform convergence.

For each eps and refinement value n the two-mesh difference

    D_eps(n) = max over the coarse grid |U_n - U_2n|

is computed, then

    D(n)   = max_eps D_eps(n)
    p(n)   = log2(D(n) / D(2n))
    p*     = min_n p(n)
    C(n)   = D(n) n^p* / (1 - 2^-p*)
    C*     = max_n C(n)

Shishkin meshes for n and 2n intervals do not nest (sigma depends on ln n),
so on the space axis the fine solution is interpolated linearly in x.  Time
meshes nest, so the time axis compares nodal values directly.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .mesh import build_space_mesh, build_time_mesh
from .problem import Problem
from .solver import GridSolution, march

__all__ = [
    "AXES", "DEFAULT_EPSILONS", "SweepConfig", "TwoMeshReport", "interpolate",
    "interpolate_grid", "solve_on", "two_mesh_difference", "run_sweep",
    "table_float", "format_table", "report_csv",
]

AXES = ("time", "space", "both")
DEFAULT_EPSILONS = tuple(2.0 ** -e for e in (6, 8, 10, 12, 14))
# two-mesh differences at or below this multiple of max|U| are rounding noise
ZERO_TOL = 1e-13
INTERPOLATION_NOTE = {
    "time": "time meshes nest; nodal comparison on the coarse grid",
    "space": "fine solution interpolated piecewise-linearly in x onto the coarse grid",
    "both": "fine solution interpolated bilinearly onto the coarse grid",
}


def _locate(nodes: np.ndarray, q: float) -> tuple[int, float]:
    i = int(np.searchsorted(nodes, q, side="right")) - 1
    i = min(max(i, 0), len(nodes) - 2)
    s = (q - nodes[i]) / (nodes[i + 1] - nodes[i])
    return i, s


def interpolate(sol: GridSolution, x: float, t: float) -> float:
    """Bilinear interpolation of U on its own tensor grid; exact at grid nodes."""
    xs, ts = sol.x, sol.t
    if not (0.0 <= x <= 1.0) or not (0.0 <= t <= ts[-1]):
        raise ValueError(f"query ({x}, {t}) lies outside [0,1] x [0,{ts[-1]}]")
    i, s = _locate(xs, x)
    k, w = _locate(ts, t)
    U = sol.values
    return float(
        (1 - s) * (1 - w) * U[i, k] + s * (1 - w) * U[i + 1, k]
        + (1 - s) * w * U[i, k + 1] + s * w * U[i + 1, k + 1]
    )


def interpolate_grid(sol: GridSolution, xq: np.ndarray, tq: np.ndarray) -> np.ndarray:
    """Bilinear interpolation on the tensor product ``xq x tq``; shape (len(xq), len(tq))."""
    xs, ts = sol.x, sol.t
    xq = np.asarray(xq, dtype=np.float64)
    tq = np.asarray(tq, dtype=np.float64)
    if xq.min() < 0 or xq.max() > 1 or tq.min() < 0 or tq.max() > ts[-1]:
        raise ValueError("query grid lies outside the solution domain")
    U = sol.values
    k = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
    w = (tq - ts[k]) / (ts[k + 1] - ts[k])
    # rows at the query times, then interpolate each column in x
    rows = U[:, k] * (1 - w) + U[:, k + 1] * w
    exact = w == 0
    rows[:, exact] = U[:, k[exact]]
    i = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, len(xs) - 2)
    s = ((xq - xs[i]) / (xs[i + 1] - xs[i]))[:, None]
    out = rows[i] * (1 - s) + rows[i + 1] * s
    at_node = (s[:, 0] == 0)
    out[at_node] = rows[i[at_node]]
    return out


def solve_on(p: Problem, N: int, M: int) -> GridSolution:
    return march(p, build_space_mesh(p.epsilon, p.alpha, N), build_time_mesh(p.T, M))


def _refined(axis: str, N: int, M: int) -> tuple[int, int]:
    if axis == "time":
        return N, 2 * M
    if axis == "space":
        return 2 * N, M
    if axis == "both":
        return 2 * N, 2 * M
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def _difference(coarse: GridSolution, fine: GridSolution) -> float:
    fine_on_coarse = interpolate_grid(fine, coarse.x, coarse.t)
    return float(np.max(np.abs(coarse.values - fine_on_coarse)))


def two_mesh_difference(p: Problem, axis: str, N: int, M: int) -> float:
    """max over the (N, M) grid of |U_coarse - U_fine| with the fine grid refined along ``axis``."""
    N2, M2 = _refined(axis, N, M)
    return _difference(solve_on(p, N, M), solve_on(p, N2, M2))


@dataclass(frozen=True)
class SweepConfig:
    """A sweep over eps and a doubling sequence of mesh counts.

    ``fixed`` is the count held constant: N for axis="time", M for
    axis="space".  For axis="both" it is the M paired with the first
    refinement value, and M doubles along with N.
    """

    axis: str
    fixed: int
    refine_values: tuple
    problem: Problem
    epsilons: tuple = DEFAULT_EPSILONS

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        r = tuple(int(v) for v in self.refine_values)
        object.__setattr__(self, "refine_values", r)
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if len(r) < 2:
            raise ValueError("need at least two refinement values")
        if any(b != 2 * a for a, b in zip(r, r[1:])):
            raise ValueError(f"refinement values must double: {r}")
        if r[0] < 1 or self.fixed < 1:
            raise ValueError("mesh counts must be positive")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ValueError("epsilons must be a non-empty list of positive numbers")
        for N, _ in self.grids():
            if N % 4 or N < 8:
                raise ValueError(f"N must be a multiple of 4 and at least 8, got {N}")

    def grids(self) -> list[tuple[int, int]]:
        """(N, M) for each refinement value plus the finest comparison grid."""
        out = []
        for i, n in enumerate(self.refine_values):
            if self.axis == "time":
                out.append((self.fixed, n))
            elif self.axis == "space":
                out.append((n, self.fixed))
            else:
                out.append((n, self.fixed * 2 ** i))
        out.append(_refined(self.axis, *out[-1]))
        return out


@dataclass
class TwoMeshReport:
    axis: str
    epsilons: tuple
    refine_values: tuple
    D_eps: np.ndarray
    D_uniform: np.ndarray
    orders: list
    p_star: Optional[float]
    constants: list
    C_star: Optional[float]
    fixed: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def orders_defined(self) -> bool:
        return self.p_star is not None


def _orders(D: Sequence[float]) -> list:
    out = []
    for a, b in zip(D, D[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


def _eps_row(p: Problem, grids: list[tuple[int, int]]) -> list[float]:
    # the fine solution of refinement i is the coarse solution of refinement i+1
    sols = [solve_on(p, N, M) for N, M in grids]
    floor = ZERO_TOL * max(1.0, max(float(np.abs(s.values).max()) for s in sols))
    diffs = [_difference(c, f) for c, f in zip(sols, sols[1:])]
    return [d if d > floor else 0.0 for d in diffs]


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> TwoMeshReport:
    grids = cfg.grids()
    problems = [cfg.problem.with_epsilon(e) for e in cfg.epsilons]
    if jobs > 1 and len(problems) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda q: _eps_row(q, grids), problems))
    else:
        rows = [_eps_row(q, grids) for q in problems]
    D_eps = np.array(rows, dtype=np.float64)
    D = D_eps.max(axis=0)
    orders = _orders(D.tolist())
    defined = [o for o in orders if o is not None]
    p_star = min(defined) if defined else None
    if p_star is not None and p_star > 0:
        denom = 1.0 - 2.0 ** -p_star
        constants = [float(d) * n ** p_star / denom for d, n in zip(D, cfg.refine_values)]
        C_star = max(constants)
    else:
        constants = [None] * len(D)
        C_star = None
    return TwoMeshReport(
        axis=cfg.axis,
        epsilons=cfg.epsilons,
        refine_values=cfg.refine_values,
        D_eps=D_eps,
        D_uniform=D,
        orders=orders,
        p_star=p_star,
        constants=constants,
        C_star=C_star,
        fixed=cfg.fixed,
        metadata={
            "comparison": INTERPOLATION_NOTE[cfg.axis],
            "grids": grids,
            "zero_tolerance": ZERO_TOL,
        },
    )


# --- output ----------------------------------------------------------------

def table_float(v: Optional[float]) -> str:
    """Three significant digits with the mantissa in [0.1, 1): 0.0266 -> '0.266E-01'."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "undefined"
    if v == 0:
        return "0.000E+00"
    mant, exp = f"{v:.2E}".split("E")
    sign = "-" if mant.startswith("-") else ""
    digits = mant.lstrip("-").replace(".", "")
    return f"{sign}0.{digits}E{int(exp) + 1:+03d}"


def _eps_label(e: float) -> str:
    k = math.log2(e)
    return f"2^{int(k)}" if k.is_integer() else f"{e:.6g}"


def format_table(report: TwoMeshReport) -> str:
    """Aligned text laid out like the published tables."""
    var = {"time": "t", "space": "x", "both": "(x,t)"}[report.axis]
    fixed_name = {"time": "N", "space": "M", "both": "M0"}[report.axis]
    cols = report.refine_values
    w = 12
    lines = [
        f"Two-mesh differences, axis={report.axis}, {fixed_name}={report.fixed}",
        f"{'eps':<10}" + "".join(f"{n:>{w}}" for n in cols),
    ]
    rule = "-" * (10 + w * len(cols))
    lines.append(rule)
    for e, row in zip(report.epsilons, report.D_eps):
        lines.append(f"{_eps_label(e):<10}" + "".join(f"{table_float(d):>{w}}" for d in row))
    lines.append(rule)
    lines.append(f"{'D^N':<10}" + "".join(f"{table_float(d):>{w}}" for d in report.D_uniform))
    lines.append(f"{'p^N':<10}" + "".join(f"{table_float(o):>{w}}" for o in report.orders))
    lines.append(f"{'C^N_p*':<10}" + "".join(f"{table_float(c):>{w}}" for c in report.constants))
    lines.append(rule)
    if report.p_star is None:
        lines.append(f"Computed {var}-order of eps-uniform convergence: order undefined")
        lines.append("Computed eps-uniform error constant: undefined")
    else:
        lines.append(f"Computed {var}-order of eps-uniform convergence, p* = {report.p_star:.7f}")
        if report.C_star is None:
            lines.append("Computed eps-uniform error constant: undefined")
        else:
            lines.append(f"Computed eps-uniform error constant, C*_p* = {report.C_star:.7g}")
    lines.append(f"note: {report.metadata.get('comparison', '')}")
    return "\n".join(lines) + "\n"


def _num(v) -> str:
    return "" if v is None else f"{v:.17g}"


def report_csv(report: TwoMeshReport) -> str:
    """CSV with columns epsilon,refinement,D_eps and footer rows D, p, C, p_star, C_star."""
    buf = io.StringIO()
    buf.write("epsilon,refinement,D_eps\n")
    for e, row in zip(report.epsilons, report.D_eps):
        for n, d in zip(report.refine_values, row):
            buf.write(f"{e:.17g},{n},{d:.17g}\n")
    for n, d in zip(report.refine_values, report.D_uniform):
        buf.write(f"D,{n},{d:.17g}\n")
    for n, o in zip(report.refine_values, report.orders):
        buf.write(f"p,{n},{_num(o)}\n")
    for n, c in zip(report.refine_values, report.constants):
        buf.write(f"C,{n},{_num(c)}\n")
    buf.write(f"p_star,,{_num(report.p_star)}\n")
    buf.write(f"C_star,,{_num(report.C_star)}\n")
    return buf.getvalue()
