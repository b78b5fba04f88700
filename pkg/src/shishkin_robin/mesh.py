"""Piecewise-uniform Shishkin space mesh, uniform time mesh and layer functions."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceMesh", "TimeMesh", "transition_parameter", "build_space_mesh",
    "build_time_mesh", "layer_functions", "write_mesh_csv",
]


@dataclass(frozen=True, eq=False)
class SpaceMesh:
    """Points x_0..x_N with N/4 fine intervals in each layer region [0,sigma], [1-sigma,1]."""

    points: np.ndarray
    sigma: float
    N: int
    h_layer: float
    H_interior: float

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def clamped(self) -> bool:
        return self.sigma == 0.25

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class TimeMesh:
    levels: np.ndarray
    M: int
    tau: float

    @property
    def T(self) -> float:
        return float(self.levels[-1])


def transition_parameter(epsilon: float, alpha: float, N: int) -> float:
    """sigma = min(1/4, 2 sqrt(eps/alpha) ln N), natural log."""
    return min(0.25, 2.0 * math.sqrt(epsilon / alpha) * math.log(N))


def _check_N(N: int) -> None:
    if int(N) != N or N < 8 or N % 4:
        raise ValueError(f"N must be a multiple of 4 and at least 8, got {N}")


def build_space_mesh(epsilon: float, alpha: float, N: int) -> SpaceMesh:
    _check_N(N)
    N = int(N)
    sigma = transition_parameter(epsilon, alpha, N)
    q = N // 4
    # each region is generated from its own endpoints so sigma and 1-sigma are hit exactly
    left = np.linspace(0.0, sigma, q + 1)
    middle = np.linspace(sigma, 1.0 - sigma, 2 * q + 1)
    right = np.linspace(1.0 - sigma, 1.0, q + 1)
    points = np.concatenate([left, middle[1:], right[1:]])
    points.flags.writeable = False
    return SpaceMesh(
        points=points,
        sigma=sigma,
        N=N,
        h_layer=4.0 * sigma / N,
        H_interior=2.0 * (1.0 - 2.0 * sigma) / N,
    )


def build_time_mesh(T: float, M: int) -> TimeMesh:
    """Uniform levels t_k = k*T/M.

    Levels are computed as (k*T)/M so that a mesh with 2M intervals contains
    the levels of the M-interval mesh bit-for-bit.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    levels = np.arange(M + 1, dtype=np.float64) * T / M
    levels[-1] = T
    levels.flags.writeable = False
    return TimeMesh(levels=levels, M=M, tau=T / M)


def layer_functions(x, epsilon: float, alpha: float):
    """Return (B_L, B_R, B) with B_L(x) = exp(-x sqrt(alpha/eps)) and B_R(x) = B_L(1-x)."""
    rate = math.sqrt(alpha / epsilon)
    bl = np.exp(-np.asarray(x, dtype=np.float64) * rate)
    br = np.exp(-(1.0 - np.asarray(x, dtype=np.float64)) * rate)
    if np.ndim(bl) == 0:
        bl, br = float(bl), float(br)
    return bl, br, bl + br


def write_mesh_csv(mesh: SpaceMesh, out=None) -> str | None:
    """One point per line, 17 significant digits. Returns the text if ``out`` is None."""
    buf = io.StringIO() if out is None else out
    for x in mesh.points:
        buf.write(f"{x:.17g}\n")
    return buf.getvalue() if out is None else None
