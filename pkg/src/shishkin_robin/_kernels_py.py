"""Pure-Python tridiagonal kernels, used when the compiled extension is absent."""

import numpy as np

from .errors import NumericError


def thomas_solve(lower, diag, upper, rhs):
    d = np.asarray(diag, dtype=np.float64)
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty system")
    if len(lower) != n - 1 or len(upper) != n - 1 or len(rhs) != n:
        raise ValueError("inconsistent tridiagonal band lengths")
    # plain floats: element access on ndarrays is several times slower
    lo = np.asarray(lower, dtype=np.float64).tolist()
    up = np.asarray(upper, dtype=np.float64).tolist()
    b = np.asarray(rhs, dtype=np.float64).tolist()
    dd = d.tolist()

    cp = [0.0] * n
    x = [0.0] * n
    pivot = dd[0]
    if pivot == 0.0:
        raise NumericError("zero pivot in row 0")
    if n > 1:
        cp[0] = up[0] / pivot
    x[0] = b[0] / pivot
    for i in range(1, n):
        pivot = dd[i] - lo[i - 1] * cp[i - 1]
        if pivot == 0.0:
            raise NumericError(f"zero pivot in row {i}")
        if i < n - 1:
            cp[i] = up[i] / pivot
        x[i] = (b[i] - lo[i - 1] * x[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return np.array(x)
