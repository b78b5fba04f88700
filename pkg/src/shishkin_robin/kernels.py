"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the pure-Python
version is loaded. Setting ``SHISHKIN_ROBIN_PURE_PYTHON=1`` forces the
fallback.
"""

import os

from . import _kernels_py

python_thomas_solve = _kernels_py.thomas_solve

compiled_thomas_solve = None
if not os.environ.get("SHISHKIN_ROBIN_PURE_PYTHON"):
    try:
        from ._kernels import thomas_solve as compiled_thomas_solve
    except ImportError:
        pass

if compiled_thomas_solve is not None:
    BACKEND = "cython"
    thomas_solve = compiled_thomas_solve
else:
    BACKEND = "python"
    thomas_solve = python_thomas_solve

__all__ = ["BACKEND", "thomas_solve", "python_thomas_solve", "compiled_thomas_solve"]
