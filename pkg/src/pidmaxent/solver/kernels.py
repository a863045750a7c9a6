"""Kernel selection: the compiled extension when importable, else numpy.

Set ``PIDMAXENT_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("PIDMAXENT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

objective = _impl.objective
hessian_inverse = _impl.hessian_inverse
apply_inverse = _impl.apply_inverse
block_lse_max = _impl.block_lse_max
