"""Backend dispatch for the per-sample hot kernels.

The numba backend is used when available. Set ADLSTREAM_BACKEND=numpy to
force the pure-numpy fallback, or ADLSTREAM_BACKEND=numba to fail fast if
numba cannot be imported. `BACKEND` records which one is active.
"""
from __future__ import annotations

import os

_requested = os.environ.get("ADLSTREAM_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"ADLSTREAM_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy as _impl
        BACKEND = "numpy"

affine_sigmoid = _impl.affine_sigmoid
affine_softmax = _impl.affine_softmax
local_grads = _impl.local_grads
sgd_step = _impl.sgd_step

__all__ = ["BACKEND", "affine_sigmoid", "affine_softmax", "local_grads", "sgd_step"]
