"""Backend selection for the batched SO(3) kernels.

Imports the compiled extension when available, otherwise the numpy
fallback. Set ``CARA_FORCE_PYTHON=1`` to force the fallback (used by the
benchmark and the cross-backend tests).
"""
from __future__ import annotations

import os

from . import _numpy_kernels

try:
    from . import _speedups
except ImportError:
    _speedups = None

if _speedups is not None and os.environ.get("CARA_FORCE_PYTHON", "") not in ("1", "true"):
    _impl = _speedups
    BACKEND = "compiled"
else:
    _impl = _numpy_kernels
    BACKEND = "numpy"

batch_exp = _impl.batch_exp
batch_log = _impl.batch_log
batch_quat = _impl.batch_quat
edge_residuals = _impl.edge_residuals
