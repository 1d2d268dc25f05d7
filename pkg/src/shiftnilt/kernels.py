"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module is used. Set ``SHIFTNILT_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("SHIFTNILT_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

erfcx = _impl.erfcx
expint_scaled = _impl.expint_scaled
e1 = _impl.e1
erfcx_array = _impl.erfcx_array
expint_scaled_array = _impl.expint_scaled_array
e1_array = _impl.e1_array
cosine_product_moments = _impl.cosine_product_moments


def backend_module(name):
    """Return the kernel module for ``"python"`` or ``"compiled"``."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
