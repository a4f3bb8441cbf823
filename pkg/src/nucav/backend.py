"""Scan-kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
functionally identical. Set NUCAV_PURE_PYTHON=1 to force the fallback (used
by the test suite and the backend benchmark).
"""

import os

from . import _kernel_py

if os.environ.get("NUCAV_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernel_py
    BACKEND = "python"
else:
    try:
        from . import _kernel as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernel_py
        BACKEND = "python"

scan_reflectance = _impl.scan_reflectance
