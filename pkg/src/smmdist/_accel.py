"""Kernel backend selection.

The compiled extension is used when it imports; ``SMMDIST_PURE_PYTHON=1``
forces the pure-Python kernels.
"""
import os

from . import _kernels_py

if os.environ.get("SMMDIST_PURE_PYTHON"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def available_backends() -> dict:
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
