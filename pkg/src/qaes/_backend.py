"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``QAES_PURE_PYTHON=1`` to force the fallback.
"""

import os

from qaes import _pykernels

kernels = _pykernels
if not os.environ.get("QAES_PURE_PYTHON"):
    try:
        from qaes import _ckernels as kernels
    except ImportError:
        pass

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND", "available"]


def available():
    """Names of the kernel modules importable in this environment."""
    out = {"python": _pykernels}
    try:
        from qaes import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
