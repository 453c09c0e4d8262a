"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy/scipy
fallback. Set ``DYNBIP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if os.environ.get("DYNBIP_PURE_PYTHON") or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def get(name=None):
    """Kernel module for ``name`` (default: the active backend)."""
    return BACKENDS[name or BACKEND]
