"""Kernel selection at import time.

The compiled core is used when it was built; set ``PSTGRAPHS_BACKEND=python``
to force the numpy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()


def get_kernels(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` (``"cython"``/``"python"``)."""
    if name is None:
        name = os.environ.get("PSTGRAPHS_BACKEND", "cython" if _compiled else "python")
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


kernels = get_kernels()
BACKEND = "cython" if kernels is _compiled else "python"
HAS_COMPILED = _compiled is not None
