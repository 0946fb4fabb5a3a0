"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``SIEVE_LAB_PURE_PYTHON=1`` forces the fallback.  Both backends
return bit-identical results.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("SIEVE_LAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

accumulate_boxes = _impl.accumulate_boxes
sup_deviation = _impl.sup_deviation

__all__ = ["BACKEND", "accumulate_boxes", "sup_deviation"]
