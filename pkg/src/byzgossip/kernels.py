"""Kernel backend selection.

The compiled backend is used when the extension was built; setting
``BYZGOSSIP_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from byzgossip import _pykernels

if os.environ.get("BYZGOSSIP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from byzgossip import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

clip_rows = _impl.clip_rows
scatter_add = _impl.scatter_add
segment_kth_largest = _impl.segment_kth_largest
segment_top_mask = _impl.segment_top_mask
gcr_interval_scan = _impl.gcr_interval_scan

__all__ = [
    "BACKEND",
    "clip_rows",
    "scatter_add",
    "segment_kth_largest",
    "segment_top_mask",
    "gcr_interval_scan",
]
