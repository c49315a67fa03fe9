"""Pairwise-tally kernel selection: compiled extension with numpy fallback.

Set COPELAND_FORCE_PY=1 to skip the extension (used by the benchmark).
"""

import os

import numpy as np

_INT32_SAFE = (1 << 31) - 1


def _accumulate_linear_py(orders, mults, out):
    """Chunked numpy fallback: rank comparison matrices reduced per chunk."""
    nv, nc = orders.shape
    if nv == 0 or nc < 2:
        return
    ranks = np.empty((nv, nc), dtype=np.int32)
    ranks[np.arange(nv)[:, None], orders] = np.arange(nc, dtype=np.int32)[None, :]
    chunk = max(1, (1 << 22) // (nc * nc))
    acc = np.zeros(nc * nc, dtype=np.int64)
    for lo in range(0, nv, chunk):
        hi = min(nv, lo + chunk)
        better = ranks[lo:hi, :, None] < ranks[lo:hi, None, :]
        acc += mults[lo:hi] @ better.reshape(hi - lo, -1).astype(np.int64)
    out += acc.reshape(nc, nc)


USING_EXTENSION = False

if os.environ.get("COPELAND_FORCE_PY"):
    _ext = None
else:
    try:
        from . import _tallyx as _ext

        USING_EXTENSION = True
    except ImportError:
        _ext = None


def accumulate_linear(orders, mults, out):
    """Add every ballot's pairwise preferences into `out` (int64 C x C)."""
    if _ext is None:
        _accumulate_linear_py(orders, mults, out)
    elif int(mults.sum()) <= _INT32_SAFE:
        _ext.accumulate_linear32(
            np.ascontiguousarray(orders, dtype=np.int32),
            np.ascontiguousarray(mults, dtype=np.int32),
            out,
        )
    else:
        _ext.accumulate_linear64(
            np.ascontiguousarray(orders, dtype=np.int64),
            np.ascontiguousarray(mults, dtype=np.int64),
            out,
        )
