"""Hot array kernels with a compiled backend and a pure-NumPy fallback.

The compiled extension is optional; when it is missing, or when the
environment variable RETROKIT_KERNELS is set to "python", the NumPy
implementations are used. Both backends follow the same index-order
semantics, so results are bit-identical and everything downstream stays
deterministic either way.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from retrokit import _ckern
except ImportError:
    _ckern = None

_choice = os.environ.get("RETROKIT_KERNELS", "auto")
if _choice not in ("auto", "c", "python"):
    raise ValueError(f"RETROKIT_KERNELS must be auto, c or python, not {_choice!r}")
if _choice == "c" and _ckern is None:
    raise ImportError("compiled kernels requested but retrokit._ckern is not built")

BACKEND = "python" if _choice == "python" or _ckern is None else "c"


def _as_f64(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def _as_i64(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.int64)


def gather_rows(src: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Rows of src selected by idx; out[k] = src[idx[k]]."""
    src = _as_f64(src)
    idx = _as_i64(idx)
    if BACKEND == "c":
        return _ckern.gather_rows_f64(src, idx)
    return src[idx].copy()


def scatter_add_rows(acc: np.ndarray, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Accumulate vals into acc rows in index order; acc[idx[k]] += vals[k]."""
    if acc.dtype != np.float64 or not acc.flags.c_contiguous:
        raise ValueError("scatter_add_rows needs a contiguous float64 accumulator")
    idx = _as_i64(idx)
    vals = _as_f64(vals)
    if BACKEND == "c":
        _ckern.scatter_add_rows_f64(acc, idx, vals)
    else:
        np.add.at(acc, idx, vals)
    return acc


def segment_max(x: np.ndarray, seg: np.ndarray, n_seg: int
                ) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment column max and the first row index attaining it.

    Empty segments stay at -inf with argmax n (one past the last row).
    """
    x = _as_f64(x)
    seg = _as_i64(seg)
    if BACKEND == "c":
        return _ckern.segment_max_f64(x, seg, n_seg)
    n = x.shape[0]
    out = np.full((n_seg, x.shape[1]), -np.inf)
    np.maximum.at(out, seg, x)
    arg = np.full((n_seg, x.shape[1]), n, dtype=np.int64)
    rows, cols = np.nonzero(x == out[seg])
    np.minimum.at(arg, (seg[rows], cols), rows)
    return out, arg
