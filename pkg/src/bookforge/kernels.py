"""Nearest-neighbor scan kernel with import-time backend selection.

The hot loop of decontamination is an exact argmax-dot scan of every
generated embedding against every benchmark embedding. Two interchangeable
backends exist:

* ``numpy``: blocked BLAS matmul plus per-block argmax (the default; on
  typical builds BLAS is roughly an order of magnitude faster than a
  hand-rolled loop, see benchmarks/bench_kernels.py);
* ``native``: the compiled Cython extension (bookforge._simscan), built at
  install time when Cython and a C compiler are present. Single-pass, O(1)
  extra memory, useful where BLAS threading or block buffers are unwanted.

Both keep the first target index on exact similarity ties (strict ``>``
update), so the discrete results agree; similarities agree to float64
rounding. Set BOOKFORGE_KERNEL=native|numpy to override the default.
"""

from __future__ import annotations

import os
from typing import Optional, Tuple

import numpy as np

try:  # pragma: no cover - exercised indirectly via backend selection
    if os.environ.get("BOOKFORGE_NO_NATIVE"):
        _simscan = None
    else:
        from . import _simscan  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover
    _simscan = None

HAVE_NATIVE = _simscan is not None
_env_choice = os.environ.get("BOOKFORGE_KERNEL", "")
if _env_choice == "native" and HAVE_NATIVE:
    DEFAULT_BACKEND = "native"
elif _env_choice == "numpy":
    DEFAULT_BACKEND = "numpy"
else:
    DEFAULT_BACKEND = "numpy"

_BLOCK_BYTES = 64 * 1024 * 1024  # cap on the similarity block buffer


def _argmax_dot_numpy(queries: np.ndarray, targets: np.ndarray):
    n, m = queries.shape[0], targets.shape[0]
    block_rows = max(1, min(512, _BLOCK_BYTES // max(m * 8, 1)))
    idx = np.empty(n, dtype=np.int64)
    sim = np.empty(n, dtype=np.float64)
    tt = targets.T
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        sims = queries[start:stop] @ tt
        block_idx = np.argmax(sims, axis=1)  # first occurrence on ties
        idx[start:stop] = block_idx
        sim[start:stop] = sims[np.arange(stop - start), block_idx]
    return idx, sim


def _argmax_dot_native(queries: np.ndarray, targets: np.ndarray):
    n = queries.shape[0]
    idx = np.empty(n, dtype=np.int64)
    sim = np.empty(n, dtype=np.float64)
    _simscan.argmax_dot(queries, targets, idx, sim)
    return idx, sim


def argmax_dot(
    queries: np.ndarray,
    targets: np.ndarray,
    backend: Optional[str] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """For each query row, the target row index with maximal dot product.

    Expects C-contiguous float64 matrices of equal width. ``backend`` forces
    "native" or "numpy"; default picks the compiled kernel when available.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if queries.ndim != 2 or targets.ndim != 2:
        raise ValueError("argmax_dot expects 2-D matrices")
    if queries.shape[1] != targets.shape[1]:
        raise ValueError(
            f"dimensionality mismatch: {queries.shape[1]} vs {targets.shape[1]}"
        )
    if targets.shape[0] == 0:
        raise ValueError("empty target matrix")
    if queries.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)

    chosen = backend or DEFAULT_BACKEND
    if chosen == "native":
        if not HAVE_NATIVE:
            raise RuntimeError("native kernel requested but not built")
        return _argmax_dot_native(queries, targets)
    if chosen == "numpy":
        return _argmax_dot_numpy(queries, targets)
    raise ValueError(f"unknown backend {chosen!r}")


__all__ = ["argmax_dot", "HAVE_NATIVE", "DEFAULT_BACKEND"]
