"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``KINSA_PURE_PYTHON=1`` to force the numpy kernel.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .kinematics import alpha_trig

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

HAVE_EXTENSION = _compiled is not None
BACKENDS = ("cython", "python") if HAVE_EXTENSION else ("python",)
DEFAULT_BACKEND = (
    "cython" if HAVE_EXTENSION and os.environ.get("KINSA_PURE_PYTHON", "") != "1" else "python"
)

_CHUNK = 4096


def kernel_params(model) -> np.ndarray:
    """Pack a model into the (n, 5) array both kernels consume."""
    params = np.empty((model.n, 5))
    for i, row in enumerate(model.rows):
        ca, sa = alpha_trig(row.alpha)
        params[i] = (row.a, ca, sa, row.d, row.theta_offset)
    return params


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get("KINSA_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def chain_dets(model, Q, threads=None, backend=None) -> np.ndarray:
    """(m, 3) array of [det J, det J11, det J22] for each configuration row of Q.

    Entries that are undefined for the chain length are NaN.
    """
    backend = backend or DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} unavailable; have {BACKENDS}")
    threads = resolve_threads(threads)
    params = kernel_params(model)
    Q = np.ascontiguousarray(np.atleast_2d(np.asarray(Q, dtype=float)))
    if backend == "cython":
        return _compiled.chain_dets(params, Q, threads)
    if threads == 1 or len(Q) <= _CHUNK:
        return _kernels_py.chain_dets(params, Q)
    from concurrent.futures import ThreadPoolExecutor

    chunks = [Q[i : i + _CHUNK] for i in range(0, len(Q), _CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: _kernels_py.chain_dets(params, c), chunks))
    return np.concatenate(parts, axis=0)
