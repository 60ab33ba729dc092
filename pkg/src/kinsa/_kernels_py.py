"""Pure numpy implementation of the batch determinant kernel.

Mirrors ``_kernels.chain_dets`` and is used when the compiled extension is
unavailable or disabled.
"""

from __future__ import annotations

import numpy as np


def chain_dets(params, Q, threads=1):
    params = np.ascontiguousarray(params, dtype=float)
    Q = np.ascontiguousarray(Q, dtype=float)
    n = params.shape[0]
    if Q.ndim != 2 or Q.shape[1] != n:
        raise ValueError("Q column count does not match the chain length")
    m = Q.shape[0]

    rot = np.broadcast_to(np.eye(3), (m, 3, 3)).copy()
    pos = np.zeros((m, 3))
    origins = np.empty((n, m, 3))
    axes = np.empty((n, m, 3))
    for i in range(n):
        a, ca, sa, d, offset = params[i]
        origins[i] = pos
        axes[i] = rot[:, :, 2]
        t = Q[:, i] + offset
        ct, st = np.cos(t), np.sin(t)
        A = np.zeros((m, 3, 3))
        A[:, 0, 0] = ct
        A[:, 0, 1] = -st * ca
        A[:, 0, 2] = st * sa
        A[:, 1, 0] = st
        A[:, 1, 1] = ct * ca
        A[:, 1, 2] = -ct * sa
        A[:, 2, 1] = sa
        A[:, 2, 2] = ca
        local = np.stack([a * ct, a * st, np.full(m, d)], axis=1)
        pos = pos + np.einsum("mij,mj->mi", rot, local)
        rot = rot @ A

    J = np.empty((m, 6, n))
    J[:, :3, :] = np.cross(axes, pos[None, :, :] - origins).transpose(1, 2, 0)
    J[:, 3:, :] = axes.transpose(1, 2, 0)

    out = np.full((m, 3), np.nan)
    if m == 0:
        return out
    if n == 6:
        out[:, 0] = np.linalg.det(J)
    if n >= 3:
        out[:, 1] = np.linalg.det(J[:, :3, :3])
    if n >= 6:
        out[:, 2] = np.linalg.det(J[:, 3:6, 3:6])
    return out
