# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernel: Jacobian determinants over many configurations."""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport cos, sin, fabs, NAN


cdef double _det_lu(double *m, int n) noexcept nogil:
    # LU with partial pivoting on a row-major n x n scratch matrix (destroyed).
    cdef int i, j, k, p
    cdef double det = 1.0, pivot, tmp, factor
    for k in range(n):
        p = k
        pivot = fabs(m[k * n + k])
        for i in range(k + 1, n):
            if fabs(m[i * n + k]) > pivot:
                pivot = fabs(m[i * n + k])
                p = i
        if m[p * n + k] == 0.0:
            return 0.0
        if p != k:
            for j in range(n):
                tmp = m[k * n + j]
                m[k * n + j] = m[p * n + j]
                m[p * n + j] = tmp
            det = -det
        det *= m[k * n + k]
        for i in range(k + 1, n):
            factor = m[i * n + k] / m[k * n + k]
            for j in range(k + 1, n):
                m[i * n + j] -= factor * m[k * n + j]
    return det


cdef void _one(const double[:, ::1] params, const double[::1] qrow, int n,
               double *T, double *nxt, double *org, double *axs,
               double *jac, double *scratch, double *out) noexcept nogil:
    cdef int i, r, c, k
    cdef double ct, st, ca, sa, a, d, s
    cdef double A[12]
    cdef double px, py, pz, zx, zy, zz, dx, dy, dz
    # T holds the 3x4 top of the running transform, row-major.
    for r in range(3):
        for c in range(4):
            T[r * 4 + c] = 1.0 if r == c else 0.0
    for i in range(n):
        org[i * 3 + 0] = T[3]
        org[i * 3 + 1] = T[7]
        org[i * 3 + 2] = T[11]
        axs[i * 3 + 0] = T[2]
        axs[i * 3 + 1] = T[6]
        axs[i * 3 + 2] = T[10]
        a = params[i, 0]
        ca = params[i, 1]
        sa = params[i, 2]
        d = params[i, 3]
        ct = cos(qrow[i] + params[i, 4])
        st = sin(qrow[i] + params[i, 4])
        A[0] = ct
        A[1] = -st * ca
        A[2] = st * sa
        A[3] = a * ct
        A[4] = st
        A[5] = ct * ca
        A[6] = -ct * sa
        A[7] = a * st
        A[8] = 0.0
        A[9] = sa
        A[10] = ca
        A[11] = d
        for r in range(3):
            for c in range(4):
                s = T[r * 4 + 0] * A[c] + T[r * 4 + 1] * A[4 + c] + T[r * 4 + 2] * A[8 + c]
                if c == 3:
                    s = s + T[r * 4 + 3]
                nxt[r * 4 + c] = s
        for k in range(12):
            T[k] = nxt[k]
    px = T[3]
    py = T[7]
    pz = T[11]
    # jac is row-major 6 x n
    for i in range(n):
        zx = axs[i * 3 + 0]
        zy = axs[i * 3 + 1]
        zz = axs[i * 3 + 2]
        dx = px - org[i * 3 + 0]
        dy = py - org[i * 3 + 1]
        dz = pz - org[i * 3 + 2]
        jac[0 * n + i] = zy * dz - zz * dy
        jac[1 * n + i] = zz * dx - zx * dz
        jac[2 * n + i] = zx * dy - zy * dx
        jac[3 * n + i] = zx
        jac[4 * n + i] = zy
        jac[5 * n + i] = zz
    if n == 6:
        for k in range(36):
            scratch[k] = jac[k]
        out[0] = _det_lu(scratch, 6)
    else:
        out[0] = NAN
    if n >= 3:
        for r in range(3):
            for c in range(3):
                scratch[r * 3 + c] = jac[r * n + c]
        out[1] = _det_lu(scratch, 3)
    else:
        out[1] = NAN
    if n >= 6:
        for r in range(3):
            for c in range(3):
                scratch[r * 3 + c] = jac[(r + 3) * n + c + 3]
        out[2] = _det_lu(scratch, 3)
    else:
        out[2] = NAN


def chain_dets(double[:, ::1] params, double[:, ::1] Q, int threads=1):
    """Return an (m, 3) array of [det J, det J11, det J22] per row of ``Q``.

    ``params`` is (n, 5): a, cos(alpha), sin(alpha), d, theta_offset.
    """
    cdef Py_ssize_t m = Q.shape[0]
    cdef int n = params.shape[0]
    if Q.shape[1] != n:
        raise ValueError("Q column count does not match the chain length")
    out_arr = np.empty((m, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    # per-row scratch sized for n joints: T(12) nxt(12) org(3n) axs(3n) jac(6n) scratch(max(36, 9))
    cdef int width = 24 + 12 * n + 36
    work_arr = np.empty((max(threads, 1), width), dtype=np.float64)
    cdef double[:, ::1] work = work_arr
    cdef Py_ssize_t row
    cdef int tid
    cdef double *base
    if threads <= 1 or m < 256:
        base = &work[0, 0]
        with nogil:
            for row in range(m):
                _one(params, Q[row], n, base, base + 12, base + 24, base + 24 + 3 * n,
                     base + 24 + 6 * n, base + 24 + 12 * n, &out[row, 0])
    else:
        with nogil:
            for row in prange(m, num_threads=threads, schedule="static"):
                tid = cython.parallel.threadid()
                base = &work[tid, 0]
                _one(params, Q[row], n, base, base + 12, base + 24, base + 24 + 3 * n,
                     base + 24 + 6 * n, base + 24 + 12 * n, &out[row, 0])
    return out_arr
