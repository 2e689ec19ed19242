# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled element kernels for batches of tetrahedra.

Computes local curl-curl matrices of the vector Lagrange space in the
interleaved (3*node + component) local ordering. Mirrors the numpy backend
in ``numpy_backend.py``; results agree to rounding.
"""

import numpy as np


def curl_curl_local(const double[:, :, ::1] gref, const double[::1] wq,
                    const double[:, :, ::1] jinv, const double[::1] detj):
    """Local curl-curl matrices, shape (nt, 3*nl, 3*nl).

    gref: reference basis gradients at quadrature points, (nq, nl, 3).
    wq: quadrature weights on the reference tet, (nq,).
    jinv: inverse Jacobians, (nt, 3, 3).
    detj: Jacobian determinants, (nt,).
    """
    cdef Py_ssize_t nq = gref.shape[0]
    cdef Py_ssize_t nl = gref.shape[1]
    cdef Py_ssize_t nt = jinv.shape[0]
    cdef Py_ssize_t t, q, n, m, c, d, e

    out_arr = np.empty((nt, 3 * nl, 3 * nl), dtype=np.float64)
    gphys_arr = np.empty((nq, nl, 3), dtype=np.float64)
    tmat_arr = np.empty((3, 3, nl, nl), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, :, ::1] g = gphys_arr
    cdef double[:, :, :, ::1] T = tmat_arr
    cdef double acc, w, tr, val

    for t in range(nt):
        for q in range(nq):
            for n in range(nl):
                for d in range(3):
                    acc = 0.0
                    for e in range(3):
                        acc += gref[q, n, e] * jinv[t, e, d]
                    g[q, n, d] = acc

        T[:, :, :, :] = 0.0
        for q in range(nq):
            w = wq[q] * detj[t]
            for n in range(nl):
                for m in range(nl):
                    for d in range(3):
                        for c in range(3):
                            T[d, c, n, m] += w * (g[q, n, d] * g[q, m, c])

        # K[(n,c),(m,d)] = delta_cd * grad(phi_n).grad(phi_m) - d_d(phi_n) d_c(phi_m)
        for n in range(nl):
            for m in range(nl):
                tr = T[0, 0, n, m] + T[1, 1, n, m] + T[2, 2, n, m]
                for c in range(3):
                    for d in range(3):
                        val = -T[d, c, n, m]
                        if c == d:
                            val += tr
                        out[t, 3 * n + c, 3 * m + d] = val
    return out_arr
