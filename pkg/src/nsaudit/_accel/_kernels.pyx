# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: pairwise Helmholtz Green's matrix and inverse-square sums.

Mirrors the numpy fallback in _kernels_py; reductions run row-major so the
two backends agree to floating-point roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

BACKEND = "cython"

CHUNK = 512

M_1_4PI = 0.07957747154594767


def helmholtz_rows(cnp.ndarray[double, ndim=2] out_pts,
                   cnp.ndarray[double, ndim=2] src_pts,
                   double k, double sign, double complex self_value):
    cdef Py_ssize_t nr = out_pts.shape[0]
    cdef Py_ssize_t ns = src_pts.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((nr, ns), dtype=np.complex128)
    cdef double[:, ::1] op = np.ascontiguousarray(out_pts)
    cdef double[:, ::1] sp = np.ascontiguousarray(src_pts)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t r, s
    cdef double dx, dy, dz, d, ph, amp, sk
    sk = sign * k
    for r in range(nr):
        for s in range(ns):
            dx = op[r, 0] - sp[s, 0]
            dy = op[r, 1] - sp[s, 1]
            dz = op[r, 2] - sp[s, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d < 1e-12:
                ov[r, s] = self_value
            else:
                ph = sk * d
                amp = M_1_4PI / d
                ov[r, s] = amp * cos(ph) + 1j * (amp * sin(ph))
    return out


def helmholtz_apply(src_pts, values, double k, double sign,
                    double complex self_value, out_pts=None):
    if out_pts is None:
        out_pts = src_pts
    v = np.asarray(values)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    out = np.empty((len(out_pts), v.shape[1]), dtype=complex)
    cdef Py_ssize_t i0
    for i0 in range(0, len(out_pts), CHUNK):
        g = helmholtz_rows(np.ascontiguousarray(out_pts[i0:i0 + CHUNK]),
                           np.ascontiguousarray(src_pts), k, sign, self_value)
        out[i0:i0 + CHUNK] = g @ v
    return out[:, 0] if squeeze else out


def inv_square_pair_sum(cnp.ndarray[double, ndim=1] weights,
                        cnp.ndarray[double, ndim=2] pts):
    cdef double[::1] w = np.ascontiguousarray(weights)
    cdef double[:, ::1] p = np.ascontiguousarray(pts)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t a, b
    cdef double dx, dy, dz, d2, row, total
    total = 0.0
    for a in range(n):
        row = 0.0
        for b in range(n):
            if a == b:
                continue
            dx = p[a, 0] - p[b, 0]
            dy = p[a, 1] - p[b, 1]
            dz = p[a, 2] - p[b, 2]
            d2 = dx * dx + dy * dy + dz * dz
            row += w[b] / d2
        total += w[a] * row
    return total
