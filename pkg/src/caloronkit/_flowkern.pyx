# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the fixed-step matrix-ODE flow."""

import numpy as np

cimport numpy as cnp


cdef void _rhs(double complex[:, :, :] T, double complex[:, :] T0,
               double complex[:, :, :] out, int d) noexcept:
    # out_i = [T_{i+1}, T_{i+2}] - [T0, T_i]
    cdef int i, a, b, r, c, m
    cdef double complex acc
    for i in range(3):
        a = (i + 1) % 3
        b = (i + 2) % 3
        for r in range(d):
            for c in range(d):
                acc = 0
                for m in range(d):
                    acc = acc + T[a, r, m] * T[b, m, c] - T[b, r, m] * T[a, m, c]
                    acc = acc - T0[r, m] * T[i, m, c] + T[i, r, m] * T0[m, c]
                out[i, r, c] = acc


def rk4_nahm(T0, T, double h, int steps):
    """Classical 4th-order flow of dT_i/dz = [T_{i+1}, T_{i+2}] - [T0, T_i].

    Mirrors the pure-numpy kernel: ``T0`` is a constant (d, d) matrix, ``T``
    the initial (3, d, d) stack; returns shape (steps + 1, 3, d, d).
    """
    T0 = np.ascontiguousarray(T0, dtype=complex)
    T = np.ascontiguousarray(T, dtype=complex)
    cdef int d = T.shape[2]
    out_arr = np.empty((steps + 1, 3, d, d), dtype=complex)
    cur_arr = T.copy()
    k1_arr = np.empty((3, d, d), dtype=complex)
    k2_arr = np.empty((3, d, d), dtype=complex)
    k3_arr = np.empty((3, d, d), dtype=complex)
    k4_arr = np.empty((3, d, d), dtype=complex)
    tmp_arr = np.empty((3, d, d), dtype=complex)

    cdef double complex[:, :, :, :] out = out_arr
    cdef double complex[:, :, :] cur = cur_arr
    cdef double complex[:, :] t0 = T0
    cdef double complex[:, :, :] k1 = k1_arr
    cdef double complex[:, :, :] k2 = k2_arr
    cdef double complex[:, :, :] k3 = k3_arr
    cdef double complex[:, :, :] k4 = k4_arr
    cdef double complex[:, :, :] tmp = tmp_arr
    cdef int n, i, r, c
    cdef double h6 = h / 6.0

    out[0] = cur
    for n in range(steps):
        _rhs(cur, t0, k1, d)
        for i in range(3):
            for r in range(d):
                for c in range(d):
                    tmp[i, r, c] = cur[i, r, c] + 0.5 * h * k1[i, r, c]
        _rhs(tmp, t0, k2, d)
        for i in range(3):
            for r in range(d):
                for c in range(d):
                    tmp[i, r, c] = cur[i, r, c] + 0.5 * h * k2[i, r, c]
        _rhs(tmp, t0, k3, d)
        for i in range(3):
            for r in range(d):
                for c in range(d):
                    tmp[i, r, c] = cur[i, r, c] + h * k3[i, r, c]
        _rhs(tmp, t0, k4, d)
        for i in range(3):
            for r in range(d):
                for c in range(d):
                    cur[i, r, c] = cur[i, r, c] + h6 * (
                        k1[i, r, c] + 2.0 * k2[i, r, c]
                        + 2.0 * k3[i, r, c] + k4[i, r, c])
        out[n + 1] = cur
    return out_arr
