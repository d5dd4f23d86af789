"""Pure-numpy fallback kernel for the fixed-step matrix-ODE flow."""

import numpy as np


def _rhs(T0, T, out):
    for i in range(3):
        a = T[(i + 1) % 3]
        b = T[(i + 2) % 3]
        out[i] = a @ b - b @ a - (T0 @ T[i] - T[i] @ T0)
    return out


def rk4_nahm(T0, T, h, steps):
    """Classical 4th-order flow of dT_i/dz = [T_{i+1}, T_{i+2}] - [T0, T_i].

    ``T0`` is a constant (d, d) matrix, ``T`` the initial (3, d, d) stack.
    Returns an array of shape (steps + 1, 3, d, d) with every step recorded.
    ``h`` may be negative to integrate towards smaller z.
    """
    T0 = np.asarray(T0, dtype=complex)
    T = np.asarray(T, dtype=complex)
    d = T.shape[-1]
    out = np.empty((steps + 1, 3, d, d), dtype=complex)
    out[0] = T
    cur = T.copy()
    k1 = np.empty_like(T)
    k2 = np.empty_like(T)
    k3 = np.empty_like(T)
    k4 = np.empty_like(T)
    for n in range(steps):
        _rhs(T0, cur, k1)
        _rhs(T0, cur + (0.5 * h) * k1, k2)
        _rhs(T0, cur + (0.5 * h) * k2, k3)
        _rhs(T0, cur + h * k3, k4)
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[n + 1] = cur
        if not np.isfinite(cur.real.ravel()[0]):
            out[n + 1:] = cur
            break
    return out
