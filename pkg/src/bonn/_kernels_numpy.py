"""Pure-numpy kernels.

Reference implementations of the hot numeric inner loops.  The numba
backend (`_kernels_numba`) carries jitted loop versions of the same
functions; this module is the fallback selected by ``BONN_NUMBA=0`` or
when numba is unavailable.  Backward kernels accumulate (+=) into the
adjoint buffers they are handed.
"""

import numpy as np


def affine_fwd(W, b, x):
    return W @ x + b


def affine_bwd(W, x, g, a_W, a_b, a_x):
    a_W += np.outer(g, x)
    a_b += g
    a_x += W.T @ g


def sigmoid_fwd(x):
    # piecewise form avoids exp overflow for large negative inputs
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_bwd(y, g, a_x):
    a_x += g * y * (1.0 - y)


def tanh_fwd(x):
    return np.tanh(x)


def tanh_bwd(y, g, a_x):
    a_x += g * (1.0 - y * y)


def relu_fwd(x):
    return np.maximum(x, 0.0)


def relu_bwd(x, g, a_x):
    # derivative at exactly 0 is 0
    a_x += g * (x > 0.0)


def softmax_fwd(x):
    e = np.exp(x - x.max())
    return e / e.sum()


def softmax_bwd(y, g, a_x):
    s = float(np.dot(g, y))
    a_x += y * (g - s)


def gru_fwd(Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh, x, h):
    z = sigmoid_fwd(Wz @ x + Uz @ h + bz)
    r = sigmoid_fwd(Wr @ x + Ur @ h + br)
    rh = r * h
    hbar = np.tanh(Wh @ x + Uh @ rh + bh)
    hn = (1.0 - z) * h + z * hbar
    return hn, z, r, hbar, rh


def gru_bwd(Wz, Wr, Wh, Uz, Ur, Uh, x, h, z, r, hbar, rh, g,
            a_Wz, a_Wr, a_Wh, a_Uz, a_Ur, a_Uh, a_bz, a_br, a_bh, a_x, a_h):
    d_z = g * (hbar - h)
    d_hbar = g * z
    a_h += g * (1.0 - z)

    d_ah = d_hbar * (1.0 - hbar * hbar)
    a_Wh += np.outer(d_ah, x)
    a_Uh += np.outer(d_ah, rh)
    a_bh += d_ah
    a_x += Wh.T @ d_ah
    g_rh = Uh.T @ d_ah
    d_r = g_rh * h
    a_h += g_rh * r

    d_ar = d_r * r * (1.0 - r)
    a_Wr += np.outer(d_ar, x)
    a_Ur += np.outer(d_ar, h)
    a_br += d_ar
    a_x += Wr.T @ d_ar
    a_h += Ur.T @ d_ar

    d_az = d_z * z * (1.0 - z)
    a_Wz += np.outer(d_az, x)
    a_Uz += np.outer(d_az, h)
    a_bz += d_az
    a_x += Wz.T @ d_az
    a_h += Uz.T @ d_az
