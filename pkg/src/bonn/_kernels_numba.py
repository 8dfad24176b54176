"""Numba-jitted kernels.

Loop versions of the functions in `_kernels_numpy`, compiled with
``@njit(cache=True)``.  Importing this module requires numba; the
backend module falls back to the numpy kernels when the import fails
or ``BONN_NUMBA=0`` is set.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def affine_fwd(W, b, x):
    m, n = W.shape
    out = np.empty(m)
    for i in range(m):
        s = b[i]
        for j in range(n):
            s += W[i, j] * x[j]
        out[i] = s
    return out


@njit(cache=True)
def affine_bwd(W, x, g, a_W, a_b, a_x):
    m, n = W.shape
    for i in range(m):
        gi = g[i]
        a_b[i] += gi
        for j in range(n):
            a_W[i, j] += gi * x[j]
            a_x[j] += W[i, j] * gi


@njit(cache=True)
def _sigmoid(v):
    # piecewise form avoids exp overflow for large negative inputs
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


@njit(cache=True)
def sigmoid_fwd(x):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = _sigmoid(x[i])
    return out


@njit(cache=True)
def sigmoid_bwd(y, g, a_x):
    for i in range(y.shape[0]):
        a_x[i] += g[i] * y[i] * (1.0 - y[i])


@njit(cache=True)
def tanh_fwd(x):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = math.tanh(x[i])
    return out


@njit(cache=True)
def tanh_bwd(y, g, a_x):
    for i in range(y.shape[0]):
        a_x[i] += g[i] * (1.0 - y[i] * y[i])


@njit(cache=True)
def relu_fwd(x):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = x[i] if x[i] > 0.0 else 0.0
    return out


@njit(cache=True)
def relu_bwd(x, g, a_x):
    # derivative at exactly 0 is 0
    for i in range(x.shape[0]):
        if x[i] > 0.0:
            a_x[i] += g[i]


@njit(cache=True)
def softmax_fwd(x):
    n = x.shape[0]
    m = x[0]
    for i in range(1, n):
        if x[i] > m:
            m = x[i]
    out = np.empty_like(x)
    s = 0.0
    for i in range(n):
        e = math.exp(x[i] - m)
        out[i] = e
        s += e
    for i in range(n):
        out[i] /= s
    return out


@njit(cache=True)
def softmax_bwd(y, g, a_x):
    s = 0.0
    for i in range(y.shape[0]):
        s += g[i] * y[i]
    for i in range(y.shape[0]):
        a_x[i] += y[i] * (g[i] - s)


@njit(cache=True)
def gru_fwd(Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh, x, h):
    nh = h.shape[0]
    nx = x.shape[0]
    z = np.empty(nh)
    r = np.empty(nh)
    rh = np.empty(nh)
    hbar = np.empty(nh)
    hn = np.empty(nh)
    for i in range(nh):
        az = bz[i]
        ar = br[i]
        for j in range(nx):
            az += Wz[i, j] * x[j]
            ar += Wr[i, j] * x[j]
        for j in range(nh):
            az += Uz[i, j] * h[j]
            ar += Ur[i, j] * h[j]
        z[i] = _sigmoid(az)
        r[i] = _sigmoid(ar)
    for i in range(nh):
        rh[i] = r[i] * h[i]
    for i in range(nh):
        ah = bh[i]
        for j in range(nx):
            ah += Wh[i, j] * x[j]
        for j in range(nh):
            ah += Uh[i, j] * rh[j]
        hbar[i] = math.tanh(ah)
        hn[i] = (1.0 - z[i]) * h[i] + z[i] * hbar[i]
    return hn, z, r, hbar, rh


@njit(cache=True)
def gru_bwd(Wz, Wr, Wh, Uz, Ur, Uh, x, h, z, r, hbar, rh, g,
            a_Wz, a_Wr, a_Wh, a_Uz, a_Ur, a_Uh, a_bz, a_br, a_bh, a_x, a_h):
    nh = h.shape[0]
    nx = x.shape[0]

    d_ah = np.empty(nh)
    for i in range(nh):
        d_hbar = g[i] * z[i]
        d_ah[i] = d_hbar * (1.0 - hbar[i] * hbar[i])
        a_h[i] += g[i] * (1.0 - z[i])

    g_rh = np.zeros(nh)
    for i in range(nh):
        di = d_ah[i]
        a_bh[i] += di
        for j in range(nx):
            a_Wh[i, j] += di * x[j]
            a_x[j] += Wh[i, j] * di
        for j in range(nh):
            a_Uh[i, j] += di * rh[j]
            g_rh[j] += Uh[i, j] * di

    for i in range(nh):
        a_h[i] += g_rh[i] * r[i]
        d_r = g_rh[i] * h[i]
        d_ar = d_r * r[i] * (1.0 - r[i])
        a_br[i] += d_ar
        for j in range(nx):
            a_Wr[i, j] += d_ar * x[j]
            a_x[j] += Wr[i, j] * d_ar
        for j in range(nh):
            a_Ur[i, j] += d_ar * h[j]
            a_h[j] += Ur[i, j] * d_ar

    for i in range(nh):
        d_z = g[i] * (hbar[i] - h[i])
        d_az = d_z * z[i] * (1.0 - z[i])
        a_bz[i] += d_az
        for j in range(nx):
            a_Wz[i, j] += d_az * x[j]
            a_x[j] += Wz[i, j] * d_az
        for j in range(nh):
            a_Uz[i, j] += d_az * h[j]
            a_h[j] += Uz[i, j] * d_az
