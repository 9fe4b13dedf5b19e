"""Compiled point kernels for metrics whose meridional velocity is known in closed form.

A kernel returns the meridional flow components (w_rho, w_z) at one point;
the (rho, z) block of the inverse metric is then -I + w w^T.  Kernels are
selected by an integer ``kind`` with a float parameter vector:

* ``KERR``       params (m, a)
* ``KERR_BUMP``  params (m, a, eps, c_rho, c_z, radius): Kerr velocity rotated
  by eps * bump(|x - c| / radius)
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

KERR = 0
KERR_BUMP = 1


@njit(cache=True)
def bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere (peak value 1)."""
    if s >= 1.0 or s <= -1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - s * s))


@njit(cache=True)
def _kerr_w(rho, z, m, a):
    R2 = rho * rho + z * z
    q = R2 - a * a
    disc = math.sqrt(q * q + 4.0 * a * a * z * z)
    if q >= 0.0:
        r2 = 0.5 * (q + disc)
    elif disc - q > 0.0:
        r2 = 2.0 * a * a * z * z / (disc - q)
    else:
        r2 = 0.0
    r = math.sqrt(max(r2, 0.0))
    if r <= 0.0:
        if a == 0.0 or rho >= a * (1.0 - 1e-12):
            return math.nan, math.nan
        return 0.0, 0.0
    f = 2.0 * m * r ** 3 / (r ** 4 + a * a * z * z)
    s = r2 + a * a
    sf = math.sqrt(f)
    return sf * r * rho / s, sf * z / r


@njit(cache=True)
def flow_w(kind, prm, rho, z):
    sgn = 1.0
    if rho < 0.0:
        rho = -rho
        sgn = -1.0
    if kind == KERR:
        w1, w2 = _kerr_w(rho, z, prm[0], prm[1])
    else:
        w1, w2 = _kerr_w(rho, z, prm[0], prm[1])
        s = math.hypot(rho - prm[3], z - prm[4]) / prm[5]
        ang = prm[2] * bump(s)
        if ang != 0.0:
            c, sn = math.cos(ang), math.sin(ang)
            w1, w2 = c * w1 - sn * w2, sn * w1 + c * w2
    return sgn * w1, w2


@njit(cache=True)
def block(kind, prm, rho, z):
    w1, w2 = flow_w(kind, prm, rho, z)
    return -1.0 + w1 * w1, w1 * w2, -1.0 + w2 * w2


def block_array(kind, prm, P):
    """Vectorized (A, B, C) for testing kernels against the numpy metric."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    out = np.empty((len(P), 3))
    for i in range(len(P)):
        out[i] = block(kind, np.asarray(prm, dtype=float), P[i, 0], P[i, 1])
    return out
