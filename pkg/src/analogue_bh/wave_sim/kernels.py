"""Compiled stencil kernels for the second-order wave solver.

Fields live on an (n1, n2) cell-centred array.  Every stencil reads from a
padded copy with two ghost layers per side.  There is one padded copy per
direction because an excised ghost cell can need a different extrapolation in
each direction.

Boundary codes per side (x1min, x1max, x2min, x2max): 0 even mirror, 1 Dirichlet.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MIRROR, DIRICHLET = 0, 1


@njit(cache=True)
def _dghost(f, u0, u1, layer):
    """Dirichlet ghost: quadratic through the face value and two cells (first layer)."""
    if layer == 0:
        return (8.0 * f - 6.0 * u0 + u1) / 3.0
    return 2.0 * f - u1


@njit(cache=True)
def fill(src, P, direction, bc, bv, ext, odd_dirichlet):
    """Copy ``src`` into ``P`` and fill the ghosts needed by ``direction`` stencils.

    With ``odd_dirichlet`` the Dirichlet ghosts extrapolate through the face
    value (the field itself); otherwise they copy the boundary cell (used for
    derived quantities).
    """
    n1, n2 = src.shape
    for i in range(n1):
        for j in range(n2):
            P[i + 2, j + 2] = src[i, j]
    if direction == 1:
        for j in range(n2):
            for g in range(2):
                lo_in = P[2 + g, j + 2]
                hi_in = P[n1 + 1 - g, j + 2]
                if bc[0] == DIRICHLET and odd_dirichlet:
                    P[1 - g, j + 2] = _dghost(bv[0, j], P[2, j + 2], P[3, j + 2], g)
                else:
                    P[1 - g, j + 2] = lo_in
                if bc[1] == DIRICHLET and odd_dirichlet:
                    P[n1 + 2 + g, j + 2] = _dghost(bv[1, j], P[n1 + 1, j + 2], P[n1, j + 2], g)
                else:
                    P[n1 + 2 + g, j + 2] = hi_in
        for k in range(ext.shape[0]):
            i, j, s = ext[k, 0], ext[k, 1], ext[k, 2]
            P[i + 2, j + 2] = (3.0 * P[i + s + 2, j + 2] - 3.0 * P[i + 2 * s + 2, j + 2]
                               + P[i + 3 * s + 2, j + 2])
    else:
        for i in range(n1):
            for g in range(2):
                lo_in = P[i + 2, 2 + g]
                hi_in = P[i + 2, n2 + 1 - g]
                if bc[2] == DIRICHLET and odd_dirichlet:
                    P[i + 2, 1 - g] = _dghost(bv[2, i], P[i + 2, 2], P[i + 2, 3], g)
                else:
                    P[i + 2, 1 - g] = lo_in
                if bc[3] == DIRICHLET and odd_dirichlet:
                    P[i + 2, n2 + 2 + g] = _dghost(bv[3, i], P[i + 2, n2 + 1], P[i + 2, n2], g)
                else:
                    P[i + 2, n2 + 2 + g] = hi_in
        for k in range(ext.shape[0]):
            i, j, s = ext[k, 0], ext[k, 1], ext[k, 2]
            P[i + 2, j + 2] = (3.0 * P[i + 2, j + s + 2] - 3.0 * P[i + 2, j + 2 * s + 2]
                               + P[i + 2, j + 3 * s + 2])


@njit(cache=True)
def centered(P1, P2, act, h1, h2, D1, D2):
    n1, n2 = act.shape
    for i in range(n1):
        for j in range(n2):
            if act[i, j]:
                D1[i, j] = (P1[i + 3, j + 2] - P1[i + 1, j + 2]) / (2.0 * h1)
                D2[i, j] = (P2[i + 2, j + 3] - P2[i + 2, j + 1]) / (2.0 * h2)
            else:
                D1[i, j] = 0.0
                D2[i, j] = 0.0


@njit(cache=True)
def rhs(u, ut, act, bc, bv, bvt, ext1, ext2,
        m00, A11, A12, B1, A22, A21, B2, sig, h1, h2, ko,
        P1, P2, Q1, Q2, D1, D2, E1, E2, F1, F2, du, dut):
    """Time derivative of (u, ut); ``du``/``dut`` are overwritten."""
    n1, n2 = u.shape
    fill(u, P1, 1, bc, bv, ext1, True)
    fill(u, P2, 2, bc, bv, ext2, True)
    fill(ut, Q1, 1, bc, bvt, ext1, True)
    fill(ut, Q2, 2, bc, bvt, ext2, True)
    centered(P1, P2, act, h1, h2, D1, D2)
    # transverse gradients carried across faces
    fill(D2, E2, 1, bc, bv, ext1, False)
    fill(D1, E1, 2, bc, bv, ext2, False)
    for f in range(n1 + 1):
        for j in range(n2):
            left = f > 0 and act[f - 1, j]
            right = f < n1 and act[f, j]
            if not (left or right):
                F1[f, j] = 0.0
            elif (f == 0 and bc[0] == MIRROR) or (f == n1 and bc[1] == MIRROR):
                F1[f, j] = 0.0
            else:
                F1[f, j] = (A11[f, j] * (P1[f + 2, j + 2] - P1[f + 1, j + 2]) / h1
                            + A12[f, j] * 0.5 * (E2[f + 1, j + 2] + E2[f + 2, j + 2]))
    for i in range(n1):
        for f in range(n2 + 1):
            low = f > 0 and act[i, f - 1]
            high = f < n2 and act[i, f]
            if not (low or high):
                F2[i, f] = 0.0
            elif (f == 0 and bc[2] == MIRROR) or (f == n2 and bc[3] == MIRROR):
                F2[i, f] = 0.0
            else:
                F2[i, f] = (A22[i, f] * (P2[i + 2, f + 2] - P2[i + 2, f + 1]) / h2
                            + A21[i, f] * 0.5 * (E1[i + 2, f + 1] + E1[i + 2, f + 2]))
    for i in range(n1):
        for j in range(n2):
            if not act[i, j]:
                du[i, j] = 0.0
                dut[i, j] = 0.0
                continue
            adv = ((B1[i + 1, j] * Q1[i + 3, j + 2] - B1[i, j] * Q1[i + 1, j + 2]) / h1
                   + (B2[i, j + 1] * Q2[i + 2, j + 3] - B2[i, j] * Q2[i + 2, j + 1]) / h2)
            dif = (F1[i + 1, j] - F1[i, j]) / h1 + (F2[i, j + 1] - F2[i, j]) / h2
            du[i, j] = ut[i, j]
            dut[i, j] = -(adv + dif) / m00[i, j] - sig[i, j] * ut[i, j]
    if ko > 0.0:
        _dissipate(u, ut, act, ko, h1, h2, du, dut)


@njit(cache=True)
def _dissipate(u, ut, act, ko, h1, h2, du, dut):
    """Fourth-difference damping where the full five-point stencil is active."""
    n1, n2 = u.shape
    for i in range(2, n1 - 2):
        for j in range(n2):
            if act[i - 2, j] and act[i - 1, j] and act[i, j] and act[i + 1, j] and act[i + 2, j]:
                c = ko / (16.0 * h1)
                du[i, j] -= c * (u[i - 2, j] - 4 * u[i - 1, j] + 6 * u[i, j]
                                 - 4 * u[i + 1, j] + u[i + 2, j])
                dut[i, j] -= c * (ut[i - 2, j] - 4 * ut[i - 1, j] + 6 * ut[i, j]
                                  - 4 * ut[i + 1, j] + ut[i + 2, j])
    for i in range(n1):
        for j in range(2, n2 - 2):
            if act[i, j - 2] and act[i, j - 1] and act[i, j] and act[i, j + 1] and act[i, j + 2]:
                c = ko / (16.0 * h2)
                du[i, j] -= c * (u[i, j - 2] - 4 * u[i, j - 1] + 6 * u[i, j]
                                 - 4 * u[i, j + 1] + u[i, j + 2])
                dut[i, j] -= c * (ut[i, j - 2] - 4 * ut[i, j - 1] + 6 * ut[i, j]
                                  - 4 * ut[i, j + 1] + ut[i, j + 2])


def workspace(n1: int, n2: int) -> dict:
    pad = (n1 + 4, n2 + 4)
    return {
        "P1": np.zeros(pad), "P2": np.zeros(pad), "Q1": np.zeros(pad), "Q2": np.zeros(pad),
        "D1": np.zeros((n1, n2)), "D2": np.zeros((n1, n2)),
        "E1": np.zeros(pad), "E2": np.zeros(pad),
        "F1": np.zeros((n1 + 1, n2)), "F2": np.zeros((n1, n2 + 1)),
    }
