"""Characteristic curves of stationary metrics in the meridional plane.

A curve with unit normal n is characteristic when the spatial quadratic form
sum g^{jk} n_j n_k vanishes on it.  Characteristic curves are the integral
curves of the null tangents of the (x1, x2) block B of g^{jk}:

* where det B < 0 there are two null directions ("+" and "-" families),
* where det B = 0 they merge into one; the merged direction is the tangent
  perpendicular to the top eigenvector of B, which is a smooth field, so
  curves lying in det B = 0 are integrated along it,
* where det B > 0 there are none.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numba import njit

from . import jit_kernels as jk
from .curves import GeometryError, PlaneCurve
from .ergosphere import TopologyError, trace_level_set
from .metric_core import MetricDomainError, StationaryMetric


@dataclass
class CharReport:
    residual: float
    residuals: np.ndarray
    flux: np.ndarray
    flux_sign: np.ndarray
    classification: str
    tol: float

    def to_dict(self) -> dict:
        return {
            "residual": float(self.residual),
            "flux_min": float(np.min(self.flux)),
            "flux_max": float(np.max(self.flux)),
            "n_samples": int(len(self.flux)),
            "classification": self.classification,
            "tol": self.tol,
        }


def _classify(res: np.ndarray, flux: np.ndarray, tol: float) -> CharReport:
    r = float(np.max(res))
    sign = np.sign(flux)
    if r >= tol:
        cls = "not_characteristic"
    elif np.all(flux < 0):
        cls = "black_hole"
    elif np.all(flux > 0):
        cls = "white_hole"
    else:
        cls = "mixed"
    return CharReport(r, res, flux, sign, cls, tol)


def _quadratic(B, n):
    return np.einsum("...j,...jk,...k->...", n, B, n)


def characteristic_residual(g: StationaryMetric, curve: PlaneCurve, tol: float = 1e-6
                            ) -> CharReport:
    """Normalized |sum g^{jk} n_j n_k| and the flux sum g^{0j} n_j over the curve samples.

    ``n`` is the outward unit normal; the normalization is the spectral norm of
    the spatial block, so flat space gives residual 1.
    """
    pts = curve.loop
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    if np.any(seg == 0):
        raise GeometryError("duplicate points on the curve: normal is undefined")
    n = curve.outward_normals()
    M = g.frame(pts)
    B = M[..., 1:3, 1:3]
    if g.coords == "cartesian" and g.dim == 3:
        raise GeometryError("use surface_residual for Cartesian three-dimensional surfaces")
    norm = np.max(np.abs(np.linalg.eigvalsh(B)), axis=-1)
    res = np.abs(_quadratic(B, n)) / norm
    flux = np.einsum("...j,...j->...", M[..., 0, 1:3], n)
    return _classify(res, flux, tol)


def surface_residual(g: StationaryMetric, points, normals, tol: float = 1e-6) -> CharReport:
    """Same test for sampled surfaces given points and outward unit normals (all spatial axes)."""
    M = g.frame(np.asarray(points, dtype=float))
    n = np.asarray(normals, dtype=float)
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    k = n.shape[-1]
    B = M[..., 1:k + 1, 1:k + 1]
    norm = np.max(np.abs(np.linalg.eigvalsh(B)), axis=-1)
    res = np.abs(_quadratic(B, n)) / norm
    flux = np.einsum("...j,...j->...", M[..., 0, 1:k + 1], n)
    return _classify(res, flux, tol)


def conormal_defect(g: StationaryMetric, curve: PlaneCurve) -> float:
    """max |sum_k g^{jk} n_k| / ||B||; vanishes on curves that are both Delta_1 = 0 and characteristic."""
    n = curve.outward_normals()
    B = g.frame(curve.loop)[..., 1:3, 1:3]
    norm = np.max(np.abs(np.linalg.eigvalsh(B)), axis=-1)
    return float(np.max(np.linalg.norm(np.einsum("...jk,...k->...j", B, n), axis=-1) / norm))


# ---------------------------------------------------------------------------
# null directions


@dataclass
class NullDirections:
    count: int
    tangents: np.ndarray
    normals: np.ndarray


def _top_eigvec(A, Bc, C):
    """Unit eigenvector of the larger eigenvalue of [[A, Bc], [Bc, C]] (vectorized)."""
    lam = 0.5 * (A + C) + np.sqrt(0.25 * (A - C) ** 2 + Bc * Bc)
    v1 = np.stack([Bc, lam - A], -1)
    v2 = np.stack([lam - C, Bc], -1)
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    v = np.where((n1 >= n2)[..., None], v1, v2)
    nv = np.maximum(n1, n2)
    # isotropic block: any direction; fall back to e_rho
    iso = nv < 1e-300
    v = np.where(iso[..., None], np.array([1.0, 0.0]), v / np.where(iso, 1.0, nv)[..., None])
    return v


def _null_normals(A, Bc, C, D):
    """The two null normals of the block for D = -det >= 0 (vectorized)."""
    sq = np.sqrt(np.maximum(D, 0.0))
    useA = np.abs(A) >= np.abs(C)
    with np.errstate(divide="ignore", invalid="ignore"):
        # A x^2 + 2 Bc x + C = 0 with n = (x, 1), or C y^2 + 2 Bc y + A = 0 with n = (1, y)
        xp = (-Bc + sq) / A
        xm = (-Bc - sq) / A
        yp = (-Bc + sq) / C
        ym = (-Bc - sq) / C
    np_ = np.where(useA[..., None], np.stack([xp, np.ones_like(xp)], -1),
                   np.stack([np.ones_like(yp), yp], -1))
    nm_ = np.where(useA[..., None], np.stack([xm, np.ones_like(xm)], -1),
                   np.stack([np.ones_like(ym), ym], -1))
    degenerate = (A == 0) & (C == 0)
    if np.any(degenerate):
        np_ = np.where(degenerate[..., None], np.array([1.0, 0.0]), np_)
        nm_ = np.where(degenerate[..., None], np.array([0.0, 1.0]), nm_)
    np_ = np_ / np.linalg.norm(np_, axis=-1, keepdims=True)
    nm_ = nm_ / np.linalg.norm(nm_, axis=-1, keepdims=True)
    return np_, nm_


def _perp(n):
    return np.stack([-n[..., 1], n[..., 0]], -1)


def null_directions(g: StationaryMetric, p, tol: float = 1e-10) -> NullDirections:
    """Null normals/tangents of the (x1, x2) quadratic form at a single point."""
    M = g.frame(np.asarray(p, dtype=float))
    A, Bc, C = M[1, 1], M[1, 2], M[2, 2]
    d1 = A * C - Bc * Bc
    scale = max(abs(A), abs(C), abs(Bc), 1e-300) ** 2
    if d1 > tol * scale:
        return NullDirections(0, np.zeros((0, 2)), np.zeros((0, 2)))
    if abs(d1) <= tol * scale:
        n = _top_eigvec(np.array(A), np.array(Bc), np.array(C))
        return NullDirections(1, _perp(n)[None], n[None])
    n1, n2 = _null_normals(np.array(A), np.array(Bc), np.array(C), np.array(-d1))
    ns = np.stack([n1, n2])
    return NullDirections(2, _perp(ns), ns)


# ---------------------------------------------------------------------------
# integration


@dataclass
class CharacteristicTrajectory:
    curve: PlaneCurve
    event: str
    length: float
    closure_distance: float = np.inf
    start: np.ndarray = field(default_factory=lambda: np.zeros(2))
    family: str = "+"

    @property
    def closed(self) -> bool:
        return self.event == "closed"


class _Field:
    """Unit null tangents for a batch of trajectories."""

    def __init__(self, g: StationaryMetric):
        self.g = g

    def block(self, Y):
        M = self.g.frame(Y)
        return M[..., 1, 1], M[..., 1, 2], M[..., 2, 2]

    def __call__(self, Y, Tref, mode):
        A, Bc, C = self.block(Y)
        d1 = A * C - Bc * Bc
        t_deg = _perp(_top_eigvec(A, Bc, C))
        n_p, n_m = _null_normals(A, Bc, C, -d1)
        tp, tm = _perp(n_p), _perp(n_m)
        dp = np.einsum("ij,ij->i", tp, Tref)
        dm = np.einsum("ij,ij->i", tm, Tref)
        pick_p = np.abs(dp) >= np.abs(dm)
        t_fam = np.where(pick_p[:, None], tp * np.sign(dp + (dp == 0))[:, None],
                         tm * np.sign(dm + (dm == 0))[:, None])
        dd = np.einsum("ij,ij->i", t_deg, Tref)
        t_deg = t_deg * np.sign(dd + (dd == 0))[:, None]
        T = np.where((mode == 0)[:, None], t_deg, t_fam)
        return T, d1


def _initial_tangents(g, X0, family, reverse):
    """Mode (0 for seeds on det B = 0) and oriented initial tangent for each seed."""
    M = g.frame(X0)
    A, Bc, C = M[..., 1, 1], M[..., 1, 2], M[..., 2, 2]
    d1 = A * C - Bc * Bc
    scale = np.maximum.reduce([np.abs(A), np.abs(C), np.abs(Bc)]) ** 2
    on = np.abs(d1) <= 1e-9 * scale
    if np.any((d1 > 1e-9 * scale)):
        bad = np.nonzero(d1 > 1e-9 * scale)[0]
        raise ValueError(f"seeds {bad.tolist()} start where no characteristic direction exists")
    t_deg = _perp(_top_eigvec(A, Bc, C))
    n_p, n_m = _null_normals(A, Bc, C, -d1)
    fam = np.asarray(family)
    t_fam = np.where((fam == "+")[..., None], _perp(n_p), _perp(n_m))
    T = np.where(on[:, None], t_deg, t_fam)
    # orientation: counterclockwise about the origin unless reversed
    cross = X0[:, 0] * T[:, 1] - X0[:, 1] * T[:, 0]
    s = np.where(cross >= 0, 1.0, -1.0) * np.where(np.asarray(reverse), -1.0, 1.0)
    return np.where(on, 0, 1), T * s[:, None], d1, scale


_EVENTS = ("max_len", "closed", "left_restricted_ergosphere_outward",
           "left_restricted_ergosphere_inward", "reached_restricted_ergosphere", "singular")


@njit(cache=True)
def _jit_tangent(kind, prm, y0, y1, r0, r1, mode):
    A, Bc, C = jk.block(kind, prm, y0, y1)
    d1 = A * C - Bc * Bc
    sc = max(abs(A), abs(C), abs(Bc)) ** 2
    if mode == 0:
        lam = 0.5 * (A + C) + math.sqrt(0.25 * (A - C) ** 2 + Bc * Bc)
        a0, a1 = Bc, lam - A
        b0, b1 = lam - C, Bc
        na, nb = math.hypot(a0, a1), math.hypot(b0, b1)
        if na >= nb:
            n0, n1 = a0 / na, a1 / na
        else:
            n0, n1 = b0 / nb, b1 / nb
        t0, t1 = -n1, n0
    else:
        sq = math.sqrt(max(-d1, 0.0))
        if abs(A) >= abs(C):
            p0, p1 = (-Bc + sq) / A, 1.0
            m0, m1 = (-Bc - sq) / A, 1.0
        else:
            p0, p1 = 1.0, (-Bc + sq) / C
            m0, m1 = 1.0, (-Bc - sq) / C
        npn, nmn = math.hypot(p0, p1), math.hypot(m0, m1)
        tp0, tp1 = -p1 / npn, p0 / npn
        tm0, tm1 = -m1 / nmn, m0 / nmn
        dp = tp0 * r0 + tp1 * r1
        dm = tm0 * r0 + tm1 * r1
        if abs(dp) >= abs(dm):
            t0, t1 = tp0, tp1
        else:
            t0, t1 = tm0, tm1
    if t0 * r0 + t1 * r1 < 0:
        t0, t1 = -t0, -t1
    return t0, t1, d1, sc


@njit(cache=True)
def _jit_integrate(kind, prm, x0, tan0, mode, h, nsteps, scale, close_tol, leave_tol, r_c, out):
    X0, X1 = x0[0], x0[1]
    T0, T1 = tan0[0], tan0[1]
    x, y = X0, X1
    tx, ty = T0, T1
    out[0, 0], out[0, 1] = x, y
    length = 0.0
    closure = math.inf
    s_prev = 0.0
    event = 0
    n = 0
    for step in range(1, nsteps + 1):
        k1x, k1y, _, _ = _jit_tangent(kind, prm, x, y, tx, ty, mode)
        k2x, k2y, _, _ = _jit_tangent(kind, prm, x + 0.5 * h * k1x, y + 0.5 * h * k1y,
                                      k1x, k1y, mode)
        k3x, k3y, _, _ = _jit_tangent(kind, prm, x + 0.5 * h * k2x, y + 0.5 * h * k2y,
                                      k2x, k2y, mode)
        k4x, k4y, _, _ = _jit_tangent(kind, prm, x + h * k3x, y + h * k3y, k3x, k3y, mode)
        dx = (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        dy = (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
        xn, yn = x + dx, y + dy
        tnx, tny, d1n, sc = _jit_tangent(kind, prm, xn, yn, k4x, k4y, mode)
        if not (math.isfinite(xn) and math.isfinite(yn) and math.isfinite(d1n)):
            event = 5
            break
        length += h
        n = step
        out[step, 0], out[step, 1] = xn, yn
        if mode == 0 and abs(d1n) > leave_tol * sc:
            event = 2 if d1n > 0 else 3
            break
        if mode != 0 and d1n >= -1e-12 * sc:
            event = 4
            break
        s_new = (xn - X0) * T0 + (yn - X1) * T1
        if s_prev < 0 and s_new >= 0 and length > 2 * r_c:
            w = s_prev / (s_prev - s_new)
            cx, cy = x + w * dx, y + w * dy
            dist = math.hypot(cx - X0, cy - X1)
            if dist < r_c and tnx * T0 + tny * T1 > 0:
                closure = min(closure, dist)
                if dist <= close_tol * scale:
                    event = 1
                    break
        s_prev = s_new
        x, y, tx, ty = xn, yn, tnx, tny
    return n, event, length, closure


def integrate_batch(g: StationaryMetric, starts, family="+", reverse=False, h: float = 1e-3,
                    max_len: float = 50.0, scale: Optional[float] = None,
                    close_tol: float = 1e-6, leave_tol: float = 1e-6,
                    stop_on_first_closure: bool = False, keep_paths: bool = True):
    """RK4 integration of many characteristic curves at once.

    Seeds with det B = 0 follow the merged direction and stop once they leave
    that set (|det B| > leave_tol * ||B||^2).  Interior seeds follow their
    family (continued by maximal alignment) and stop on reaching det B = 0.
    Closure is a return test against the line through the start point normal
    to the initial tangent, with tolerance ``close_tol * scale``.
    """
    X0 = np.atleast_2d(np.asarray(starts, dtype=float)).copy()
    K = len(X0)
    family = np.broadcast_to(np.asarray(family), (K,))
    reverse = np.broadcast_to(np.asarray(reverse), (K,))
    mode, T0, _, _ = _initial_tangents(g, X0, family, reverse)
    if scale is None:
        scale = float(max(np.max(np.abs(X0)), 1.0))
    if g.kernel is not None:
        return _integrate_compiled(g, X0, T0, mode, family, h, max_len, scale, close_tol,
                                   leave_tol, stop_on_first_closure, keep_paths)
    field_ = _Field(g)
    X = X0.copy()
    T = T0.copy()
    active = np.ones(K, bool)
    event = np.array(["max_len"] * K, dtype=object)
    length = np.zeros(K)
    closure = np.full(K, np.inf)
    s_prev = np.zeros(K)
    r_c = max(50 * h, 1e-3 * scale)
    paths = [X0.copy()] if keep_paths else None
    nsteps = int(np.ceil(max_len / h))
    end_idx = np.full(K, -1)
    for step in range(1, nsteps + 1):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        x, tref, md = X[idx], T[idx], mode[idx]
        try:
            k1, _ = field_(x, tref, md)
            k2, _ = field_(x + 0.5 * h * k1, k1, md)
            k3, _ = field_(x + 0.5 * h * k2, k2, md)
            k4, _ = field_(x + h * k3, k3, md)
        except MetricDomainError:
            event[idx] = "singular"
            active[idx] = False
            end_idx[idx] = step - 1
            break
        xn = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        tn, d1n = field_(xn, k4, md)
        A, Bc, C = field_.block(xn)
        sc = np.maximum.reduce([np.abs(A), np.abs(C), np.abs(Bc)]) ** 2
        X[idx] = xn
        T[idx] = tn
        length[idx] += h
        if keep_paths:
            frame = paths[-1].copy()
            frame[idx] = xn
            paths.append(frame)
        # termination tests
        leave = (md == 0) & (np.abs(d1n) > leave_tol * sc)
        reach = (md != 0) & (d1n >= -1e-12 * sc)
        stop = leave | reach
        if stop.any():
            j = idx[stop]
            event[idx[leave]] = np.where(d1n[leave] > 0, "left_restricted_ergosphere_outward",
                                         "left_restricted_ergosphere_inward")
            event[idx[reach]] = "reached_restricted_ergosphere"
            active[j] = False
            end_idx[j] = step
        # return test against the start normal line
        t0 = T0[idx]
        s_new = np.einsum("ij,ij->i", xn - X0[idx], t0)
        back = (s_prev[idx] < 0) & (s_new >= 0) & (length[idx] > 2 * r_c) & ~stop
        if back.any():
            b = idx[back]
            w = s_prev[b] / (s_prev[b] - s_new[back])
            xprev = xn[back] - (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)[back]
            xc = xprev + w[:, None] * (xn[back] - xprev)
            dist = np.linalg.norm(xc - X0[b], axis=1)
            aligned = np.einsum("ij,ij->i", tn[back], t0[back]) > 0
            near = (dist < r_c) & aligned
            ok = near & (dist <= close_tol * scale)
            closure[b[near]] = np.minimum(closure[b[near]], dist[near])
            if ok.any():
                event[b[ok]] = "closed"
                active[b[ok]] = False
                end_idx[b[ok]] = step
                if stop_on_first_closure:
                    active[:] = False
                    end_idx[end_idx < 0] = step
                    event[(event == "max_len") & (end_idx == step)] = "interrupted"
        s_prev[idx] = s_new
    end_idx[end_idx < 0] = len(paths) - 1 if keep_paths else nsteps
    trajs = []
    P = np.stack(paths) if keep_paths else None
    for k in range(K):
        pts = P[: end_idx[k] + 1, k] if keep_paths else np.vstack([X0[k], X[k]])
        closed = event[k] == "closed"
        if closed:
            pts = pts[:-1]
        c = PlaneCurve(pts, closed=closed)
        trajs.append(CharacteristicTrajectory(c, str(event[k]), float(length[k]),
                                              float(closure[k]), X0[k].copy(), str(family[k])))
    return trajs


def _integrate_compiled(g, X0, T0, mode, family, h, max_len, scale, close_tol, leave_tol,
                        stop_on_first_closure, keep_paths):
    kind, prm = g.kernel
    prm = np.asarray(prm, dtype=float)
    nsteps = int(np.ceil(max_len / h))
    r_c = max(50 * h, 1e-3 * scale)
    out = np.empty((nsteps + 1, 2))
    trajs = []
    stopped = False
    for k in range(len(X0)):
        if stopped:
            c = PlaneCurve(np.vstack([X0[k], X0[k]]), closed=False)
            trajs.append(CharacteristicTrajectory(c, "not_run", 0.0, np.inf, X0[k].copy(),
                                                  str(family[k])))
            continue
        n, ev, length, clo = _jit_integrate(kind, prm, X0[k], T0[k], int(mode[k]), h, nsteps,
                                            scale, close_tol, leave_tol, r_c, out)
        event = _EVENTS[ev]
        pts = out[: n + 1].copy() if keep_paths else np.vstack([X0[k], out[n]])
        closed = event == "closed"
        if closed and keep_paths:
            pts = pts[:-1]
        trajs.append(CharacteristicTrajectory(PlaneCurve(pts, closed=closed), event,
                                              float(length), float(clo), X0[k].copy(),
                                              str(family[k])))
        if closed and stop_on_first_closure:
            stopped = True
    return trajs


def integrate_characteristic(g: StationaryMetric, start, family: str = "+", h: float = 1e-3,
                             max_len: float = 50.0, reverse: bool = False,
                             scale: Optional[float] = None) -> CharacteristicTrajectory:
    """Integrate one characteristic curve from ``start`` (see ``integrate_batch``)."""
    if family not in ("+", "-"):
        raise ValueError("family must be '+' or '-'")
    return integrate_batch(g, [start], family, reverse, h, max_len, scale)[0]


def rk4_order(g: StationaryMetric, start, family: str = "+", length: float = 2.0,
              hs=(0.04, 0.02, 0.01, 0.005)):
    """Observed convergence order from endpoint differences under step halving."""
    ends = []
    for h in hs:
        tr = integrate_batch(g, [start], family, False, h, length, keep_paths=False)[0]
        if tr.event not in ("max_len",):
            raise RuntimeError(f"order test trajectory stopped early: {tr.event}")
        ends.append(tr.curve.points[-1])
    ends = np.array(ends)
    diffs = np.linalg.norm(np.diff(ends, axis=0), axis=1)
    orders = np.log2(diffs[:-1] / diffs[1:])
    return orders, diffs


# ---------------------------------------------------------------------------
# closed characteristic search


@dataclass
class ClosureResult:
    curve: Optional[PlaneCurve]
    trajectory: Optional[CharacteristicTrajectory]
    certificate: List[dict]
    coverage: dict

    @property
    def found(self) -> bool:
        return self.curve is not None


def find_closed_characteristic(g: StationaryMetric, seed_window, n_seeds: int = 64,
                               h: float = 1e-3, max_len: Optional[float] = None,
                               grid_n: int = 256, inward_fraction: float = 0.1,
                               close_tol: float = 1e-6) -> ClosureResult:
    """Search for a closed characteristic near the largest traced det B = 0 curve.

    Half the seeds sit on the traced curve (merged-direction mode), the rest
    at ``inward_fraction`` of the inradius inside it, launched in both families.
    All seeds are integrated together; the first closure (lowest seed index)
    is returned, otherwise a certificate of every exit event.
    """
    from .ergosphere import delta1

    try:
        rep = trace_level_set(lambda P: delta1(g, P), seed_window, grid_n)
    except TopologyError as exc:
        if "no sign change" in str(exc):
            return ClosureResult(None, None, [], {"seeds": 0,
                                                 "reason": "no seeds: det B > 0 everywhere"})
        raise
    base = rep.curve.full()
    loop = base.loop
    scale = float(np.max(np.abs(loop)))
    n_on = max(1, n_seeds // 2)
    n_in = n_seeds - n_on
    frac = base.arc_fractions()
    want = (np.arange(n_on) + 0.5) / n_on
    on_idx = np.searchsorted(frac, want).clip(0, len(loop) - 1)
    seeds = [loop[on_idx]]
    fams = ["+"] * n_on
    revs = [False] * n_on
    spline = base.spline()
    inr = spline.inradius()
    if n_in > 0:
        pairs = max(1, n_in // 2)
        want = (np.arange(pairs) + 0.25) / pairs
        ii = np.searchsorted(frac, want).clip(0, len(loop) - 1)
        nrm = base.outward_normals()[ii]
        pts = loop[ii] - inward_fraction * inr * nrm
        d1 = delta1(g, pts)
        pts = pts[d1 < 0]
        for fam in ("+", "-"):
            seeds.append(pts)
            fams += [fam] * len(pts)
            revs += [False] * len(pts)
    seeds = np.vstack(seeds)
    if max_len is None:
        max_len = 1.5 * base.length()
    trajs = integrate_batch(g, seeds, np.array(fams), np.array(revs), h, max_len, scale,
                            close_tol=close_tol, stop_on_first_closure=True)
    cert = [{"seed": i, "start": t.start.tolist(), "family": t.family, "event": t.event,
             "length": t.length, "closest_return": t.closure_distance}
            for i, t in enumerate(trajs)]
    coverage = {"seeds": len(trajs), "on_curve": n_on, "interior": len(trajs) - n_on,
                "band_width": inward_fraction * inr, "max_len": max_len, "h": h}
    for t in trajs:
        if t.closed:
            return ClosureResult(t.curve, t, cert, coverage)
    return ClosureResult(None, None, cert, coverage)
