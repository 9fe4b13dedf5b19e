"""Ergosphere scalars, Kerr horizon/ergosphere formulas and zero-set tracing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np
from scipy.optimize import brentq

from .curves import PlaneCurve, ParametricCurve, points_in_polygon, distance_to_polyline
from .metric_core import KerrParams, StationaryMetric, ExtremalError, kerr_radius


class TopologyError(RuntimeError):
    """The traced zero set is not a union of closed (or axis-closed) curves."""


class BranchRangeError(ValueError):
    """No root of the requested ergosphere branch at the given height."""


# ---------------------------------------------------------------------------
# scalars


def delta(g: StationaryMetric, p) -> np.ndarray:
    """Oriented determinant of the spatial block, (-1)^n det, so that flat space gives +1.

    For axisymmetric metrics the frame block is used; it differs from the
    coordinate determinant by the positive factor rho**2.
    """
    M = g.frame(p)
    n = g.dim
    return (-1) ** n * np.linalg.det(M[..., 1:, 1:])


def delta1(g: StationaryMetric, p) -> np.ndarray:
    """Determinant of the two-dimensional (x1, x2) block, g11 g22 - g12^2."""
    M = g.frame(p)
    return M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] ** 2


# ---------------------------------------------------------------------------
# Kerr closed forms


def kerr_horizon_radii(params: KerrParams):
    if params.a > params.m:
        raise ExtremalError("a > m has no horizons")
    s = np.sqrt(params.m ** 2 - params.a ** 2)
    return params.m + s, params.m - s


def kerr_horizon_curve(params: KerrParams, which: str = "outer") -> ParametricCurve:
    """The horizon r = r_plus (or r_minus) as an ellipse in the (rho, z) plane."""
    rp, rm = kerr_horizon_radii(params)
    r = rp if which == "outer" else rm
    return ParametricCurve.ellipse(np.sqrt(2 * params.m * r), r)


def kerr_rho(r, z, a):
    """rho at which the spheroidal radius equals r at height z (requires r >= |z|)."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (r * r + a * a) * (1 - np.where(r > 0, z * z / (r * r), 0.0))
    return np.sqrt(np.maximum(val, 0.0))


def kerr_ergosphere_radius(params: KerrParams, z: float, branch: str = "outer") -> float:
    """Root of r^4 - 2 m r^3 + a^2 z^2 = 0 on the outer (r >= 3m/2) or inner branch."""
    m, a = params.m, params.a
    z = float(z)

    def h(r):
        return r ** 4 - 2 * m * r ** 3 + a * a * z * z

    rp, rm = kerr_horizon_radii(params)
    if branch == "outer":
        lo, hi = 1.5 * m, 2 * m
        reach = rp
    elif branch == "inner":
        lo, hi = 0.0, 1.5 * m
        reach = rm
    else:
        raise ValueError("branch must be 'outer' or 'inner'")
    if abs(z) > reach * (1 + 1e-12):
        raise BranchRangeError(f"|z|={abs(z):g} beyond the {branch} branch reach {reach:g}")
    if h(lo) * h(hi) > 0:
        if h(hi) == 0:
            return hi
        if h(lo) == 0:
            return lo
        raise BranchRangeError(f"no {branch} ergosphere root at z={z:g}")
    if h(lo) == 0:
        return lo
    r = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(r)


# ---------------------------------------------------------------------------
# level-set tracing


@dataclass
class LevelSetReport:
    curves: List[PlaneCurve]
    residual_max: float
    bbox: tuple
    scale: float = 1.0
    n_corner: int = 0
    grid_n: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def curve(self) -> PlaneCurve:
        return self.curves[0]


def _polish(f, A, B, fA, fB, scale, iters=80):
    """Vectorized Illinois root finding on the segments A + s (B - A), s in [0, 1]."""
    a = np.zeros(len(A))
    b = np.ones(len(A))
    fa, fb = fA.copy(), fB.copy()
    side = np.zeros(len(A), dtype=int)
    s = 0.5 * np.ones(len(A))
    for _ in range(iters):
        denom = fb - fa
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(denom != 0, (a * fb - b * fa) / denom, 0.5 * (a + b))
        bad = ~np.isfinite(s) | (s <= np.minimum(a, b)) | (s >= np.maximum(a, b))
        s = np.where(bad, 0.5 * (a + b), s)
        fs = f(A + s[:, None] * (B - A))
        same_b = np.sign(fs) == np.sign(fb)
        # replace the endpoint with the same sign; Illinois halving on repeats
        a_new = np.where(same_b, a, s)
        fa_new = np.where(same_b, np.where(side == 1, fa * 0.5, fa), fs)
        b_new = np.where(same_b, s, b)
        fb_new = np.where(same_b, fs, np.where(side == -1, fb * 0.5, fb))
        side = np.where(same_b, 1, -1)
        a, fa, b, fb = a_new, fa_new, b_new, fb_new
        done = (np.abs(fs) <= 1e-15 * scale) | (np.abs(b - a) <= 1e-15)
        if np.all(done):
            break
    fs = f(A + s[:, None] * (B - A))
    return s, np.abs(fs)


def trace_level_set(f: Callable, window, n: int = 512, *, tol: float = 1e-8,
                    max_refine: int = 2, axis: bool | None = None) -> LevelSetReport:
    """Trace the zero set of ``f`` on ``window = (rho_min, rho_max, z_min, z_max)``.

    Marching squares on an (n+1)^2 node grid; crossings are polished along the
    grid edges by bracketed root finding.  Chains ending on the rho = rho_min
    edge are accepted as axis-closed when that edge is the symmetry axis
    (default: when rho_min == 0).  Any other open chain raises ``TopologyError``.
    """
    rmin, rmax, zmin, zmax = map(float, window)
    if axis is None:
        axis = rmin == 0.0
    for level in range(max_refine + 1):
        N = int(n) * 2 ** level
        rho = np.linspace(rmin, rmax, N + 1)
        z = np.linspace(zmin, zmax, N + 1)
        P = np.stack(np.meshgrid(rho, z, indexing="ij"), -1)
        F = np.asarray(f(P), dtype=float)
        if not np.all(np.isfinite(F)):
            raise TopologyError("scalar field is not finite on the tracing grid")
        S = F > 0
        a_, b_, c_, d_ = S[:-1, :-1], S[1:, :-1], S[1:, 1:], S[:-1, 1:]
        saddle = (a_ == c_) & (b_ == d_) & (a_ != b_)
        if not saddle.any() or level == max_refine:
            break

    scale = float(np.median(np.abs(F)))
    if scale == 0:
        scale = float(np.max(np.abs(F))) or 1.0

    NH = N * (N + 1)

    def H(i, j):
        return i * (N + 1) + j

    def V(i, j):
        return NH + i * N + j

    # crossing edges and their polished points
    hx = S[:-1, :] != S[1:, :]
    vx = S[:, :-1] != S[:, 1:]
    hi_, hj_ = np.nonzero(hx)
    vi_, vj_ = np.nonzero(vx)
    ids = np.concatenate([H(hi_, hj_), V(vi_, vj_)])
    A = np.concatenate([P[hi_, hj_], P[vi_, vj_]])
    B = np.concatenate([P[hi_ + 1, hj_], P[vi_, vj_ + 1]])
    fA = np.concatenate([F[hi_, hj_], F[vi_, vj_]])
    fB = np.concatenate([F[hi_ + 1, hj_], F[vi_, vj_ + 1]])
    s, res = _polish(f, A, B, fA, fB, scale)
    corner = res > tol * scale
    s_lin = fA / (fA - fB)
    s = np.where(corner, s_lin, s)
    pts = A + s[:, None] * (B - A)
    point_of = dict(zip(ids.tolist(), range(len(ids))))
    on_axis = np.zeros(len(ids), bool)
    if axis:
        on_axis[len(hi_):] = vi_ == 0
    boundary = np.concatenate([(hj_ == 0) | (hj_ == N), (vi_ == 0) | (vi_ == N)])

    # segments per cell
    ci, cj = np.nonzero(a_ ^ b_ | b_ ^ c_ | c_ ^ d_)
    centre_sign = {}
    sad = saddle[ci, cj]
    if sad.any():
        cc = 0.5 * (P[ci[sad], cj[sad]] + P[ci[sad] + 1, cj[sad] + 1])
        centre_sign = dict(zip(zip(ci[sad].tolist(), cj[sad].tolist()), (f(cc) > 0).tolist()))
    adj: dict = {}

    def link(e1, e2):
        adj.setdefault(e1, []).append(e2)
        adj.setdefault(e2, []).append(e1)

    for i, j in zip(ci.tolist(), cj.tolist()):
        bottom, right, top, left = H(i, j), V(i + 1, j), H(i, j + 1), V(i, j)
        sa, sb, sc, sd = S[i, j], S[i + 1, j], S[i + 1, j + 1], S[i, j + 1]
        if (i, j) in centre_sign:
            if centre_sign[(i, j)] == sa:
                link(bottom, right)
                link(top, left)
            else:
                link(left, bottom)
                link(right, top)
            continue
        edges = [e for e, x in ((bottom, sa != sb), (right, sb != sc), (top, sc != sd),
                                (left, sd != sa)) if x]
        link(edges[0], edges[1])

    curves, problems = [], []
    seen = set()
    ends = [e for e in adj if len(adj[e]) == 1]
    order = sorted(ends) + sorted(e for e in adj if len(adj[e]) != 1)
    for start in order:
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [e for e in adj[cur] if e != prev and e not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        k = [point_of[e] for e in chain]
        loop_closed = len(adj[start]) == 2 and start in adj[chain[-1]] and len(chain) > 2
        if loop_closed:
            c = PlaneCurve(pts[k], closed=True)
        elif on_axis[k[0]] and on_axis[k[-1]] and len(k) > 2:
            if pts[k[0], 1] > pts[k[-1], 1]:
                k = k[::-1]
            c = PlaneCurve(pts[k], closed=False, axis_closed=True)
        else:
            where = [tuple(np.round(pts[k[0]], 6)), tuple(np.round(pts[k[-1]], 6))]
            kind = "window boundary" if (boundary[k[0]] or boundary[k[-1]]) else "interior"
            problems.append(f"open chain of {len(k)} points ending at {where} ({kind})")
            continue
        curves.append(c.ccw())
    if problems:
        raise TopologyError("zero set is not closed: " + "; ".join(problems))
    if not curves:
        raise TopologyError("no sign change of the scalar inside the window")
    curves.sort(key=lambda c: -abs(c.area()))
    good = ~corner
    resid = float(res[good].max()) if good.any() else float("nan")
    return LevelSetReport(curves=curves, residual_max=resid, bbox=(rmin, rmax, zmin, zmax),
                          scale=scale, n_corner=int(corner.sum()), grid_n=N)


# ---------------------------------------------------------------------------
# containment


@dataclass
class ContainmentResult:
    status: str  # inside | touching | violated
    touching: np.ndarray
    violating: np.ndarray
    band: float
    max_excursion: float = 0.0

    def __bool__(self):
        return self.status != "violated"


def containment_check(inner: PlaneCurve, outer: PlaneCurve, band: float | None = None
                      ) -> ContainmentResult:
    """Check that every sample of ``inner`` is inside or on ``outer``.

    Samples within ``band`` of the outer polyline count as touching.  The
    default band is the larger of 1e-9 and the chord sagitta of the outer
    polyline, since the true curve can bulge that far from its chords.
    """
    pin = inner.loop
    pout = outer.loop
    if band is None:
        band = max(1e-9, outer._sagitta())
    dist = distance_to_polyline(pin, pout)
    inside = points_in_polygon(pin, pout)
    touch = dist <= band
    viol = ~inside & ~touch
    exc = float(np.max(np.where(~inside, dist, 0.0)))
    if viol.any():
        status = "violated"
    elif touch.any():
        status = "touching"
    else:
        status = "inside"
    return ContainmentResult(status, pin[touch], pin[viol], band, exc)
