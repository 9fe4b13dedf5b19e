"""Plane curves in the meridional (rho, z) half-plane and in the Cartesian plane.

Two flavours live here:

* ``PlaneCurve`` -- an ordered list of samples, optionally closed or
  closed by reflection across the axis (``axis_closed``).
* ``ParametricCurve`` -- an analytic closed curve x(theta) with exact first
  and second derivatives, used wherever signed distances must be exact.

Sampled curves are promoted to parametric ones through a periodic cubic
spline, so projection code is shared.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree


class GeometryError(ValueError):
    """Raised for degenerate or ill-posed curve geometry."""


class AmbiguityError(GeometryError):
    """Raised when a point lies beyond the focal (medial-axis) distance of a curve."""


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected (N, 2) points, got shape {pts.shape}")
    return pts


def polygon_area(loop: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon (positive when CCW)."""
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def points_in_polygon(pts: np.ndarray, loop: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Even-odd rule, vectorized over query points."""
    pts = np.atleast_2d(pts)
    x0, y0 = loop[:, 0][None, :], loop[:, 1][None, :]
    x1, y1 = np.roll(loop[:, 0], -1)[None, :], np.roll(loop[:, 1], -1)[None, :]
    out = np.empty(len(pts), bool)
    for s in range(0, len(pts), chunk):
        x, y = pts[s:s + chunk, 0:1], pts[s:s + chunk, 1:2]
        cond = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        out[s:s + chunk] = np.count_nonzero(cond & (x < xint), axis=1) % 2 == 1
    return out


def inside_grid(x1: np.ndarray, x2: np.ndarray, loop: np.ndarray) -> np.ndarray:
    """Even-odd test on the tensor grid x1 (x) x2 by one scanline per x2 value."""
    a, b = loop, np.roll(loop, -1, axis=0)
    out = np.zeros((len(x1), len(x2)), bool)
    for j, y in enumerate(x2):
        cond = (a[:, 1] > y) != (b[:, 1] > y)
        if not np.any(cond):
            continue
        aa, bb = a[cond], b[cond]
        xs = np.sort(aa[:, 0] + (y - aa[:, 1]) * (bb[:, 0] - aa[:, 0]) / (bb[:, 1] - aa[:, 1]))
        # number of crossings to the right of each x1
        right = len(xs) - np.searchsorted(xs, x1, side="right")
        out[:, j] = right % 2 == 1
    return out


def distance_to_polyline(pts: np.ndarray, poly: np.ndarray, closed: bool = True,
                         chunk: int = 256) -> np.ndarray:
    """Euclidean distance from each point to a polyline (segments between samples)."""
    pts = np.atleast_2d(pts)
    a = poly
    b = np.roll(poly, -1, axis=0) if closed else poly[1:]
    a = a if closed else poly[:-1]
    ab = b - a
    L2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk, None, :]
        t = np.clip(np.einsum("kij,ij->ki", p - a[None], ab) / L2, 0.0, 1.0)
        d = p - (a[None] + t[..., None] * ab[None])
        out[s:s + chunk] = np.sqrt(np.min(np.einsum("kij,kij->ki", d, d), axis=1))
    return out


def _segments_intersect(loop: np.ndarray) -> bool:
    """True if any two non-adjacent segments of the closed polygon cross."""
    n = len(loop)
    a = loop
    b = np.roll(loop, -1, axis=0)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
               (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    idx = np.arange(n)
    for s in range(0, n, 128):
        i = idx[s:s + 128, None]
        j = idx[None, :]
        adj = (j == i) | (j == (i + 1) % n) | (i == (j + 1) % n)
        box = np.all(lo[i] <= hi[j], axis=-1) & np.all(lo[j] <= hi[i], axis=-1)
        cand = box & ~adj & (j > i)
        if not cand.any():
            continue
        ii, jj = np.nonzero(cand)
        ii = ii + s
        p1, p2, q1, q2 = a[ii], b[ii], a[jj], b[jj]
        d1 = orient(q1, q2, p1)
        d2 = orient(q1, q2, p2)
        d3 = orient(p1, p2, q1)
        d4 = orient(p1, p2, q2)
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return True
    return False


@dataclass(frozen=True)
class ParametricCurve:
    """Closed analytic curve theta -> x(theta), theta in [0, 2 pi).

    ``x``, ``dx`` and ``ddx`` map an array of parameters to (..., 2) arrays.
    ``symmetric`` marks curves that are even under rho -> -rho.
    """

    x: Callable[[np.ndarray], np.ndarray]
    dx: Callable[[np.ndarray], np.ndarray]
    ddx: Callable[[np.ndarray], np.ndarray]
    name: str = "curve"
    symmetric: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def ellipse(a_rho: float, b_z: float, center=(0.0, 0.0)) -> "ParametricCurve":
        cx, cz = map(float, center)
        if a_rho <= 0 or b_z <= 0:
            raise GeometryError("ellipse semi-axes must be positive")
        return ParametricCurve(
            x=lambda t: np.stack([cx + a_rho * np.cos(t), cz + b_z * np.sin(t)], -1),
            dx=lambda t: np.stack([-a_rho * np.sin(t), b_z * np.cos(t)], -1),
            ddx=lambda t: np.stack([-a_rho * np.cos(t), -b_z * np.sin(t)], -1),
            name=f"ellipse({a_rho:g},{b_z:g})",
            symmetric=(cx == 0.0),
        )

    @staticmethod
    def circle(radius: float, center=(0.0, 0.0)) -> "ParametricCurve":
        c = ParametricCurve.ellipse(radius, radius, center)
        return ParametricCurve(c.x, c.dx, c.ddx, name=f"circle({radius:g})",
                               symmetric=c.symmetric)

    @staticmethod
    def perturbed_circle(radius: float, amp: float, k: int,
                         center=(0.0, 0.0)) -> "ParametricCurve":
        """r(theta) = R (1 + amp cos(k theta)); even in rho for even k about the z axis."""
        cx, cz = map(float, center)
        if not 0 <= abs(amp) < 1:
            raise GeometryError("perturbation amplitude must satisfy |amp| < 1")

        def r(t):
            return radius * (1 + amp * np.cos(k * t))

        def dr(t):
            return -radius * amp * k * np.sin(k * t)

        def ddr(t):
            return -radius * amp * k * k * np.cos(k * t)

        def x(t):
            return np.stack([cx + r(t) * np.cos(t), cz + r(t) * np.sin(t)], -1)

        def dx(t):
            c, s = np.cos(t), np.sin(t)
            return np.stack([dr(t) * c - r(t) * s, dr(t) * s + r(t) * c], -1)

        def ddx(t):
            c, s = np.cos(t), np.sin(t)
            return np.stack([ddr(t) * c - 2 * dr(t) * s - r(t) * c,
                             ddr(t) * s + 2 * dr(t) * c - r(t) * s], -1)

        # cos(k theta) with theta measured from the rho axis is even under
        # theta -> pi - theta only for even k.
        return ParametricCurve(x, dx, ddx, name=f"perturbed_circle({radius:g},{amp:g},{k})",
                               symmetric=(cx == 0.0 and k % 2 == 0))

    @staticmethod
    def from_samples(points, name: str = "spline") -> "ParametricCurve":
        """Periodic cubic spline through a closed loop of samples."""
        pts = _as_points(points)
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        keep = np.ones(len(pts), bool)
        tiny = 1e-6 * seg.mean()
        keep[1:] = seg[:-1] > tiny
        pts = pts[keep]
        if len(pts) < 8:
            raise GeometryError("too few distinct samples for a spline curve")
        closed = np.vstack([pts, pts[:1]])
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
        theta = 2 * np.pi * s / s[-1]
        sp = CubicSpline(theta, closed, bc_type="periodic", axis=0)
        d1, d2 = sp.derivative(1), sp.derivative(2)
        two_pi = 2 * np.pi
        return ParametricCurve(
            x=lambda t: sp(np.mod(t, two_pi)),
            dx=lambda t: d1(np.mod(t, two_pi)),
            ddx=lambda t: d2(np.mod(t, two_pi)),
            name=name,
        )

    # -- sampling -----------------------------------------------------------
    def sample(self, n: int = 400) -> "PlaneCurve":
        t = 2 * np.pi * np.arange(n) / n
        pts = self.x(t)
        tan = self.dx(t)
        curve = PlaneCurve(pts, closed=True, tangents=tan, param=self)
        return curve if curve.area() > 0 else curve.reversed()

    def _dense(self):
        if "dense" not in self._cache:
            t = 2 * np.pi * np.arange(4096) / 4096
            pts = self.x(t)
            self._cache["dense"] = (t, pts, cKDTree(pts))
            self._cache["ccw"] = polygon_area(pts) > 0
            d1 = self.dx(t)
            d2 = self.ddx(t)
            speed = np.linalg.norm(d1, axis=1)
            kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
            self._cache["kappa"] = kappa if self._cache["ccw"] else -kappa
        return self._cache["dense"]

    @property
    def ccw(self) -> bool:
        self._dense()
        return self._cache["ccw"]

    def max_curvature(self) -> float:
        """Max of the signed curvature (positive where the curve bends toward its inside)."""
        self._dense()
        return float(np.max(self._cache["kappa"]))

    def min_radius(self) -> float:
        """Smallest radius of curvature on the convex parts (the interior focal distance)."""
        k = self.max_curvature()
        return np.inf if k <= 0 else 1.0 / k

    def inradius(self) -> float:
        """Radius of the largest disc centred at the centroid that fits inside."""
        _, pts, _ = self._dense()
        c = pts.mean(axis=0)
        return float(np.min(np.linalg.norm(pts - c, axis=1)))

    def centroid(self) -> np.ndarray:
        _, pts, _ = self._dense()
        return pts.mean(axis=0)

    # -- projection ---------------------------------------------------------
    def project(self, p, iters: int = 40):
        """Closest-point projection by safeguarded Newton on (x(t)-p).x'(t) = 0.

        Returns ``(theta, foot, d_in, grad_d_in, kappa)`` where ``d_in`` is the
        signed distance (positive inside) and ``grad_d_in`` its gradient.
        """
        p = np.asarray(p, dtype=float)
        shape = p.shape[:-1]
        q = p.reshape(-1, 2)
        t_dense, pts, tree = self._dense()
        _, idx = tree.query(q)
        t = t_dense[idx].copy()
        dt_max = 2 * np.pi / 4096
        for _ in range(iters):
            x, d1, d2 = self.x(t), self.dx(t), self.ddx(t)
            r = x - q
            F = np.einsum("ij,ij->i", r, d1)
            J = np.einsum("ij,ij->i", d1, d1) + np.einsum("ij,ij->i", r, d2)
            J = np.where(J > 1e-12, J, np.einsum("ij,ij->i", d1, d1))
            step = np.clip(F / J, -dt_max, dt_max)
            t = t - step
            if np.max(np.abs(step)) < 1e-15:
                break
        foot = self.x(t)
        d1 = self.dx(t)
        d2 = self.ddx(t)
        speed = np.linalg.norm(d1, axis=1)
        tan = d1 / speed[:, None]
        sgn = 1.0 if self.ccw else -1.0
        n_out = sgn * np.stack([tan[:, 1], -tan[:, 0]], -1)
        diff = q - foot
        d_in = -np.einsum("ij,ij->i", diff, n_out)
        kappa = sgn * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
        grad = -n_out
        return (t.reshape(shape), foot.reshape(shape + (2,)), d_in.reshape(shape),
                grad.reshape(shape + (2,)), kappa.reshape(shape))

    def signed_distance(self, p, strict: bool = True):
        """Signed distance (positive inside) and its gradient.

        With ``strict`` an ``AmbiguityError`` is raised for points at or beyond
        the local focal distance, where the nearest point stops being unique.
        """
        _, _, d, g, kappa = self.project(p)
        if strict:
            focal = (kappa > 0) & (d * kappa >= 1 - 1e-9)
            if np.any(focal):
                raise AmbiguityError(
                    f"{int(np.count_nonzero(focal))} point(s) lie beyond the medial axis of {self.name}")
        return d, g


@dataclass
class PlaneCurve:
    """Ordered samples of a curve.

    ``closed`` curves connect last to first.  ``axis_closed`` curves run from
    one axis point (rho = 0) to another in the right half-plane and close by
    reflection rho -> -rho; ``loop`` returns the mirrored full loop.
    """

    points: np.ndarray
    closed: bool = True
    axis_closed: bool = False
    tangents: Optional[np.ndarray] = None
    param: Optional[ParametricCurve] = None

    def __post_init__(self):
        self.points = _as_points(self.points)
        if self.tangents is not None:
            self.tangents = _as_points(self.tangents)
            if len(self.tangents) != len(self.points):
                raise GeometryError("tangents must match points")

    def __len__(self):
        return len(self.points)

    # -- derived geometry ---------------------------------------------------
    @property
    def loop(self) -> np.ndarray:
        if not self.axis_closed:
            return self.points
        mir = self.points[::-1].copy()
        mir[:, 0] *= -1
        # endpoints sit on the axis and would be duplicated
        return np.vstack([self.points, mir[1:-1]])

    def _loop_tangents(self) -> Optional[np.ndarray]:
        if self.tangents is None:
            return None
        if not self.axis_closed:
            return self.tangents
        mt = self.tangents[::-1].copy()
        mt[:, 1] *= -1
        return np.vstack([self.tangents, mt[1:-1]])

    def full(self) -> "PlaneCurve":
        if not self.axis_closed:
            return self
        return PlaneCurve(self.loop, closed=True, tangents=self._loop_tangents(),
                          param=self.param)

    def area(self) -> float:
        return polygon_area(self.loop)

    def reversed(self) -> "PlaneCurve":
        tan = None if self.tangents is None else -self.tangents[::-1]
        return PlaneCurve(self.points[::-1].copy(), self.closed, self.axis_closed, tan, self.param)

    def ccw(self) -> "PlaneCurve":
        return self if self.area() >= 0 else self.reversed()

    def arc_fractions(self) -> np.ndarray:
        loop = self.loop
        seg = np.linalg.norm(np.diff(np.vstack([loop, loop[:1]]), axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg[:-1])])
        return s / seg.sum()

    def length(self) -> float:
        loop = self.loop
        closed = np.vstack([loop, loop[:1]]) if (self.closed or self.axis_closed) else loop
        return float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1)))

    def spline(self) -> ParametricCurve:
        if self.param is not None:
            return self.param
        if not (self.closed or self.axis_closed):
            raise GeometryError("spline representation needs a closed curve")
        return ParametricCurve.from_samples(self.loop)

    def unit_tangents(self) -> np.ndarray:
        """Unit tangents on ``loop`` samples (exact when available, spline otherwise)."""
        tan = self._loop_tangents()
        if tan is None:
            loop = self.loop
            seg = np.linalg.norm(np.diff(np.vstack([loop, loop[:1]]), axis=0), axis=1)
            if np.any(seg < 1e-14 * max(seg.max(), 1e-300)):
                raise GeometryError("duplicate consecutive points: normal is undefined")
            sp = self.spline()
            s = np.concatenate([[0.0], np.cumsum(seg[:-1])])
            tan = sp.dx(2 * np.pi * s / seg.sum())
        norm = np.linalg.norm(tan, axis=1)
        if np.any(norm < 1e-300):
            raise GeometryError("zero-length tangent: normal is undefined")
        return tan / norm[:, None]

    def outward_normals(self) -> np.ndarray:
        """Outward unit normals on ``loop`` samples."""
        t = self.unit_tangents()
        n = np.stack([t[:, 1], -t[:, 0]], -1)
        return n if self.area() >= 0 else -n

    def is_simple(self) -> bool:
        return not _segments_intersect(self.loop)

    def is_even(self, tol: float = 1e-6) -> bool:
        """Whether reflection rho -> -rho maps the curve onto itself."""
        if self.axis_closed:
            return bool(abs(self.points[0, 0]) <= tol and abs(self.points[-1, 0]) <= tol)
        loop = self.loop
        mir = loop * np.array([-1.0, 1.0])
        scale = max(np.ptp(loop, axis=0).max(), 1e-300)
        return bool(np.max(distance_to_polyline(mir, loop)) <= tol * scale + self._sagitta())

    def _sagitta(self) -> float:
        loop = self.loop
        prev, nxt = np.roll(loop, 1, axis=0), np.roll(loop, -1, axis=0)
        chord = nxt - prev
        L = np.maximum(np.linalg.norm(chord, axis=1), 1e-300)
        dev = np.abs(chord[:, 0] * (loop[:, 1] - prev[:, 1]) -
                     chord[:, 1] * (loop[:, 0] - prev[:, 0])) / L
        return float(dev.max()) if len(dev) else 0.0

    def contains(self, pts) -> np.ndarray:
        return points_in_polygon(np.atleast_2d(pts), self.loop)

    def distance(self, pts) -> np.ndarray:
        return distance_to_polyline(np.atleast_2d(pts), self.loop, closed=True)

    def bbox(self):
        loop = self.loop
        return (float(loop[:, 0].min()), float(loop[:, 0].max()),
                float(loop[:, 1].min()), float(loop[:, 1].max()))


def hausdorff(a: np.ndarray, b: np.ndarray, closed_a: bool = True, closed_b: bool = True) -> float:
    """Symmetric Hausdorff distance between two polylines (vertex-to-segment)."""
    return float(max(_directed(a, b, closed_b), _directed(b, a, closed_a)))


def _directed(src: np.ndarray, poly: np.ndarray, closed: bool) -> float:
    # KD-tree prefilter over vertices, then exact segment distance to nearby segments
    tree = cKDTree(poly)
    k = min(8, len(poly))
    _, idx = tree.query(src, k=k)
    idx = np.atleast_2d(idx)
    n = len(poly)
    best = np.full(len(src), np.inf)
    for off in (-1, 0):
        ia = idx + off
        if closed:
            ia %= n
            ib = (ia + 1) % n
        else:
            ia = np.clip(ia, 0, n - 2)
            ib = ia + 1
        a, b = poly[ia], poly[ib]
        ab = b - a
        L2 = np.maximum(np.einsum("ijk,ijk->ij", ab, ab), 1e-300)
        t = np.clip(np.einsum("ijk,ijk->ij", src[:, None] - a, ab) / L2, 0, 1)
        d = src[:, None] - (a + t[..., None] * ab)
        best = np.minimum(best, np.sqrt(np.einsum("ijk,ijk->ij", d, d)).min(axis=1))
    return float(best.max())
