"""Cell-centred grids on a rectangle of the (rho, z) half-plane, with excision."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from ..curves import ParametricCurve, PlaneCurve, inside_grid

INTERIOR, EXCISED, OUTER_BOUNDARY, AXIS = 0, 1, 2, 3
MASK_NAMES = {INTERIOR: "interior", EXCISED: "excised",
              OUTER_BOUNDARY: "outer_boundary", AXIS: "axis"}

SIDES = ("x1min", "x1max", "x2min", "x2max")
BOUNDARY_KINDS = ("axis", "reflect", "sponge", "dirichlet")


class GridError(ValueError):
    """Inconsistent grid, excision or boundary specification."""


def _as_parametric(curve) -> ParametricCurve:
    if isinstance(curve, ParametricCurve):
        return curve
    if isinstance(curve, PlaneCurve):
        return curve.spline()
    raise GridError(f"cannot use {type(curve).__name__} as an excision curve")


def _clip_fraction(d, nx, ny, h1, h2):
    """Area fraction of the cell [-h1/2, h1/2] x [-h2/2, h2/2] where d + n.s >= 0."""
    corners = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]) * [h1, h2]
    out = np.empty(len(d))
    for k in range(len(d)):
        vals = d[k] + corners @ np.array([nx[k], ny[k]])
        poly = []
        for a in range(4):
            b = (a + 1) % 4
            pa, pb, va, vb = corners[a], corners[b], vals[a], vals[b]
            if va >= 0:
                poly.append(pa)
            if (va >= 0) != (vb >= 0):
                poly.append(pa + (pb - pa) * va / (va - vb))
        if len(poly) < 3:
            out[k] = 0.0
            continue
        P = np.array(poly)
        area = 0.5 * abs(np.dot(P[:, 0], np.roll(P[:, 1], -1)) - np.dot(P[:, 1], np.roll(P[:, 0], -1)))
        out[k] = area / (h1 * h2)
    return out


@dataclass
class Grid2D:
    """Uniform cell-centred grid.

    ``window`` is ((x1min, x1max), (x2min, x2max)); for axisymmetric problems
    x1 is rho and the x1min side is the axis.  ``boundary`` gives the kind of
    each side in the order x1min, x1max, x2min, x2max.  Cells strictly inside
    ``excision`` by more than ``excision_offset`` cells are removed.
    """

    window: tuple
    n1: int
    n2: int
    boundary: Sequence[str] = ("axis", "sponge", "sponge", "sponge")
    excision: Optional[object] = None
    excision_offset: float = 2.0
    mask: np.ndarray = field(init=False, repr=False)
    ext_weight: np.ndarray = field(init=False, repr=False)
    d_in: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        (a1, b1), (a2, b2) = self.window
        if not (b1 > a1 and b2 > a2):
            raise GridError("window must have positive extent")
        if self.n1 < 8 or self.n2 < 8:
            raise GridError("need at least 8 cells per direction")
        self.boundary = tuple(self.boundary)
        if len(self.boundary) != 4 or any(b not in BOUNDARY_KINDS for b in self.boundary):
            raise GridError(f"boundary must name 4 sides from {BOUNDARY_KINDS}")
        if "axis" in self.boundary[1:]:
            raise GridError("only the x1min side can be the axis")
        if self.boundary[0] == "axis" and a1 != 0.0:
            raise GridError("the axis side needs x1min = 0")
        self.h1 = (b1 - a1) / self.n1
        self.h2 = (b2 - a2) / self.n2
        self.x1 = a1 + (np.arange(self.n1) + 0.5) * self.h1
        self.x2 = a2 + (np.arange(self.n2) + 0.5) * self.h2
        self.X1, self.X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        self._build_mask()

    # -- geometry -------------------------------------------------------------
    @property
    def centers(self) -> np.ndarray:
        return np.stack([self.X1, self.X2], -1)

    @property
    def h(self) -> float:
        return max(self.h1, self.h2)

    @property
    def axisymmetric(self) -> bool:
        return self.boundary[0] == "axis"

    @property
    def active(self) -> np.ndarray:
        return self.mask != EXCISED

    def face_points(self, direction: int) -> np.ndarray:
        (a1, _), (a2, _) = self.window
        if direction == 1:
            f = a1 + np.arange(self.n1 + 1) * self.h1
            return np.stack(np.meshgrid(f, self.x2, indexing="ij"), -1)
        f = a2 + np.arange(self.n2 + 1) * self.h2
        return np.stack(np.meshgrid(self.x1, f, indexing="ij"), -1)

    def _build_mask(self):
        n1, n2 = self.n1, self.n2
        self.d_in = np.full((n1, n2), -np.inf)
        self.ext_weight = np.ones((n1, n2))
        excised = np.zeros((n1, n2), bool)
        self.curve = None
        if self.excision is not None:
            curve = _as_parametric(self.excision)
            self.curve = curve
            dense_t = 2 * np.pi * np.arange(8192) / 8192
            loop = curve.x(dense_t)
            P = self.centers.reshape(-1, 2)
            inside = inside_grid(self.x1, self.x2, loop).reshape(-1)
            near_d, _ = cKDTree(loop).query(P)
            diag = np.hypot(self.h1, self.h2)
            band = near_d < self.excision_offset * self.h + 2 * diag
            d = np.where(inside, np.inf, -np.inf)
            grad = np.zeros((len(P), 2))
            if np.any(band):
                dd, gg = curve.signed_distance(P[band], strict=False)
                # the Newton projection can land on a wrong branch far from
                # the curve; the polygon test owns the sign
                d[band] = np.where(inside[band], np.abs(dd), -np.abs(dd))
                grad[band] = gg
            self.d_in = d.reshape(n1, n2)
            excised = (self.d_in > self.excision_offset * self.h)
            # fraction of each cell outside the curve, by half-plane clipping
            w = np.where(inside, 0.0, 1.0)
            cut = band & (np.abs(d) < 0.5 * diag)
            if np.any(cut):
                # outside is d_in <= 0, i.e. -d_in - grad.s >= 0
                w[cut] = _clip_fraction(-d[cut], -grad[cut, 0], -grad[cut, 1], self.h1, self.h2)
            self.ext_weight = w.reshape(n1, n2)
            self.ext_weight[excised] = 0.0
        mask = np.full((n1, n2), INTERIOR, dtype=np.int8)
        edge = np.zeros((n1, n2), bool)
        for side, kind in zip(SIDES, self.boundary):
            if kind == "axis":
                continue
            sl = {"x1min": (0, slice(None)), "x1max": (-1, slice(None)),
                  "x2min": (slice(None), 0), "x2max": (slice(None), -1)}[side]
            edge[sl] = True
        mask[edge] = OUTER_BOUNDARY
        if self.boundary[0] == "axis":
            mask[0, :] = np.where(edge[0, :], OUTER_BOUNDARY, AXIS)
        mask[excised] = EXCISED
        self.mask = mask
        labels, count = ndimage.label(mask != EXCISED)
        if count != 1:
            raise GridError(f"active cells form {count} components; refine or move the window")
        if self.excision is not None:
            self._check_excision_stencils()

    def _check_excision_stencils(self):
        act = self.active
        for axis in (0, 1):
            a = np.moveaxis(act, axis, 0)
            n = a.shape[0]
            lo = np.zeros_like(a)
            hi = np.zeros_like(a)
            lo[1:] = a[1:] & ~a[:-1]
            hi[:-1] = a[:-1] & ~a[1:]
            bad = lo & hi
            if np.any(bad):
                raise GridError("excision leaves a one-cell-wide sliver of active cells")
            for k in (1, 2):
                # cells that extrapolate across the excision need k more active cells
                ok_lo = np.zeros_like(a)
                ok_lo[:n - k] = a[k:]
                ok_hi = np.zeros_like(a)
                ok_hi[k:] = a[:n - k]
                if np.any(lo & ~ok_lo) or np.any(hi & ~ok_hi):
                    raise GridError("excision region too close to another boundary for "
                                    "one-sided stencils")

    def excision_ghosts(self):
        """Ghost lists (cell_i, cell_j, step) for each direction.

        The ghost at an excised cell next to active cell (i + step) along the
        direction is the quadratic extrapolation from the active side.
        """
        act = self.active
        out = []
        for axis in (0, 1):
            rows = []
            for step in (1, -1):
                nb = np.zeros_like(act)
                if axis == 0:
                    if step == 1:
                        nb[:-1] = act[1:]
                    else:
                        nb[1:] = act[:-1]
                else:
                    if step == 1:
                        nb[:, :-1] = act[:, 1:]
                    else:
                        nb[:, 1:] = act[:, :-1]
                I, J = np.nonzero(~act & nb)
                rows.append(np.stack([I, J, np.full_like(I, step)], -1))
            lst = np.concatenate(rows).astype(np.int64)
            key = lst[:, 0] * (self.n2 + 1) + lst[:, 1]
            if len(np.unique(key)) != len(key):
                raise GridError("excised sliver one cell wide between active cells")
            out.append(lst.reshape(-1, 3))
        return out[0], out[1]

    def mask_name(self, i: int, j: int) -> str:
        return MASK_NAMES[int(self.mask[i, j])]

    def interpolate(self, field_, pts) -> np.ndarray:
        """Bilinear interpolation of a cell-centred field, even across the axis."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        (a1, _), (a2, _) = self.window
        s1 = (pts[:, 0] - a1) / self.h1 - 0.5
        s2 = (pts[:, 1] - a2) / self.h2 - 0.5
        i0 = np.floor(s1).astype(int)
        j0 = np.floor(s2).astype(int)
        f1 = s1 - i0
        f2 = s2 - j0

        def idx1(i):
            if self.axisymmetric:
                i = np.where(i < 0, -1 - i, i)
            return np.clip(i, 0, self.n1 - 1)

        def idx2(j):
            return np.clip(j, 0, self.n2 - 1)

        v = 0.0
        for di, wi in ((0, 1 - f1), (1, f1)):
            for dj, wj in ((0, 1 - f2), (1, f2)):
                v = v + wi * wj * field_[idx1(i0 + di), idx2(j0 + dj)]
        return v
