"""Stationary Lorentzian metrics given by their inverse tensor g^{jk}(x).

Conventions
-----------
Signature is (+, -, ..., -).  Points are arrays whose last axis holds the
spatial coordinates; every evaluator is vectorized over leading axes.

Axisymmetric metrics (``coords="cylindrical"``) take points (rho, z) and are
stored in the orthonormal frame (t, rho, z, phi_hat), where all components
are smooth across the axis.  The coordinate component g^{33} is the frame
value divided by rho**2.  Points with rho < 0 are handled by the reflection
(rho, phi) -> (-rho, phi + pi), i.e. conjugation with diag(1, -1, 1, -1).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class MetricDomainError(ValueError):
    """Metric evaluated outside its domain (e.g. at the Kerr r = 0 disc)."""


class SingularMetricError(np.linalg.LinAlgError):
    """Matrix too close to singular to invert; carries the determinant."""

    def __init__(self, det):
        self.det = det
        super().__init__(f"near-singular metric: |det| = {np.min(np.abs(det)):.3e} <= 1e-14")


class HyperbolicityError(ValueError):
    """Flow speed at or above the signal speed where the construction needs |w| < 1."""


class ExtremalError(ValueError):
    """Kerr parameters outside the subextremal range 0 <= a < m."""


_MIRROR = np.array([1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class FlowForm:
    """Velocity field generating a flow-form metric.

    ``v`` maps points to spatial frame components.  With ``v0 is None`` the
    metric is g^{00} = 1, g^{0j} = v^j, g^{jk} = -delta + v^j v^k.  With an
    explicit ``v0`` it is xi + V V^T over all indices, V = (v0, v).
    For cylindrical flows ``v`` returns (v_rho, v_z) or (v_rho, v_z, v_phi_hat).
    """

    dim: int
    v: Callable[[np.ndarray], np.ndarray]
    v0: Optional[Callable[[np.ndarray], np.ndarray]] = None
    coords: str = "cartesian"

    @property
    def v0_mode(self) -> str:
        return "unit" if self.v0 is None else "explicit"

    def velocity(self, p) -> np.ndarray:
        """Spatial frame components padded to the full frame width."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(self.v(p), dtype=float)
        width = self.dim
        if v.shape[-1] < width:
            pad = np.zeros(v.shape[:-1] + (width - v.shape[-1],))
            v = np.concatenate([v, pad], axis=-1)
        return v


@dataclass(frozen=True)
class KerrParams:
    m: float
    a: float

    def __post_init__(self):
        if not self.m > 0:
            raise ExtremalError("Kerr mass parameter must be positive")
        if not 0 <= self.a < self.m:
            raise ExtremalError(f"need 0 <= a < m, got a={self.a}, m={self.m}")


@dataclass(frozen=True)
class StationaryMetric:
    """Time-independent inverse metric.

    ``inv_g`` maps points (..., k) to (..., n+1, n+1) arrays.  For Cartesian
    metrics k = n and these are coordinate components.  For cylindrical metrics
    k = 2 and ``inv_g`` returns frame components on rho >= 0 (see module notes).
    """

    dim: int
    inv_g: Callable[[np.ndarray], np.ndarray]
    coords: str = "cartesian"
    name: str = "metric"
    flow: Optional[FlowForm] = None
    cov_g: Optional[Callable[[np.ndarray], np.ndarray]] = None
    # optional compiled meridional kernel: (kind, params), see jit_kernels
    kernel: Optional[tuple] = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.coords not in ("cartesian", "cylindrical"):
            raise ValueError("coords must be 'cartesian' or 'cylindrical'")
        if self.coords == "cylindrical" and self.dim != 3:
            raise ValueError("cylindrical metrics are three-dimensional")

    @property
    def point_dim(self) -> int:
        return 2 if self.coords == "cylindrical" else self.dim

    def frame(self, p) -> np.ndarray:
        """Smooth frame components of g^{jk}; equals ``inv_g`` in Cartesian mode."""
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.point_dim:
            raise ValueError(f"{self.name}: points need {self.point_dim} coordinates")
        if self.coords == "cartesian":
            return np.asarray(self.inv_g(p), dtype=float)
        neg = p[..., 0] < 0
        q = p.copy()
        q[..., 0] = np.abs(q[..., 0])
        M = np.asarray(self.inv_g(q), dtype=float)
        if np.any(neg):
            S = np.outer(_MIRROR, _MIRROR)
            M = np.where(neg[..., None, None], M * S, M)
        return M

    __call__ = frame

    def coordinate(self, p) -> np.ndarray:
        """Coordinate components; for cylindrical metrics the phi row picks up 1/rho."""
        M = self.frame(p)
        if self.coords == "cartesian":
            return M
        rho = np.asarray(p, dtype=float)[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.stack([np.ones_like(rho)] * 3 + [1.0 / rho], -1)
        return M * s[..., :, None] * s[..., None, :]

    def meridional(self, p) -> np.ndarray:
        """(t, x1, x2) block: the whole tensor for n = 2, the (t, rho, z) block for axisymmetric."""
        return self.frame(p)[..., :3, :3]

    def covariant(self, p) -> np.ndarray:
        """Covariant frame components g_{jk}."""
        if self.cov_g is not None and self.coords == "cartesian":
            return np.asarray(self.cov_g(np.asarray(p, dtype=float)))
        return invert_metric(self.frame(p))

    def sqrt_abs_g(self, p) -> np.ndarray:
        """sqrt|det g_{jk}| in the metric's coordinates (includes rho for cylindrical)."""
        det = np.linalg.det(self.frame(p))
        base = 1.0 / np.sqrt(np.abs(det))
        if self.coords == "cylindrical":
            base = base * np.abs(np.asarray(p, dtype=float)[..., 0])
        return base

    def time_reversed(self) -> "StationaryMetric":
        """Metric with g^{0j} -> -g^{0j} (black and white holes swap)."""
        flip = np.ones(self.dim + 1)
        flip[0] = -1.0
        S = np.outer(flip, flip)
        inner = self.inv_g
        return StationaryMetric(self.dim, lambda p: inner(p) * S, self.coords,
                                self.name + "~reversed")


# ---------------------------------------------------------------------------
# generic linear algebra


def invert_metric(M) -> np.ndarray:
    """Invert a (stack of) symmetric matrices, refusing near-singular input."""
    M = np.asarray(M, dtype=float)
    det = np.linalg.det(M)
    if np.any(~np.isfinite(det)) or np.any(np.abs(det) <= 1e-14):
        raise SingularMetricError(det)
    X = np.linalg.inv(M)
    X = 0.5 * (X + np.swapaxes(X, -1, -2))
    eye = np.eye(M.shape[-1])
    res = np.max(np.abs(M @ X - eye))
    if res > 1e-10:
        # one step of iterative refinement before giving up
        X = X + X @ (eye - M @ X)
        res = np.max(np.abs(M @ X - eye))
        if res > 1e-10:
            raise SingularMetricError(det)
    return X


def signature_check(g, p=None, cutoff: float = 1e-10) -> str:
    """Classify the eigenvalue signs of g^{jk}(p), or of a raw matrix when ``p`` is None."""
    M = g.frame(p) if isinstance(g, StationaryMetric) else np.asarray(g, dtype=float)
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    if np.min(np.abs(ev)) < cutoff:
        return "degenerate"
    if M.shape[0] > 1 and np.count_nonzero(ev > 0) == 1:
        return "lorentzian"
    return "invalid"


def minkowski(dim: int = 3, coords: str = "cartesian") -> StationaryMetric:
    eta = np.diag([1.0] + [-1.0] * dim)

    def inv(p):
        p = np.asarray(p, dtype=float)
        return np.broadcast_to(eta, p.shape[:-1] + eta.shape).copy()

    return StationaryMetric(dim, inv, coords, "minkowski", cov_g=inv)


# ---------------------------------------------------------------------------
# Kerr


def kerr_radius(p, a: float, warn: bool = True) -> np.ndarray:
    """Spheroidal radius r >= 0 solving r^4 - (R^2 - a^2) r^2 - a^2 z^2 = 0.

    ``p`` holds Cartesian (x, y, z) or meridional (rho, z) points; only R and
    z enter.  At the ring z = 0, R = a the root is r = 0 and a warning is issued.
    """
    p = np.asarray(p, dtype=float)
    R2 = np.sum(p * p, axis=-1)
    z = p[..., -1]
    q = R2 - a * a
    disc = np.sqrt(q * q + 4 * a * a * z * z)
    with np.errstate(divide="ignore", invalid="ignore"):
        # q + disc cancels when q < 0; use the conjugate form there
        r2 = np.where(q >= 0, 0.5 * (q + disc), 2 * a * a * z * z / (disc - q))
    r2 = np.where(np.isfinite(r2), r2, 0.0)
    r = np.sqrt(np.maximum(r2, 0.0))
    if warn and np.any((z == 0) & (np.abs(R2 - a * a) <= 1e-14 * max(1.0, a * a)) & (a > 0)):
        warnings.warn("kerr_radius evaluated on the ring singularity z=0, R=a; returning r=0",
                      RuntimeWarning, stacklevel=2)
    return r


def _kerr_profile(r, z, m, a, rho=None):
    """f = 2 m r^3 / (r^4 + a^2 z^2); tends to 0 on the open disc r = 0, rho < a."""
    zero = r <= 0
    if np.any(zero):
        ring = zero if rho is None else zero & (np.abs(rho) >= a * (1 - 1e-12))
        if a == 0 or np.any(ring):
            raise MetricDomainError("Kerr metric evaluated at the r = 0 singularity")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(zero, 0.0, 2 * m * r ** 3 / (r ** 4 + a * a * z * z))


def _safe_div(x, y):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(y > 0, x / np.where(y > 0, y, 1.0), 0.0)


def kerr_null_vector_cyl(p, params: KerrParams):
    """(f, l) with l the frame null vector (-1, r rho/(r^2+a^2), z/r, -a rho/(r^2+a^2))."""
    p = np.asarray(p, dtype=float)
    m, a = params.m, params.a
    rho, z = p[..., 0], p[..., 1]
    r = kerr_radius(p, a, warn=False)
    f = _kerr_profile(r, z, m, a, rho)
    s = r * r + a * a
    l = np.stack([-np.ones_like(r), r * rho / s, _safe_div(z, r), -a * rho / s], -1)
    return f, l


def build_kerr(params: KerrParams, coords: str = "cylindrical") -> StationaryMetric:
    """Kerr inverse metric in Kerr-Schild form, xi + f m m^T."""
    m, a = params.m, params.a
    if coords == "cylindrical":
        xi = np.diag([1.0, -1.0, -1.0, -1.0])

        def inv(p):
            f, l = kerr_null_vector_cyl(p, params)
            return xi + f[..., None, None] * l[..., :, None] * l[..., None, :]

        def v0(p):
            f, _ = kerr_null_vector_cyl(p, params)
            return -np.sqrt(f)

        def v(p):
            f, l = kerr_null_vector_cyl(p, params)
            return np.sqrt(f)[..., None] * l[..., 1:]

        flow = FlowForm(3, v, v0, "cylindrical")
        return StationaryMetric(3, inv, "cylindrical", f"kerr(m={m:g},a={a:g})", flow=flow,
                                kernel=(0, (m, a)))
    if coords != "cartesian":
        raise ValueError(coords)
    eta = np.diag([1.0, -1.0, -1.0, -1.0])

    def lvec(p):
        p = np.asarray(p, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        r = kerr_radius(p, a, warn=False)
        f = _kerr_profile(r, z, m, a, np.hypot(x, y))
        s = r * r + a * a
        return f, np.stack([np.ones_like(r), (r * x + a * y) / s, (r * y - a * x) / s,
                            _safe_div(z, r)], -1)

    def inv(p):
        f, k = lvec(p)
        k = k.copy()
        k[..., 0] = -1.0
        return eta + f[..., None, None] * k[..., :, None] * k[..., None, :]

    def cov(p):
        f, k = lvec(p)
        return eta - f[..., None, None] * k[..., :, None] * k[..., None, :]

    return StationaryMetric(3, inv, "cartesian", f"kerr(m={m:g},a={a:g})", cov_g=cov)


def schwarzschild_covariant(p, m: float) -> np.ndarray:
    """Covariant Schwarzschild tensor in the Cartesian Kerr-Schild-type chart."""
    p = np.asarray(p, dtype=float)
    R = np.linalg.norm(p, axis=-1)
    n = p / R[..., None]
    c = 2 * m / R
    out = np.zeros(p.shape[:-1] + (4, 4))
    out[..., 0, 0] = 1 - c
    out[..., 0, 1:] = -c[..., None] * n
    out[..., 1:, 0] = -c[..., None] * n
    out[..., 1:, 1:] = -np.eye(3) - c[..., None, None] * n[..., :, None] * n[..., None, :]
    return out


# ---------------------------------------------------------------------------
# media


def _metric_from_covariant(cov, dim, coords, name, flow=None) -> StationaryMetric:
    def inv(p):
        return invert_metric(cov(p))

    return StationaryMetric(dim, inv, coords, name, flow=flow,
                            cov_g=cov if coords == "cartesian" else None)


def _field(fun, p, width=None):
    out = np.asarray(fun(p), dtype=float)
    if width is not None and out.shape[-1] < width:
        pad = np.zeros(out.shape[:-1] + (width - out.shape[-1],))
        out = np.concatenate([out, pad], axis=-1)
    return out


def _scalar(fun, p):
    p = np.asarray(p, dtype=float)
    return np.broadcast_to(np.asarray(fun(p), dtype=float), p.shape[:-1])


def build_gordon(n_field, w_field, dim: int = 3, coords: str = "cartesian") -> StationaryMetric:
    """Gordon optical metric g_{jk} = eta_{jk} + (n^-2 - 1) u_j u_k of a moving dielectric.

    ``w_field`` gives the medium 3-velocity (frame components for cylindrical
    points; missing trailing components are zero).
    """

    def cov(p):
        p = np.asarray(p, dtype=float)
        n = _scalar(n_field, p)
        w = _field(w_field, p, dim)
        if np.any(n < 1):
            raise ValueError("refraction index must be >= 1")
        w2 = np.sum(w * w, axis=-1)
        if np.any(w2 >= 1):
            raise HyperbolicityError("medium speed |w| >= 1")
        gam = 1 / np.sqrt(1 - w2)
        u = np.concatenate([gam[..., None], -gam[..., None] * w], axis=-1)
        eta = np.diag([1.0] + [-1.0] * dim)
        return eta + (n ** -2 - 1)[..., None, None] * u[..., :, None] * u[..., None, :]

    return _metric_from_covariant(cov, dim, coords, "gordon")


def build_acoustic(rho, c, v, dim: int = 3, coords: str = "cartesian") -> StationaryMetric:
    """Acoustic metric of a moving fluid with density ``rho``, sound speed ``c``, flow ``v``."""

    def cov(p):
        p = np.asarray(p, dtype=float)
        rr = _scalar(rho, p)
        cc = _scalar(c, p)
        if np.any(rr <= 0) or np.any(cc <= 0):
            raise ValueError("density and sound speed must be positive")
        vv = _field(v, p, dim)
        k = rr / cc
        out = np.zeros(p.shape[:-1] + (dim + 1, dim + 1))
        out[..., 0, 0] = k * (cc * cc - np.sum(vv * vv, axis=-1))
        out[..., 0, 1:] = k[..., None] * vv
        out[..., 1:, 0] = k[..., None] * vv
        out[..., 1:, 1:] = -k[..., None, None] * np.eye(dim)
        return out

    return _metric_from_covariant(cov, dim, coords, "acoustic")


def build_flow_metric(f: FlowForm, name: str = "flow") -> StationaryMetric:
    """Inverse metric generated by a flow field (see ``FlowForm`` for both conventions)."""
    n = f.dim

    if f.v0 is None:
        def inv(p):
            v = f.velocity(p)
            out = np.empty(v.shape[:-1] + (n + 1, n + 1))
            out[..., 0, 0] = 1.0
            out[..., 0, 1:] = v
            out[..., 1:, 0] = v
            out[..., 1:, 1:] = -np.eye(n) + v[..., :, None] * v[..., None, :]
            return out
    else:
        xi = np.diag([1.0] + [-1.0] * n)

        def inv(p):
            v = f.velocity(p)
            v0 = _scalar(f.v0, np.asarray(p, dtype=float))
            V = np.concatenate([v0[..., None], v], axis=-1)
            return xi + V[..., :, None] * V[..., None, :]

    return StationaryMetric(n, inv, f.coords, name, flow=f)


# ---------------------------------------------------------------------------
# named flow fields


def radial_drain(r0: float, c: float = 1.0, power: float = 1.0, coords: str = "cartesian"):
    """Inward flow v = -c (r0/r)^power r_hat; |v| = c on the sphere r = r0."""

    def v(p):
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        return -c * (r0 / r)[..., None] ** power * p / r[..., None]

    return v


def rigid_rotation(omega: float, coords: str = "cartesian"):
    """Rotation about the z axis; in cylindrical frame components v_phi = omega rho."""

    def v(p):
        p = np.asarray(p, dtype=float)
        if coords == "cylindrical":
            z = np.zeros(p.shape[:-1])
            return np.stack([z, z, omega * p[..., 0]], -1)
        out = np.zeros_like(p)
        out[..., 0] = -omega * p[..., 1]
        out[..., 1] = omega * p[..., 0]
        return out

    return v


def uniform_flow(vec):
    vec = np.asarray(vec, dtype=float)

    def v(p):
        p = np.asarray(p, dtype=float)
        return np.broadcast_to(vec, p.shape[:-1] + vec.shape).copy()

    return v


def swirling_drain(amp: float, power: float = 1.5, aniso: float = 0.0, omega: float = 0.4,
                   swirl_power: float = 2.0, core: float = 0.1):
    """Axisymmetric sink with swirl, in cylindrical frame components.

    The meridional part is -amp (1 + aniso (z/R)^2) R^-power R_hat and the
    swirl is v_phi = omega rho R^-swirl_power, with R smoothed by ``core``
    near the origin.  The swirl vanishes on the axis, so |v| = 1 and |w| = 1
    touch there.
    """

    def v(p):
        p = np.asarray(p, dtype=float)
        rho, z = p[..., 0], p[..., 1]
        R = np.sqrt(rho * rho + z * z + core * core)
        s = amp * (1 + aniso * (z / R) ** 2) * R ** (-power)
        return np.stack([-s * rho / R, -s * z / R, omega * rho * R ** (-swirl_power)], -1)

    return v


def random_swirling_drain(seed: int) -> StationaryMetric:
    """Flow-form metric (g^{00} = 1 convention) from a seeded draw of swirling_drain parameters."""
    rng = np.random.default_rng(seed)
    prm = dict(amp=float(rng.uniform(1.2, 2.0)), power=float(rng.uniform(1.0, 2.0)),
               aniso=float(rng.uniform(-0.3, 0.3)), omega=float(rng.uniform(0.2, 0.6)),
               swirl_power=float(rng.uniform(1.5, 2.5)))
    name = "swirling_drain(" + ",".join(f"{k}={v:.4g}" for k, v in prm.items()) + ")"
    return build_flow_metric(FlowForm(3, swirling_drain(**prm), coords="cylindrical"), name)
