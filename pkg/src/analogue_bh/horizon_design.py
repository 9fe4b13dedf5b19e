"""Metrics with prescribed horizons and bump perturbations that destroy them.

The eikonal equation |grad a|^2 = a with a = 1 on a curve is solved in closed
form: with b = 2 sqrt(a) it becomes |grad b| = 1, b = 2 on the curve, so
b = 2 + d with d the signed distance, and a = (1 + d/2)^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .curves import GeometryError, ParametricCurve, PlaneCurve, hausdorff
from .metric_core import FlowForm, StationaryMetric, build_flow_metric
from . import jit_kernels as jk


class ConstructionError(RuntimeError):
    """The blended velocity field violates the |v| < 1 / |v| > 1 split."""


class FamilyError(ValueError):
    """A curve family jumps between consecutive parameter values."""


class PolarDecompositionError(ValueError):
    """The meridional velocity vanishes inside the bump support."""


# ---------------------------------------------------------------------------
# smooth building blocks


def _psi(s):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    a, b = _psi(s), _psi(1.0 - s)
    return a / (a + b)


def bump_profile(s):
    """exp(1 - 1/(1 - s^2)) for |s| < 1, else 0; peak value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        val = np.exp(1.0 - 1.0 / np.where(inside, 1.0 - s * s, 1.0))
    val = np.where(inside, val, 0.0)
    return np.where(val < 1e-300, 0.0, val)


def _as_param(curve) -> ParametricCurve:
    if isinstance(curve, ParametricCurve):
        return curve
    if isinstance(curve, PlaneCurve):
        return curve.spline()
    raise TypeError("expected a ParametricCurve or PlaneCurve")


# ---------------------------------------------------------------------------
# eikonal


@dataclass(frozen=True)
class EikonalField:
    """a = (1 + d/2)^2 with d the signed distance, positive on the a > 1 side.

    ``orientation="inward"``: a > 1 inside the curve.  ``"outward"``: a > 1 outside.
    """

    base_curve: ParametricCurve
    orientation: str = "inward"

    def __post_init__(self):
        if self.orientation not in ("inward", "outward"):
            raise ValueError("orientation must be 'inward' or 'outward'")

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation == "inward" else -1.0

    def distance(self, p, strict: bool = True):
        d_in, g_in = self.base_curve.signed_distance(p, strict=strict)
        return self.sign * d_in, self.sign * g_in

    def __call__(self, p, strict: bool = True):
        d, gd = self.distance(p, strict)
        k = 1.0 + 0.5 * d
        return k * k, k[..., None] * gd

    def a(self, p):
        return self(p)[0]

    def grad_a(self, p):
        return self(p)[1]


def eikonal_solution(curve, p, orientation: str = "inward"):
    """(a, grad a) at ``p``; raises ``AmbiguityError`` beyond the medial axis."""
    return EikonalField(_as_param(curve), orientation)(np.asarray(p, dtype=float))


# ---------------------------------------------------------------------------
# prescribed-horizon construction


@dataclass(frozen=True)
class HorizonDesign:
    curve: ParametricCurve
    tube: float
    blend: float
    far_amplitude: float
    center: np.ndarray
    support: Optional[tuple]


def _meridional_velocity(design: HorizonDesign, P):
    """Velocity in the plane of the curve, black-hole oriented (inward)."""
    P = np.asarray(P, dtype=float)
    d, gd = design.curve.signed_distance(P, strict=False)
    T, B = design.tube, design.blend
    xc = P - design.center
    r = np.maximum(np.linalg.norm(xc, axis=-1), 1e-300)
    radial_in = -xc / r[..., None]
    ad = np.abs(d)
    chi = 1.0 - smooth_step((ad - T) / B)
    # outside: eikonal field blended into a decaying radial inflow
    far = design.far_amplitude / r
    if design.support is not None:
        r1, r2 = design.support
        far = far * (1.0 - smooth_step((r - r1) / (r2 - r1)))
    v_out = chi[..., None] * (1.0 + 0.5 * d)[..., None] * gd + \
        (1.0 - chi)[..., None] * far[..., None] * radial_in
    # inside: magnitude 1 + q/2 with q saturating smoothly, direction blended to radial
    q = chi * d + (1.0 - chi) * (T + B)
    direc = chi[..., None] * gd + (1.0 - chi)[..., None] * radial_in
    nd = np.linalg.norm(direc, axis=-1)
    direc = direc / np.where(nd > 0, nd, 1.0)[..., None]
    v_in = (1.0 + 0.5 * q)[..., None] * direc
    return np.where((d >= 0)[..., None], v_in, v_out)


def build_horizon_metric(surface, dim: int = 2, coords: Optional[str] = None,
                         tube: Optional[float] = None, blend: Optional[float] = None,
                         far_amplitude: Optional[float] = None,
                         support: Optional[tuple] = None,
                         check: bool = True) -> StationaryMetric:
    """Unit-mode flow metric whose ergosphere and horizon are the given closed curve.

    ``dim=2``: the curve lives in the Cartesian plane.  ``dim=3``: it is the
    meridian of a surface of revolution about the z axis (it must be even in
    rho); ``coords`` selects cylindrical (default) or Cartesian points.
    Near the curve v = grad a (a > 1 inside); beyond the tube v blends into the
    inflow -A x_hat/|x|, optionally cut off smoothly between ``support`` radii.
    """
    curve = _as_param(surface)
    if coords is None:
        coords = "cartesian" if dim == 2 else "cylindrical"
    if dim == 3:
        samp = curve.sample(256)
        if not (curve.symmetric or samp.is_even(1e-6)):
            raise GeometryError("surface of revolution needs a meridian even in rho")
    width = min(curve.inradius(), curve.min_radius())
    tube = 0.2 * width if tube is None else float(tube)
    blend = 0.2 * width if blend is None else float(blend)
    if tube + blend >= curve.min_radius():
        raise ConstructionError("tube + blend reaches the medial axis of the curve")
    center = curve.centroid()
    if dim == 3:
        center = np.array([0.0, center[1]])
    if far_amplitude is None:
        far_amplitude = 0.9 * curve.inradius() * (1 - 0.5 * tube)
    design = HorizonDesign(curve, tube, blend, float(far_amplitude), center, support)

    if dim == 2 or coords == "cylindrical":
        def v(p):
            return _meridional_velocity(design, p)
    else:
        def v(p):
            p = np.asarray(p, dtype=float)
            rho = np.hypot(p[..., 0], p[..., 1])
            w = _meridional_velocity(design, np.stack([rho, p[..., 2]], -1))
            with np.errstate(divide="ignore", invalid="ignore"):
                cx = np.where(rho > 0, p[..., 0] / rho, 0.0)
                cy = np.where(rho > 0, p[..., 1] / rho, 0.0)
            return np.stack([w[..., 0] * cx, w[..., 0] * cy, w[..., 1]], -1)

    flow = FlowForm(dim if coords == "cartesian" else 3, v, None, coords)
    g = build_flow_metric(flow, name=f"horizon[{curve.name}]")
    if check:
        _check_design(g, design, dim, coords)
    return g


def _check_design(g, design: HorizonDesign, dim, coords):
    """|v| < 1 outside and > 1 inside on rings around the curve."""
    curve = design.curve
    t = np.linspace(0, 2 * np.pi, 181)[:-1]
    foot = curve.x(t)
    d1 = curve.dx(t)
    tang = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    nout = np.stack([tang[:, 1], -tang[:, 0]], -1) * (1.0 if curve.ccw else -1.0)
    offsets = np.array([0.05, 0.5, 1.0, 1.5, 3.0]) * (design.tube + design.blend)
    bad = []
    for sgn in (-1.0, 1.0):
        for off in offsets:
            P = foot + sgn * off * nout
            if dim == 3 and coords == "cylindrical":
                P = P[P[:, 0] >= 0]
            w = _meridional_velocity(design, P)
            speed = np.linalg.norm(w, axis=-1)
            viol = speed >= 1 if sgn > 0 else speed <= 1
            if viol.any():
                bad.append((sgn * off, P[viol][:3].tolist()))
    if bad:
        raise ConstructionError(f"blended flow violates the speed split near {bad}")


def verify_horizon_metric(g: StationaryMetric, surface, n: int = 400) -> dict:
    """Characteristic residual, |Delta|, flux class and eikonal invariant on the surface."""
    from .characteristics import characteristic_residual, surface_residual
    from .ergosphere import delta

    curve = _as_param(surface)
    samp = curve.sample(n)
    if g.coords == "cartesian" and g.dim == 3:
        # revolve the meridian samples about the z axis
        phi = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        pts, nrm = [], []
        m = samp.points
        nn = samp.outward_normals()
        keep = m[:, 0] >= 0
        for ph in phi:
            c, s = np.cos(ph), np.sin(ph)
            pts.append(np.stack([m[keep, 0] * c, m[keep, 0] * s, m[keep, 1]], -1))
            nrm.append(np.stack([nn[keep, 0] * c, nn[keep, 0] * s, nn[keep, 1]], -1))
        P, N = np.vstack(pts), np.vstack(nrm)
        rep = surface_residual(g, P, N, tol=1e-6)
        dvals = delta(g, P)
        out_pts = P + 1e-3 * N
    else:
        rep = characteristic_residual(g, samp, tol=1e-6)
        P = samp.loop
        dvals = delta(g, P)
        out_pts = P + 1e-3 * samp.outward_normals()
    eik = EikonalField(curve, "inward")
    rng = np.random.default_rng(0)
    tt = rng.uniform(0, 2 * np.pi, 200)
    dd = rng.uniform(-0.9, 0.9, 200) * 0.2 * min(curve.inradius(), curve.min_radius())
    foot = curve.x(tt)
    d1 = curve.dx(tt)
    tang = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    nout = np.stack([tang[:, 1], -tang[:, 0]], -1) * (1.0 if curve.ccw else -1.0)
    Q = foot - dd[:, None] * nout
    a, ga = eik(Q)
    eik_res = float(np.max(np.abs(np.sum(ga * ga, axis=-1) - a)))
    on_res = float(np.max(np.abs(eik(curve.x(tt))[0] - 1.0)))
    from .metric_core import signature_check
    sig = {signature_check(g, q) for q in out_pts[:: max(1, len(out_pts) // 50)]}
    return {
        "residual": rep.residual,
        "classification": rep.classification,
        "max_abs_delta": float(np.max(np.abs(dvals))),
        "min_delta_outside": float(np.min(delta(g, out_pts))),
        "eikonal_residual": eik_res,
        "a_on_curve_residual": on_res,
        "signature_outside": sorted(sig),
    }


# ---------------------------------------------------------------------------
# smooth families of horizons


def dilated_family(curve: ParametricCurve, scale_rho: float = 1.0, scale_z: float = 1.0):
    """eps -> the curve stretched by (1 + eps * scale) about its centre, axis-wise."""
    c = curve.centroid() * np.array([0.0, 1.0]) if curve.symmetric else curve.centroid()
    S = np.array([scale_rho, scale_z])

    def family(eps: float) -> ParametricCurve:
        f = 1.0 + eps * S
        return ParametricCurve(lambda t: c + f * (curve.x(t) - c), lambda t: f * curve.dx(t),
                               lambda t: f * curve.ddx(t), name=f"{curve.name}*(1+{eps:g})",
                               symmetric=curve.symmetric)

    return family


def check_family_smoothness(psi_family: Callable, eps_values: Sequence[float],
                            jump_factor: float = 10.0, n: int = 400):
    """Raise ``FamilyError`` when consecutive members jump much more than the typical rate."""
    eps = np.asarray(eps_values, dtype=float)
    curves = [psi_family(e).sample(n).points for e in eps]
    rates = np.array([hausdorff(curves[i], curves[i + 1]) / abs(eps[i + 1] - eps[i])
                      for i in range(len(eps) - 1)])
    ref = np.median(rates)
    if np.any(rates > jump_factor * ref + 1e-9):
        i = int(np.argmax(rates))
        raise FamilyError(f"curve family jumps between eps={eps[i]:g} and eps={eps[i + 1]:g}")
    return rates


def family_with_horizons(psi_family: Callable[[float], ParametricCurve], base: StationaryMetric,
                         tube: Optional[float] = None, blend: Optional[float] = None):
    """eps -> metric whose restricted ergosphere and horizon near the base horizon is psi(eps).

    The meridional velocity is replaced near psi(0) by
    grad a_eps + E d_eps, with E = (w_base - grad a_0) / d_0, blended back to the
    base flow; the time and azimuthal components are kept from the base.  At
    eps = 0 this returns the base flow exactly.
    """
    if base.flow is None:
        raise ValueError("base metric must carry its flow form")
    flow = base.flow
    psi0 = _as_param(psi_family(0.0))
    t = np.linspace(0, 2 * np.pi, 201)[:-1]
    d1 = psi0.dx(t)
    tang = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    nout = np.stack([tang[:, 1], -tang[:, 0]], -1) * (1.0 if psi0.ccw else -1.0)
    foot = psi0.x(t)
    if flow.coords == "cylindrical":
        keep = foot[:, 0] > 0
        foot, nout = foot[keep], nout[keep]
    wn = np.einsum("ij,ij->i", flow.velocity(foot)[..., :2], nout)
    if np.all(np.abs(wn - 1) < 1e-6):
        orientation = "outward"
    elif np.all(np.abs(wn + 1) < 1e-6):
        orientation = "inward"
    else:
        raise ValueError("psi_family(0) is not a characteristic restricted ergosphere of base")
    width = min(psi0.inradius(), psi0.min_radius())
    T = 0.2 * width if tube is None else tube
    B = 0.2 * width if blend is None else blend
    eik0 = EikonalField(psi0, orientation)
    d_switch = 1e-5 * width
    h_fd = 1e-3 * width

    def E_field(P):
        d0, g0 = eik0.distance(P, strict=False)
        k0 = 1.0 + 0.5 * d0
        wb = flow.velocity(P)[..., :2]
        e = wb - k0[..., None] * g0
        small = np.abs(d0) < d_switch
        with np.errstate(divide="ignore", invalid="ignore"):
            E = e / np.where(small, 1.0, d0)[..., None]
        if np.any(small):
            # removable singularity: central difference across the curve
            Ps = P[small]
            foot = Ps - d0[small][..., None] * g0[small]
            out = []
            for sgn in (1.0, -1.0):
                Q = foot + sgn * h_fd * g0[small]
                dq, gq = eik0.distance(Q, strict=False)
                out.append(flow.velocity(Q)[..., :2] - (1.0 + 0.5 * dq)[..., None] * gq)
            E[small] = (out[0] - out[1]) / (2 * h_fd)
        return E, d0

    def make(eps: float) -> StationaryMetric:
        psi = _as_param(psi_family(eps))
        gap = hausdorff(psi.sample(400).points, psi0.sample(400).points)
        if gap >= T:
            raise FamilyError(f"psi({eps:g}) lies {gap:.3g} from psi(0), beyond the tube {T:.3g}")
        eik = EikonalField(psi, orientation)

        def v(P):
            P = np.asarray(P, dtype=float)
            wb = flow.velocity(P)
            E, d0 = E_field(P)
            de, ge = eik.distance(P, strict=False)
            ke = 1.0 + 0.5 * de
            near = ke[..., None] * ge + E * de[..., None]
            chi = 1.0 - smooth_step((np.abs(d0) - T) / B)
            out = wb.copy()
            out[..., :2] = chi[..., None] * near + (1.0 - chi)[..., None] * wb[..., :2]
            if eps == 0.0:
                out[..., :2] = np.where(np.isfinite(out[..., :2]), out[..., :2], wb[..., :2])
            return out

        fam_flow = FlowForm(flow.dim, v, flow.v0, flow.coords)
        return build_flow_metric(fam_flow, name=f"{base.name}|family(eps={eps:g})")

    return make


# ---------------------------------------------------------------------------
# bump perturbation


@dataclass(frozen=True)
class BumpSpec:
    center: tuple
    radius: float
    epsilon: float
    profile: str = "mollifier"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")
        if self.profile != "mollifier":
            raise ValueError("only the exp(-1/(1-s^2)) mollifier profile is provided")

    def weight(self, P):
        P = np.asarray(P, dtype=float)
        s = np.linalg.norm(P - np.asarray(self.center, dtype=float), axis=-1) / self.radius
        return bump_profile(s)


def perturb_metric_bump(g: StationaryMetric, spec: BumpSpec) -> StationaryMetric:
    """Rotate the meridional velocity by eps * bump inside U0, keeping its length.

    Writing (v1, v2) = beta (cos alpha, sin alpha), the result has the same
    beta (so Delta_1 is unchanged) and alpha + eps * profile.
    """
    if g.flow is None:
        raise ValueError("perturbation needs a flow-form metric")
    flow = g.flow
    c = np.asarray(spec.center, dtype=float)
    if flow.coords == "cylindrical" and spec.radius >= c[0]:
        raise ValueError("bump support must stay off the symmetry axis")
    # polar decomposition must exist on U0
    ang = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    rad = np.linspace(0, 1, 9)[:, None] * spec.radius
    probe = c + np.stack([rad * np.cos(ang), rad * np.sin(ang)], -1).reshape(-1, 2)
    beta = np.linalg.norm(flow.velocity(probe)[..., :2], axis=-1)
    if np.min(beta) <= 1e-12:
        raise PolarDecompositionError("meridional velocity vanishes inside the bump support")
    if spec.epsilon == 0.0:
        return g

    def v(P):
        P = np.asarray(P, dtype=float)
        w = flow.velocity(P).copy()
        q = P.copy()
        if flow.coords == "cylindrical":
            q[..., 0] = np.abs(q[..., 0])
        th = spec.epsilon * spec.weight(q)
        if flow.coords == "cylindrical":
            # the frame rho component is odd under reflection, so is the rotation angle
            th = np.where(P[..., 0] < 0, -th, th)
        cs, sn = np.cos(th), np.sin(th)
        w1, w2 = w[..., 0].copy(), w[..., 1].copy()
        w[..., 0] = cs * w1 - sn * w2
        w[..., 1] = sn * w1 + cs * w2
        return w

    new_flow = FlowForm(flow.dim, v, flow.v0, flow.coords)
    kernel = None
    if g.kernel is not None and g.kernel[0] == jk.KERR:
        m, a = g.kernel[1]
        kernel = (jk.KERR_BUMP, (m, a, spec.epsilon, c[0], c[1], spec.radius))
    out = build_flow_metric(new_flow, name=f"{g.name}+bump(eps={spec.epsilon:g})")
    return StationaryMetric(out.dim, out.inv_g, out.coords, out.name, out.flow, kernel=kernel)
