import math

import numpy as np
import pytest

from analogue_bh.characteristics import characteristic_residual, find_closed_characteristic
from analogue_bh.curves import AmbiguityError, ParametricCurve
from analogue_bh.ergosphere import delta, delta1, kerr_horizon_curve, kerr_horizon_radii, trace_level_set
from analogue_bh.horizon_design import (
    BumpSpec, ConstructionError, EikonalField, FamilyError, PolarDecompositionError,
    build_horizon_metric, bump_profile, check_family_smoothness, dilated_family,
    eikonal_solution, family_with_horizons, perturb_metric_bump, verify_horizon_metric,
)
from analogue_bh.metric_core import KerrParams, build_kerr, minkowski, signature_check

PRM = KerrParams(1.0, 0.5)
RP, RM = kerr_horizon_radii(PRM)
RHO_EQ = math.sqrt(2 * PRM.m * RP)


def random_curves(seed, n=5):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        if k % 2 == 0:
            out.append(ParametricCurve.ellipse(rng.uniform(0.8, 2.0), rng.uniform(0.8, 2.0)))
        else:
            out.append(ParametricCurve.perturbed_circle(rng.uniform(0.8, 2.0), rng.uniform(0.02, 0.12),
                                                        int(rng.integers(2, 5))))
    return out


# --- eikonal -------------------------------------------------------------------


def test_eikonal_on_curve():
    c = ParametricCurve.circle(2.0)
    a, ga = eikonal_solution(c, np.array([[2.0, 0.0]]))
    assert a[0] == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(ga[0], [-1.0, 0.0], atol=1e-14)  # unit normal, toward a > 1


def test_eikonal_outside_value():
    c = ParametricCurve.circle(2.0)
    a, _ = eikonal_solution(c, np.array([[0.0, 2.5]]))  # signed distance -0.5
    assert a[0] == pytest.approx(0.5625, abs=1e-14)


def test_eikonal_deep_inside():
    c = ParametricCurve.circle(3.0)
    a, ga = eikonal_solution(c, np.array([[1.0, 0.0]]))  # signed distance +2
    assert a[0] == pytest.approx(4.0, abs=1e-13)
    assert np.linalg.norm(ga[0]) == pytest.approx(2.0, abs=1e-13)


def test_eikonal_beyond_medial_axis_raises():
    with pytest.raises(AmbiguityError):
        eikonal_solution(ParametricCurve.circle(1.0), np.array([[0.0, 0.0]]))


def test_eikonal_gradient_by_finite_differences():
    c = ParametricCurve.ellipse(1.5, 1.0)
    p = np.array([[1.2, 0.3], [0.4, -1.1], [1.7, 0.2]])
    _, ga = eikonal_solution(c, p)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (eikonal_solution(c, p + e)[0] - eikonal_solution(c, p - e)[0]) / (2 * h)
        np.testing.assert_allclose(fd, ga[:, k], atol=1e-7)


@pytest.mark.parametrize("curve", random_curves(0))
def test_eikonal_invariants_random_curves(curve):
    rng = np.random.default_rng(1)
    tube = 0.5 * min(curve.inradius(), curve.min_radius())
    t = rng.uniform(0, 2 * np.pi, 1000)
    foot = curve.x(t)
    tan = curve.dx(t)
    tan /= np.linalg.norm(tan, axis=1, keepdims=True)
    n_in = np.stack([-tan[:, 1], tan[:, 0]], -1) * (1.0 if curve.ccw else -1.0)
    d = rng.uniform(-tube, tube, 1000)
    P = foot + d[:, None] * n_in
    f = EikonalField(curve, "inward")
    a, ga = f(P)
    assert np.max(np.abs(np.sum(ga * ga, axis=1) - a)) < 1e-8
    np.testing.assert_allclose(a, (1 + d / 2) ** 2, atol=1e-9)
    a0, ga0 = f(foot)
    assert np.max(np.abs(a0 - 1)) < 1e-9
    assert np.all(np.einsum("ij,ij->i", ga0, n_in) > 0)


def test_outward_orientation_flips_sign():
    c = ParametricCurve.circle(2.0)
    a_in = EikonalField(c, "inward").a(np.array([[1.5, 0.0]]))
    a_out = EikonalField(c, "outward").a(np.array([[1.5, 0.0]]))
    assert a_in[0] > 1 > a_out[0]


# --- prescribed horizons ----------------------------------------------------------


def test_sphere_design():
    sphere = ParametricCurve.circle(2.0)
    g = build_horizon_metric(sphere, dim=3)
    v = verify_horizon_metric(g, sphere)
    assert v["residual"] < 1e-8
    assert v["max_abs_delta"] < 1e-8
    assert v["classification"] == "black_hole"
    assert v["eikonal_residual"] < 1e-8


def test_sphere_design_cartesian_points():
    g = build_horizon_metric(ParametricCurve.circle(2.0), dim=3, coords="cartesian")
    # on the sphere the flow is the unit inward radial vector
    p = np.array([2.0 / math.sqrt(3)] * 3)
    M = g.inv_g(p)
    np.testing.assert_allclose(M[0, 1:], -p / 2.0, atol=1e-10)
    assert abs(delta(g, p)) < 1e-10


def test_unit_circle_is_ergosphere():
    c = ParametricCurve.circle(1.0)
    g = build_horizon_metric(c, dim=2)
    P = c.sample(200).points
    assert np.max(np.abs(delta(g, P))) < 1e-8
    assert np.all(delta(g, 1.05 * P) > 0)
    assert np.all(delta(g, 0.95 * P) < 0)


@pytest.mark.parametrize("curve", random_curves(2) + [ParametricCurve.ellipse(1.5, 1.0)])
def test_planar_design_random_curves(curve):
    g = build_horizon_metric(curve, dim=2)
    v = verify_horizon_metric(g, curve)
    assert v["residual"] < 1e-8 and v["max_abs_delta"] < 1e-8
    assert v["classification"] == "black_hole"
    assert v["min_delta_outside"] > 0
    for s in (1.1, 1.5, 3.0):
        p = s * curve.x(np.array([0.4]))
        assert signature_check(g, p[0]) == "lorentzian"


def test_design_rejects_odd_meridian():
    with pytest.raises(Exception):
        build_horizon_metric(ParametricCurve.perturbed_circle(1.0, 0.1, 3), dim=3)


def test_design_rejects_oversized_tube():
    with pytest.raises(ConstructionError):
        build_horizon_metric(ParametricCurve.circle(1.0), dim=2, tube=0.6, blend=0.5)


# --- families ------------------------------------------------------------------


@pytest.fixture(scope="module")
def kerr():
    return build_kerr(PRM)


def test_family_at_zero_is_base(kerr):
    psi = dilated_family(kerr_horizon_curve(PRM), 1.0, 1.0)
    g0 = family_with_horizons(psi, kerr)(0.0)
    pts = kerr_horizon_curve(PRM).x(np.linspace(0.1, 3.0, 25)) * 1.02
    np.testing.assert_allclose(g0.frame(pts), kerr.frame(pts), atol=1e-9)


@pytest.mark.parametrize("which,eps_values", [("outer", (0.0, 0.025, 0.05, 0.1)),
                                               ("inner", (0.0, 0.005, 0.01))])
def test_dilated_families_are_horizons(kerr, which, eps_values):
    """The inner horizon is thin (semi-axis r_minus ~ 0.13), so its family moves less."""
    psi = dilated_family(kerr_horizon_curve(PRM, which), 1.0, 0.5)
    make = family_with_horizons(psi, kerr)
    for eps in eps_values:
        g = make(eps)
        c = psi(eps).sample(300)
        rep = characteristic_residual(g, c, tol=1e-7)
        assert rep.residual < 1e-7
        assert rep.classification in ("black_hole", "white_hole")
        assert np.max(np.abs(delta1(g, c.points))) < 1e-7


def test_family_is_lipschitz_in_eps(kerr):
    psi = dilated_family(kerr_horizon_curve(PRM), 1.0, 1.0)
    make = family_with_horizons(psi, kerr)
    probe = kerr_horizon_curve(PRM).x(np.linspace(0.2, 3.0, 15)) * 1.01
    base = make(0.05).frame(probe)
    ratios = []
    for de in (1e-2, 5e-3, 2.5e-3):
        ratios.append(np.max(np.abs(make(0.05 + de).frame(probe) - base)) / de)
    assert max(ratios) < 2 * min(ratios) + 1e-12


def test_family_smoothness_check_flags_jump():
    good = dilated_family(ParametricCurve.circle(1.0), 1.0, 1.0)
    check_family_smoothness(good, np.linspace(0, 0.1, 6))

    def jumpy(eps):
        return ParametricCurve.circle(1.0 + (0.5 if eps > 0.05 else 0.0) + eps)

    with pytest.raises(FamilyError):
        check_family_smoothness(jumpy, np.linspace(0, 0.1, 6))


def test_family_rejects_non_horizon_seed(kerr):
    psi = dilated_family(ParametricCurve.ellipse(2.5, 2.5), 1.0, 1.0)
    with pytest.raises(ValueError):
        family_with_horizons(psi, kerr)


# --- bump perturbation -------------------------------------------------------------


def test_bump_profile_is_compact():
    s = np.array([0.0, 0.5, 0.999, 1.0, 1.5])
    b = bump_profile(s)
    assert b[0] == pytest.approx(1.0)
    assert b[3] == 0.0 and b[4] == 0.0
    assert 0 < b[2] < 1e-200 or b[2] == 0.0


def test_zero_bump_returns_same_metric(kerr):
    assert perturb_metric_bump(kerr, BumpSpec((RHO_EQ, 0.0), 0.3, 0.0)) is kerr


@pytest.fixture(scope="module")
def bumped(kerr):
    return perturb_metric_bump(kerr, BumpSpec((RHO_EQ, 0.0), 0.3, 0.05))


def test_bump_preserves_delta1(kerr, bumped):
    R, Z = np.meshgrid(np.linspace(1e-3, 3, 121), np.linspace(-3, 3, 121), indexing="ij")
    P = np.stack([R, Z], -1)
    assert np.max(np.abs(delta1(bumped, P) - delta1(kerr, P))) < 1e-12


def test_bump_breaks_characteristic_condition_inside_only(kerr, bumped):
    c = kerr_horizon_curve(PRM).sample(800)
    rep = characteristic_residual(bumped, c)
    inside = np.hypot(np.abs(c.loop[:, 0]) - RHO_EQ, c.loop[:, 1]) < 0.3
    assert np.max(rep.residuals[inside]) > 1e-3
    assert np.max(rep.residuals[~inside]) < 1e-10


def test_bump_leaves_metric_unchanged_outside_support(kerr, bumped):
    from analogue_bh.metric_core import build_flow_metric
    pts = np.array([[0.5, 1.5], [RHO_EQ + 0.31, 0.0], [1.0, -1.0], [RHO_EQ, 0.35]])
    # bit-identical to the same flow form assembled without the bump
    np.testing.assert_array_equal(bumped.frame(pts), build_flow_metric(kerr.flow).frame(pts))
    np.testing.assert_allclose(bumped.frame(pts), kerr.frame(pts), atol=1e-14)


def test_bumped_kerr_has_no_closed_characteristic(bumped):
    res = find_closed_characteristic(bumped, (0.0, 3.0, -3.0, 3.0), n_seeds=64)
    assert not res.found
    assert len(res.certificate) >= 64
    assert all(c["event"] != "closed" for c in res.certificate)


def test_bump_on_axis_rejected(kerr):
    with pytest.raises(ValueError):
        perturb_metric_bump(kerr, BumpSpec((0.2, 0.0), 0.3, 0.05))


def test_bump_needs_nonvanishing_meridional_flow():
    from analogue_bh.metric_core import FlowForm, build_flow_metric
    still = build_flow_metric(FlowForm(2, lambda p: np.zeros(np.asarray(p).shape[:-1] + (2,))))
    with pytest.raises(PolarDecompositionError):
        perturb_metric_bump(still, BumpSpec((1.0, 0.0), 0.3, 0.05))


def test_bump_needs_flow_form():
    with pytest.raises(ValueError):
        perturb_metric_bump(minkowski(3, "cylindrical"), BumpSpec((1.0, 0.0), 0.3, 0.05))


def test_bumped_restricted_ergosphere_is_unchanged_curve(kerr, bumped):
    a = trace_level_set(lambda P: delta1(kerr, P), (0, 3, -3, 3), 128).curve
    b = trace_level_set(lambda P: delta1(bumped, P), (0, 3, -3, 3), 128).curve
    np.testing.assert_allclose(a.points, b.points, atol=1e-10)
