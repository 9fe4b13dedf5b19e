import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from analogue_bh.curves import ParametricCurve, hausdorff, polygon_area
from analogue_bh.ergosphere import (
    BranchRangeError, TopologyError, containment_check, delta, delta1, kerr_ergosphere_radius,
    kerr_horizon_curve, kerr_horizon_radii, trace_level_set,
)
from analogue_bh.metric_core import (
    ExtremalError, KerrParams, build_acoustic, build_kerr, kerr_radius, minkowski, radial_drain,
    random_swirling_drain,
)

KERR_SETS = [(1.0, 0.3), (1.0, 0.7), (2.0, 1.0)]
WIN = (0.0, 3.0, -3.0, 3.0)


def equatorial_rho(r, a):
    return math.sqrt(r * r + a * a)


def meridional_point(r, z, a):
    """(rho, z) on the spheroid of radius r: rho^2 = (r^2 + a^2)(1 - z^2 / r^2)."""
    return np.array([math.sqrt((r * r + a * a) * (1 - z * z / (r * r))), z])


# --- scalars ----------------------------------------------------------------


@pytest.mark.parametrize("dim,coords", [(2, "cartesian"), (3, "cartesian"), (3, "cylindrical")])
def test_delta_minkowski_is_one(dim, coords):
    g = minkowski(dim, coords)
    p = np.full(g.point_dim, 0.3)
    assert delta(g, p) == pytest.approx(1.0)


def test_delta1_minkowski_is_one():
    assert delta1(minkowski(3, "cylindrical"), np.array([0.7, -0.2])) == pytest.approx(1.0)


def test_delta_vanishes_on_kerr_equatorial_ergosphere():
    g = build_kerr(KerrParams(1.0, 0.5))
    p = np.array([equatorial_rho(2.0, 0.5), 0.0])  # r = 2m solves r^4 - 2 m r^3 = 0
    assert abs(delta(g, p)) < 1e-9


def test_delta_vanishes_where_acoustic_flow_is_sonic():
    one = lambda p: np.ones(np.asarray(p).shape[:-1])  # noqa: E731
    g = build_acoustic(one, one, radial_drain(1.0))
    assert abs(delta(g, np.array([0.0, 0.0, 1.0]))) < 1e-12
    assert delta(g, np.array([0.0, 0.0, 2.0])) > 0
    assert delta(g, np.array([0.0, 0.0, 0.5])) < 0


def test_delta1_kerr_horizon_equator():
    prm = KerrParams(1.0, 0.5)
    rp, _ = kerr_horizon_radii(prm)
    g = build_kerr(prm)
    assert abs(delta1(g, np.array([equatorial_rho(rp, 0.5), 0.0]))) < 1e-10


def test_delta1_kerr_equator_closed_form():
    g = build_kerr(KerrParams(1.0, 0.5))
    val = delta1(g, np.array([equatorial_rho(3.0, 0.5), 0.0]))
    assert val == pytest.approx(1 - 6 / 9.25, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-5.0, 5.0))
def test_ergosphere_zero_set_matches_g00_sign(rho, z):
    """Outside/inside the ergosphere is read equally from Delta or from g_00."""
    g = build_kerr(KerrParams(1.0, 0.6))
    p = np.array([rho, z])
    if math.hypot(rho - 0.6, z) < 0.05:
        return
    d = delta(g, p)
    g00 = g.covariant(p)[0, 0]
    if abs(d) > 1e-9 and abs(g00) > 1e-9:
        assert np.sign(d) == np.sign(g00)


def test_zero_set_equivalence_near_traced_ergosphere():
    rng = np.random.default_rng(11)
    g = build_kerr(KerrParams(1.0, 0.5))
    curve = trace_level_set(lambda P: delta(g, P), WIN, 256).curve
    base = curve.points[rng.integers(0, len(curve), 200)]
    pts = base + rng.normal(scale=0.02, size=base.shape)
    pts[:, 0] = np.abs(pts[:, 0]) + 1e-3
    d = delta(g, pts)
    g00 = g.covariant(pts)[..., 0, 0]
    ok = (np.abs(d) > 1e-12) & (np.abs(g00) > 1e-12)
    assert ok.sum() > 150
    assert np.all(np.sign(d[ok]) == np.sign(g00[ok]))


# --- Kerr closed forms --------------------------------------------------------


def test_horizon_radii():
    assert kerr_horizon_radii(KerrParams(1.0, 0.0)) == pytest.approx((2.0, 0.0))
    rp, rm = kerr_horizon_radii(KerrParams(1.0, 0.5))
    assert rp == pytest.approx(1.8660254, abs=1e-7)
    assert rm == pytest.approx(0.1339746, abs=1e-7)


def test_horizon_radii_near_extremal_merge():
    rp, rm = kerr_horizon_radii(KerrParams(2.0, 2.0 - 1e-10))
    assert rp == pytest.approx(2.0, abs=1e-4) and rm == pytest.approx(2.0, abs=1e-4)


def test_horizon_radii_reject_overspun():
    prm = object.__new__(KerrParams)  # bypass constructor validation
    object.__setattr__(prm, "m", 1.0)
    object.__setattr__(prm, "a", 1.5)
    with pytest.raises(ExtremalError):
        kerr_horizon_radii(prm)


def test_ergosphere_radius_equator_and_schwarzschild():
    prm = KerrParams(1.0, 0.5)
    assert kerr_ergosphere_radius(prm, 0.0) == pytest.approx(2.0, abs=1e-12)
    for z in (-1.5, 0.0, 0.4, 1.9):
        assert kerr_ergosphere_radius(KerrParams(1.0, 0.0), z) == pytest.approx(2.0, abs=1e-12)


def test_ergosphere_meets_horizon_on_axis():
    prm = KerrParams(1.0, 0.5)
    rp, _ = kerr_horizon_radii(prm)
    assert kerr_ergosphere_radius(prm, rp) == pytest.approx(rp, abs=1e-10)


@pytest.mark.parametrize("branch,zs", [("outer", (0.0, 0.5, 1.2, 1.8)), ("inner", (0.05, 0.1))])
def test_ergosphere_radius_residual(branch, zs):
    m, a = 1.0, 0.5
    for z in zs:
        r = kerr_ergosphere_radius(KerrParams(m, a), z, branch)
        assert abs(r ** 4 + a * a * z * z - 2 * m * r ** 3) < 1e-10


def test_inner_branch_range_error():
    with pytest.raises(BranchRangeError):
        kerr_ergosphere_radius(KerrParams(1.0, 0.5), 0.3, "inner")


@pytest.mark.parametrize("m,a", KERR_SETS)
def test_delta1_vanishes_on_horizon_ellipses(m, a):
    prm = KerrParams(m, a)
    g = build_kerr(prm)
    t = 2 * np.pi * np.arange(400) / 400
    for which in ("outer", "inner"):
        assert np.max(np.abs(delta1(g, kerr_horizon_curve(prm, which).x(t)))) < 1e-9


def test_horizon_ellipse_equation():
    prm = KerrParams(1.0, 0.5)
    for which, r in zip(("outer", "inner"), kerr_horizon_radii(prm)):
        P = kerr_horizon_curve(prm, which).x(np.linspace(0, 2 * np.pi, 50))
        np.testing.assert_allclose(r / 2 * P[:, 0] ** 2 + P[:, 1] ** 2, r * r, rtol=1e-13)


@pytest.mark.parametrize("m,a", KERR_SETS)
def test_delta1_factorizes_through_horizon(m, a):
    """Delta_1 / (r - r_plus) stays bounded and of one sign across the outer horizon."""
    prm = KerrParams(m, a)
    g = build_kerr(prm)
    rp, _ = kerr_horizon_radii(prm)
    ratios = []
    for r in np.linspace(0.9 * rp, 1.1 * rp, 41):
        if abs(r - rp) < 1e-6 * rp:
            continue
        for z in np.linspace(-0.8, 0.8, 9) * r:
            ratios.append(delta1(g, meridional_point(r, z, a)) / (r - rp))
    ratios = np.array(ratios)
    assert np.all(np.isfinite(ratios))
    assert np.min(np.abs(ratios)) > 1e-3
    assert np.all(np.sign(ratios) == np.sign(ratios[0]))


# --- level sets -----------------------------------------------------------------


def test_trace_half_circle():
    rep = trace_level_set(lambda P: P[..., 0] ** 2 + P[..., 1] ** 2 - 1, (0, 2, -2, 2), 64)
    assert len(rep.curves) == 1
    c = rep.curve
    assert c.axis_closed
    assert rep.residual_max < 1e-8
    np.testing.assert_allclose(np.hypot(*c.points.T), 1.0, atol=1e-12)
    assert polygon_area(c.loop) > 0  # counterclockwise
    assert c.is_simple() and c.is_even()


def test_trace_open_zero_set_raises():
    with pytest.raises(TopologyError):
        trace_level_set(lambda P: P[..., 1] - 0.3, (0, 2, -2, 2), 64)


def test_kerr_restricted_ergosphere_traces_both_ellipses():
    prm = KerrParams(1.0, 0.5)
    g = build_kerr(prm)
    rep = trace_level_set(lambda P: delta1(g, P), WIN, 256)
    assert len(rep.curves) == 2
    assert rep.residual_max < 1e-8
    for c, which in zip(rep.curves, ("outer", "inner")):
        ell = kerr_horizon_curve(prm, which).sample(4000).points
        assert hausdorff(c.loop, ell) < 1e-3


def test_kerr_ergosphere_trace_matches_radius_function():
    prm = KerrParams(1.0, 0.5)
    g = build_kerr(prm)
    c = trace_level_set(lambda P: delta(g, P), WIN, 256).curve
    P = c.points
    r = kerr_radius(P, prm.a)
    for pz, rr in zip(P[::25, 1], r[::25]):
        assert rr == pytest.approx(kerr_ergosphere_radius(prm, pz), abs=1e-7)


# --- containment ------------------------------------------------------------


def test_containment_nested_circles():
    inner = ParametricCurve.circle(1.0).sample(200)
    outer = ParametricCurve.circle(2.0).sample(200)
    res = containment_check(inner, outer)
    assert res.status == "inside"
    assert containment_check(outer, inner).status == "violated"


@pytest.mark.parametrize("m,a", KERR_SETS)
def test_kerr_horizon_inside_ergosphere_touching_on_axis(m, a):
    g = build_kerr(KerrParams(m, a))
    win = (0.0, 3.0 * m, -3.0 * m, 3.0 * m)
    inner = trace_level_set(lambda P: delta1(g, P), win, 256).curve
    outer = trace_level_set(lambda P: delta(g, P), win, 256).curve
    res = containment_check(inner, outer)
    assert res.status == "touching"
    assert len(res.touching) > 0
    # contact happens at the axis points z = +-r_plus; touching samples cluster there
    rp, _ = kerr_horizon_radii(KerrParams(m, a))
    T = res.touching
    for sgn in (1.0, -1.0):
        assert np.min(np.hypot(T[:, 0], T[:, 1] - sgn * rp)) < 1e-9 * m
    assert np.min(np.abs(T[:, 1])) > 0.95 * rp
    assert np.max(np.abs(T[:, 0])) < 0.1 * np.max(inner.points[:, 0])


def test_kerr_inner_horizon_lies_outside_inner_ergosphere():
    prm = KerrParams(1.0, 0.5)
    g = build_kerr(prm)
    inner_ergo = trace_level_set(lambda P: delta(g, P), WIN, 256).curves[1]
    inner_hor = kerr_horizon_curve(prm, "inner").sample(400)
    assert containment_check(inner_hor, inner_ergo).status == "violated"
    assert containment_check(inner_ergo, inner_hor).status != "violated"


@pytest.mark.parametrize("seed", range(5))
def test_containment_random_flow_metrics(seed):
    g = random_swirling_drain(seed)
    inner = trace_level_set(lambda P: delta1(g, P), WIN, 256).curve
    outer = trace_level_set(lambda P: delta(g, P), WIN, 256).curve
    res = containment_check(inner, outer)
    assert res.status in ("inside", "touching")
