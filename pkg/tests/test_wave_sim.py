import math

import numpy as np
import pytest

from analogue_bh.curves import ParametricCurve, points_in_polygon
from analogue_bh.ergosphere import kerr_horizon_curve
from analogue_bh.metric_core import (
    KerrParams, build_acoustic, build_kerr, minkowski, radial_drain,
)
from analogue_bh.wave_sim import (
    BlowUpError, CFLError, Grid2D, GridError, SimConfig, WaveSolver, energies, horizon_flux,
    make_solver, run_simulation, step,
)
from analogue_bh.wave_sim.observables import (
    ConfigurationError, LinePath, PathDegeneracyError, TravelTimeRangeError, dn_operator,
    echo_experiment, lambda_pm, slab_flow_metric, smooth_pulse, travel_time,
)

SCHW = KerrParams(1.0, 0.0)
FLAT_CYL = minkowski(3, "cylindrical")
BOX = ("axis", "reflect", "reflect", "reflect")


def gaussian(r0, z0, w):
    return lambda x1, x2: np.exp(-((x1 - r0) ** 2 + (x2 - z0) ** 2) / w ** 2)


def drain():
    one = lambda p: np.ones(np.asarray(p).shape[:-1])  # noqa: E731
    return build_acoustic(one, one, radial_drain(1.0), dim=3)


def spherical_dalembert(r, t, s):
    """Exact radial solution of the 3D wave equation with u(0) = exp(-r^2/s^2), u_t(0) = 0."""
    phi = lambda x: np.exp(-x * x / (s * s))  # noqa: E731
    return ((r - t) * phi(r - t) + (r + t) * phi(r + t)) / (2 * r)


@pytest.fixture(scope="module")
def schw_solver():
    g = build_kerr(SCHW)
    grid = Grid2D(((0.0, 10.0), (-10.0, 10.0)), 100, 100,
                  excision=kerr_horizon_curve(SCHW, "outer"))
    return WaveSolver(g, grid)


# --- grid ---------------------------------------------------------------------------


def test_excision_mask_consistent_with_point_in_polygon(schw_solver):
    grid = schw_solver.grid
    loop = kerr_horizon_curve(SCHW).sample(2000).loop
    inside = points_in_polygon(grid.centers.reshape(-1, 2), loop).reshape(grid.n1, grid.n2)
    excised = ~grid.active
    assert excised.any()
    assert np.all(inside[excised])
    # cells deeper than the offset are removed, shallower ones kept
    assert np.all(excised == (grid.d_in > grid.excision_offset * grid.h))
    assert {grid.mask_name(0, 90), grid.mask_name(99, 50), grid.mask_name(50, 80)} == {
        "axis", "outer_boundary", "interior"}
    assert grid.mask_name(0, 50) == "excised"


def test_grid_rejects_bad_specifications():
    with pytest.raises(GridError):
        Grid2D(((0.0, 1.0), (0.0, 1.0)), 4, 16)
    with pytest.raises(GridError):
        Grid2D(((0.5, 1.0), (0.0, 1.0)), 16, 16)
    with pytest.raises(GridError):
        Grid2D(((0.0, 1.0), (0.0, 1.0)), 16, 16, ("reflect", "axis", "reflect", "reflect"))


def test_excision_cutting_the_domain_in_two_is_rejected():
    # a wide ellipse splits the window into an upper and a lower part
    wall = ParametricCurve.ellipse(5.0, 0.6)
    with pytest.raises(GridError):
        Grid2D(((-2.0, 2.0), (-2.0, 2.0)), 40, 40, ("reflect",) * 4, excision=wall,
               excision_offset=0.0)


def test_interpolate_reproduces_linear_field():
    grid = Grid2D(((0.0, 2.0), (-1.0, 1.0)), 20, 20, BOX)
    field = 3.0 + 2.0 * grid.X2 + grid.X1
    pts = np.array([[0.5, 0.1], [1.33, -0.7]])
    np.testing.assert_allclose(grid.interpolate(field, pts), 3.0 + 2.0 * pts[:, 1] + pts[:, 0])


# --- stepping -------------------------------------------------------------------------


def test_zero_data_stays_exactly_zero(schw_solver):
    s = schw_solver.initial_state(lambda a, b: np.zeros_like(a))
    for _ in range(20):
        s = step(schw_solver, s, schw_solver.dt_max)
    assert np.all(s.u == 0.0) and np.all(s.ut == 0.0)
    assert energies(schw_solver, s) == (0.0, 0.0, 0.0)
    assert horizon_flux(schw_solver, s) == 0.0


def test_constant_data_stays_constant_in_flat_space():
    sv = WaveSolver(FLAT_CYL, Grid2D(((0.0, 2.0), (-2.0, 2.0)), 32, 32, BOX))
    s = sv.initial_state(lambda a, b: np.full_like(a, 0.7))
    for _ in range(50):
        s = sv.step(s, sv.dt_max)
    np.testing.assert_allclose(s.u, 0.7, rtol=0, atol=1e-14)
    np.testing.assert_allclose(s.ut, 0.0, rtol=0, atol=1e-13)


def test_semigroup_property(schw_solver):
    """Evolving to t1 + t2 equals evolving to t1 and then by t2."""
    sv = schw_solver
    dt = sv.dt_max
    s0 = sv.initial_state(gaussian(0.0, 4.0, 0.7))
    direct = s0
    for _ in range(30):
        direct = sv.step(direct, dt)
    mid = s0
    for _ in range(12):
        mid = sv.step(mid, dt)
    # restart from a copy, with the clock reset: the metric is stationary
    from analogue_bh.wave_sim import WaveState

    again = WaveState(mid.u.copy(), mid.ut.copy(), 0.0)
    for _ in range(18):
        again = sv.step(again, dt)
    assert np.max(np.abs(again.u - direct.u)) <= 1e-12 * np.max(np.abs(direct.u))
    assert np.max(np.abs(again.ut - direct.ut)) <= 1e-12 * np.max(np.abs(direct.ut))


def test_cfl_violation_is_refused(schw_solver):
    s = schw_solver.initial_state(gaussian(0.0, 4.0, 0.7))
    with pytest.raises(CFLError) as err:
        schw_solver.step(s, 2 * schw_solver.dt_max)
    assert err.value.dt_max == schw_solver.dt_max
    assert "dt <=" in str(err.value)


def test_non_finite_state_raises_with_time_stamp():
    sv = WaveSolver(FLAT_CYL, Grid2D(((0.0, 2.0), (-2.0, 2.0)), 16, 16, BOX))
    s = sv.initial_state(lambda a, b: np.where(a < 0.2, np.nan, 0.0), t0=3.0)
    with pytest.raises(BlowUpError) as err:
        sv.step(s, sv.dt_max)
    assert err.value.t == pytest.approx(3.0 + sv.dt_max)


def test_flat_pulse_matches_spherical_oracle_on_coarse_grid():
    s = 0.5
    cfg = SimConfig(FLAT_CYL, ((0.0, 3.0), (-3.0, 3.0)), 200, 200, 1.0, gaussian(0.0, 0.0, s),
                    boundary=BOX, sample_stride=1000)
    res = run_simulation(cfg)
    X = res.solver.grid.centers
    ex = spherical_dalembert(np.hypot(X[..., 0], X[..., 1]), 1.0, s)
    assert np.max(np.abs(res.state.u - ex)) / np.max(np.abs(ex)) < 4e-3


# --- energies -------------------------------------------------------------------------


def test_flat_energies_coincide():
    sv = WaveSolver(FLAT_CYL, Grid2D(((0.0, 3.0), (-3.0, 3.0)), 40, 40, BOX))
    s = sv.initial_state(gaussian(0.0, 0.5, 0.6), gaussian(0.3, 0.0, 0.5))
    E, E1, _ = sv.energies(s)
    assert E > 0
    assert E1 == pytest.approx(E, rel=1e-14)


def test_energy_of_static_gaussian_matches_quadrature():
    """E = (1/2) int |grad u|^2 dV for u_t = 0; the dV = 2 pi rho drho dz factor is dropped."""
    w = 0.5
    sv = WaveSolver(FLAT_CYL, Grid2D(((0.0, 4.0), (-4.0, 4.0)), 160, 320, BOX))
    s = sv.initial_state(gaussian(0.0, 0.0, w))
    E, _, _ = sv.energies(s)
    # |grad u|^2 = 4 r^2/w^4 e^{-2r^2/w^2}; int over rho >= 0 with weight rho
    exact = 0.5 * 3 * math.pi ** 1.5 * w / (2 * math.sqrt(2)) / (2 * math.pi)
    assert E == pytest.approx(exact, rel=2e-3)


def test_energies_are_non_negative_outside_horizon(schw_solver):
    rng = np.random.default_rng(3)
    c = rng.uniform(-1, 1, 6)
    u0 = lambda a, b: c[0] * np.exp(-((a - 3) ** 2 + (b - c[1]) ** 2))  # noqa: E731
    u1 = lambda a, b: c[2] * np.exp(-((a - 4) ** 2 + (b - c[3]) ** 2))  # noqa: E731
    E, E1, E2 = schw_solver.energies(schw_solver.initial_state(u0, u1))
    assert E > 0 and E1 > 0 and E2 >= 0


def test_horizon_flux_sign_black_and_white():
    hz = kerr_horizon_curve(SCHW, "outer")
    grid = Grid2D(((0.0, 10.0), (-10.0, 10.0)), 100, 100, excision=hz)
    black = WaveSolver(build_kerr(SCHW), grid)
    white = WaveSolver(build_kerr(SCHW).time_reversed(), grid)
    u1 = gaussian(2.0, 0.5, 1.0)
    f_black = black.horizon_flux(black.initial_state(lambda a, b: 0 * a, u1))
    f_white = white.horizon_flux(white.initial_state(lambda a, b: 0 * a, u1))
    assert f_black < 0
    assert f_white >= 0
    assert f_white == pytest.approx(-f_black, rel=1e-12)
    assert black.flux_residual < 1e-6


def test_energy_balance_converges_under_refinement():
    """Discrete E(t) - E(0) - int flux shrinks at second order on a short excised run."""
    g = build_kerr(SCHW)
    hz = kerr_horizon_curve(SCHW)
    bal = []
    for n in (50, 100):
        cfg = SimConfig(g, ((0.0, 10.0), (-10.0, 10.0)), n, n, 8.0, gaussian(0.0, 4.0, 0.7),
                        excision=hz, sample_stride=5)
        bal.append(run_simulation(cfg).report.max_balance())
    assert math.log2(bal[0] / bal[1]) > 1.5


def test_excised_run_energy_non_increasing():
    # the discrete rise is a truncation effect: about 1.4% at 100^2, well under 1% from 200^2
    cfg = SimConfig(build_kerr(SCHW), ((0.0, 10.0), (-10.0, 10.0)), 200, 200, 15.0,
                    gaussian(0.0, 4.0, 0.7), excision=kerr_horizon_curve(SCHW), sample_stride=5)
    rep = run_simulation(cfg).report
    E = np.asarray(rep.E)
    assert len({len(rep.times), len(rep.E), len(rep.E1), len(rep.E2), len(rep.flux),
                len(rep.sup_u)}) == 1
    assert np.all(E >= 0)
    assert np.max(E - np.minimum.accumulate(E)) <= 0.01 * E[0]
    assert np.all(np.asarray(rep.flux) <= 0)
    assert E[-1] < E[0]


def test_excised_run_stays_bounded_for_long_times():
    """Dissipation is on by default with excision; sup|u| keeps decaying well past t = 100."""
    cfg = SimConfig(build_kerr(SCHW), ((0.0, 10.0), (-10.0, 10.0)), 50, 50, 200.0,
                    gaussian(0.0, 4.0, 0.7), excision=kerr_horizon_curve(SCHW), sample_stride=10)
    rep = run_simulation(cfg).report
    assert cfg.ko > 0
    t, sup = np.asarray(rep.times), np.asarray(rep.sup_u)
    late = [np.max(sup[(t >= a) & (t < a + 50)]) for a in (50.0, 100.0, 150.0)]
    assert late[0] > late[1] > late[2]


def test_dissipation_default_depends_on_excision():
    flat = SimConfig(FLAT_CYL, ((0.0, 1.0), (-1.0, 1.0)), 16, 16, 1.0, gaussian(0, 0, 1))
    assert flat.validate().ko == 0.0
    exc = SimConfig(build_kerr(SCHW), ((0.0, 10.0), (-10.0, 10.0)), 16, 16, 1.0,
                    gaussian(0, 0, 1), excision=kerr_horizon_curve(SCHW))
    assert exc.validate().ko > 0.0
    with pytest.raises(ValueError):
        SimConfig(FLAT_CYL, ((0.0, 1.0), (-1.0, 1.0)), 16, 16, 1.0, gaussian(0, 0, 1),
                  ko=-1.0).validate()


def test_sim_config_validation():
    cfg = SimConfig(FLAT_CYL, ((0.0, 1.0), (-1.0, 1.0)), 16, 16, -1.0, gaussian(0, 0, 1))
    with pytest.raises(ValueError):
        make_solver(cfg)
    cfg = SimConfig(FLAT_CYL, ((0.0, 1.0), (-1.0, 1.0)), 16, 16, 1.0, gaussian(0, 0, 1), dt=1.0)
    with pytest.raises(CFLError):
        run_simulation(cfg)


def test_solver_rejects_axis_mismatch():
    with pytest.raises(ValueError):
        WaveSolver(minkowski(2), Grid2D(((0.0, 1.0), (-1.0, 1.0)), 16, 16, BOX))


def test_snapshots_recorded():
    cfg = SimConfig(FLAT_CYL, ((0.0, 2.0), (-2.0, 2.0)), 32, 32, 0.5, gaussian(0, 0, 0.4),
                    boundary=BOX, snapshot_times=(0.0, 0.25))
    res = run_simulation(cfg)
    assert set(res.snapshots) == {0.0, 0.25}
    assert res.snapshots[0.0].shape == (32, 32)


# --- characteristic speeds along paths ------------------------------------------------------


def test_minkowski_radial_speeds():
    prof = lambda_pm(minkowski(3), LinePath((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), [0.2, 0.8])
    np.testing.assert_allclose(prof.plus, 1.0)
    np.testing.assert_allclose(prof.minus, -1.0)


def test_drain_speeds_closed_form():
    """Sound moves at c = 1 relative to a fluid with radial velocity -1/r: dr/dt = -1/r +- 1.

    With r = 3 - 2 sigma this gives d sigma / dt = (1/r -+ 1) / 2.
    """
    path = LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    sig = np.linspace(0.0, 0.95, 40)
    r = 3 - 2 * sig
    prof = lambda_pm(drain(), path, sig)
    np.testing.assert_allclose(prof.plus, (1 / r + 1) / 2, rtol=1e-12)
    np.testing.assert_allclose(prof.minus, (1 / r - 1) / 2, rtol=1e-12, atol=1e-15)
    at_half_speed = lambda_pm(drain(), path, 0.5)  # r = 2, v = c/2
    assert (at_half_speed.plus[0], at_half_speed.minus[0]) == pytest.approx((0.75, -0.25))


def test_one_speed_vanishes_on_the_ergosphere():
    prof = lambda_pm(drain(), LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0)), 1.0)
    assert abs(prof.a00[0]) < 1e-14
    assert min(abs(prof.plus[0]), abs(prof.minus[0])) < 1e-14
    assert prof.plus[0] > 0


def test_speeds_straddle_zero_outside_ergosphere():
    prof = lambda_pm(drain(), LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
                     np.linspace(0.0, 0.999, 200))
    assert np.all(prof.plus > 0) and np.all(prof.minus < 0)
    assert prof.vieta_residual() < 1e-12


def test_null_path_is_degenerate():
    flat = minkowski(3)
    with pytest.raises(PathDegeneracyError):
        lambda_pm(flat, LinePath((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)), 0.5)


# --- travel times ------------------------------------------------------------------------


def test_minkowski_travel_time_is_length():
    assert travel_time(minkowski(3), LinePath((0.0, 0.0, 0.0), (2.0, 1.0, 0.0)), 1.0) == (
        pytest.approx(math.sqrt(5.0), rel=1e-12))


def test_drain_travel_time_matches_midpoint_oracle():
    """Path staying where g_00 > 0.5: compare with composite midpoint of the closed-form speed."""
    path = LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    target = 0.5  # r from 3 to 2, v^2 <= 1/4
    n = 200_000
    mid = (np.arange(n) + 0.5) * target / n
    r = 3 - 2 * mid
    oracle = np.sum(1.0 / np.abs((1 / r - 1) / 2)) * target / n
    assert travel_time(drain(), path, target) == pytest.approx(oracle, rel=1e-8)


def test_drain_travel_time_log_divergence():
    path = LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    T = []
    for k in (1, 2, 3, 4):
        d = 10.0 ** -k
        t = travel_time(drain(), path, 1 - d / 2)
        # closed form int_{1+d}^3 r / (r - 1) dr
        assert t == pytest.approx((2 - d) + math.log(2 / d), rel=1e-10)
        T.append(t)
    slopes = np.diff(T) / math.log(10)
    assert np.all(np.diff(T) > 0)
    assert abs(slopes[-1] - slopes[-2]) / slopes[-1] < 0.05


def test_travel_time_crossing_ergosphere_is_refused():
    with pytest.raises(TravelTimeRangeError):
        travel_time(drain(), LinePath((3.0, 0.0, 0.0), (0.5, 0.0, 0.0)), 1.0)
    with pytest.raises(ValueError):
        travel_time(drain(), LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0)), 1.5)


# --- Dirichlet-to-Neumann traces ----------------------------------------------------------


def test_dn_zero_data_gives_zero_trace():
    tr = dn_operator(minkowski(2), lambda t, s: 0.0 * s, ((0.0, 1.0), (0.0, 0.1)), 40, 8, 0.5,
                     boundary=("dirichlet", "reflect", "reflect", "reflect"))
    assert np.all(tr.values == 0.0)
    assert len(list(tr.rows())) == tr.values.size


def test_dn_flat_slab_matches_transmission_oracle():
    """A plane wave entering a slab: u = f(t - x), so the outward conormal trace is -f'(t)."""
    f = smooth_pulse(0.4, 0.3)
    n = 600
    tr = dn_operator(minkowski(2), f, ((0.0, 1.5), (0.0, 16 * 1.5 / n)), n, 16, 1.0,
                     boundary=("dirichlet", "reflect", "reflect", "reflect"))
    d = 1e-6
    ref = -(f(tr.times + d, 0.0) - f(tr.times - d, 0.0)) / (2 * d)
    err = np.max(np.abs(tr.values.mean(axis=1) - ref)) / np.max(np.abs(ref))
    assert err < 1e-3


def test_echo_delay_matches_round_trip_travel_time():
    g = slab_flow_metric(lambda x: x)  # sonic at x = 1
    res = echo_experiment(g, [0.5], h=2e-3)[0]
    assert res.relative_error < 0.05
    # flowing medium slows the returning signal
    assert res.round_trip > 2 * 0.5


def test_dn_characteristic_boundary_is_rejected():
    sonic = slab_flow_metric(lambda x: 1.0 + 0.0 * x)
    with pytest.raises(ConfigurationError):
        dn_operator(sonic, smooth_pulse(0.3, 0.2), ((0.0, 1.0), (0.0, 0.1)), 40, 8, 0.5)


def test_dn_axis_cannot_carry_data():
    with pytest.raises(ConfigurationError):
        dn_operator(FLAT_CYL, smooth_pulse(0.3, 0.2), ((0.0, 1.0), (-0.5, 0.5)), 16, 16, 0.5)
