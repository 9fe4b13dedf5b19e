"""Command-line entry point: run a configured experiment and write CSV/JSON artifacts.

Exit codes: 0 all checks pass, 1 a check failed, 2 parse error, 3 validation
error, 4 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List

import numpy as np

from . import __version__
from .config import ConfigParseError, ConfigValidationError, ExperimentConfig, load
from .curves import ParametricCurve, hausdorff

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# artifacts


@dataclass
class RunManifest:
    config: Dict[str, Any]
    version: str = __version__
    wall_time: float = 0.0
    checks: List[dict] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    info: Dict[str, Any] = field(default_factory=dict)

    def check(self, name: str, passed: bool, value, threshold=None, note: str = ""):
        if any(c["name"] == name for c in self.checks):
            raise ValueError(f"duplicate check {name!r}")
        self.checks.append({"name": name, "passed": bool(passed), "value": _jsonable(value),
                            "threshold": _jsonable(threshold), "note": note})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"config": self.config, "version": self.version, "wall_time": self.wall_time,
                "python": platform.python_version(), "passed": self.passed,
                "checks": self.checks, "artifacts": self.artifacts, "info": _jsonable(self.info)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str, header, rows, manifest: RunManifest):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    manifest.artifacts.append(os.path.basename(path))


# ---------------------------------------------------------------------------
# builders


def build_metric(cfg: ExperimentConfig):
    from .horizon_design import BumpSpec, build_horizon_metric, perturb_metric_bump
    from .metric_core import (KerrParams, build_acoustic, build_kerr, minkowski,
                              radial_drain, random_swirling_drain)
    from .wave_sim.observables import slab_flow_metric

    fam = cfg["metric.family"]
    dim = cfg["metric.dim"]
    if fam == "minkowski":
        g = minkowski(dim, "cylindrical" if dim == 3 else "cartesian")
    elif fam in ("kerr", "schwarzschild"):
        a = 0.0 if fam == "schwarzschild" else cfg["metric.a"]
        g = build_kerr(KerrParams(cfg["metric.m"], a))
    elif fam == "drain":
        one = lambda p: np.ones(np.asarray(p).shape[:-1])  # noqa: E731
        g = build_acoustic(one, lambda p: cfg["metric.c"] * one(p),
                           radial_drain(cfg["metric.r0"], cfg["metric.c"], cfg["metric.power"]),
                           dim=3)
    elif fam == "swirl":
        g = random_swirling_drain(cfg["metric.seed"])
    elif fam == "slab":
        L = cfg["metric.length"]
        g = slab_flow_metric(lambda x: np.asarray(x) / L, name=f"slab(length={L:g})")
    elif fam == "horizon":
        g = build_horizon_metric(build_curve(cfg), dim=dim)
    else:
        raise ConfigValidationError(f"unknown metric family {fam!r}", "metric.family")
    eps = cfg.get("bump.epsilon", 0.0)
    if eps:
        if fam != "kerr":
            raise ConfigValidationError("bump perturbation is wired for kerr only", "bump.epsilon")
        crho = cfg["bump.center_rho"]
        if not math.isfinite(crho):
            crho = _default_bump_rho(cfg)
        g = perturb_metric_bump(g, BumpSpec((crho, cfg["bump.center_z"]), cfg["bump.radius"], eps))
    return g


def _default_bump_rho(cfg) -> float:
    """Equatorial radius of the outer horizon ellipse."""
    from .ergosphere import kerr_horizon_radii
    rp, _ = kerr_horizon_radii(_kerr_params(cfg))
    return math.sqrt(2 * cfg["metric.m"] * rp)


def build_curve(cfg: ExperimentConfig) -> ParametricCurve:
    kind = cfg["curve.kind"]
    if kind == "ellipse":
        return ParametricCurve.ellipse(cfg["curve.a"], cfg["curve.b"])
    if kind == "circle":
        return ParametricCurve.circle(cfg["curve.radius"])
    if kind == "perturbed_circle":
        return ParametricCurve.perturbed_circle(cfg["curve.radius"], cfg["curve.amp"], cfg["curve.k"])
    raise ConfigValidationError(f"unknown curve kind {kind!r}", "curve.kind")


def _window(cfg):
    return (0.0, cfg["grid.rho_max"], -cfg["grid.z_max"], cfg["grid.z_max"])


def _kerr_params(cfg):
    from .metric_core import KerrParams
    return KerrParams(cfg["metric.m"], 0.0 if cfg["metric.family"] == "schwarzschild" else cfg["metric.a"])


# ---------------------------------------------------------------------------
# commands


def _curve_rows(g, label, k, c):
    from .ergosphere import delta, delta1
    P = c.points
    return list(zip([label] * len(P), [k] * len(P), c.arc_fractions(), P[:, 0], P[:, 1],
                    delta(g, P), delta1(g, P)))


def cmd_ergo(cfg, out, man):
    from .ergosphere import (containment_check, delta, delta1, kerr_horizon_curve,
                             trace_level_set)
    from .metric_core import random_swirling_drain

    g = build_metric(cfg)
    win = _window(cfg)
    rows = []
    rep1 = trace_level_set(lambda P: delta1(g, P), win, cfg["grid.n"])
    for k, c in enumerate(rep1.curves):
        rows += _curve_rows(g, "delta1", k, c)
    man.info["delta1_curves"] = len(rep1.curves)
    man.info["delta1_trace_residual"] = rep1.residual_max
    if cfg["metric.family"] == "kerr":
        prm = _kerr_params(cfg)
        n = cfg["check.ellipse_samples"]
        worst = 0.0
        for which in ("outer", "inner"):
            ell = kerr_horizon_curve(prm, which)
            t = 2 * np.pi * np.arange(n) / n
            worst = max(worst, float(np.max(np.abs(delta1(g, ell.x(t))))))
            traced = [c for c in rep1.curves]
            gap = min(hausdorff(c.loop, ell.sample(2000).points) for c in traced)
            man.info[f"hausdorff_traced_vs_{which}_ellipse"] = gap
        man.check("delta1_vanishes_on_horizon_ellipses", worst < cfg["tol.delta1"], worst,
                  cfg["tol.delta1"])
    if cfg["check.containment"]:
        metrics = [("primary", g)]
        metrics += [(f"swirl_seed_{cfg.seed + k}", random_swirling_drain(cfg.seed + k))
                    for k in range(cfg["check.random_metrics"])]
        for label, gm in metrics:
            inner = trace_level_set(lambda P: delta1(gm, P), win, cfg["grid.n"]).curve
            outer_rep = trace_level_set(lambda P: delta(gm, P), win, cfg["grid.n"])
            res = containment_check(inner, outer_rep.curve)
            man.check(f"containment[{label}]", res.status != "violated", res.max_excursion, res.band,
                      note=f"{res.status}, {len(res.touching)} touching samples")
            if label == "primary":
                for k, c in enumerate(outer_rep.curves):
                    rows += _curve_rows(g, "delta", k, c)
                if cfg["metric.family"] == "kerr":
                    scale = float(np.max(np.abs(outer_rep.curve.loop)))
                    on_axis = res.touching[np.abs(res.touching[:, 0]) <= 1e-3 * scale] \
                        if len(res.touching) else res.touching
                    man.check("axis_tangency", len(on_axis) > 0, len(on_axis), 1,
                              note="touching samples on the symmetry axis")
    write_csv(os.path.join(out, "curves.csv"),
              ["set", "curve", "s", "rho", "z", "delta", "delta1"], rows, man)


def cmd_horizon(cfg, out, man):
    from .characteristics import find_closed_characteristic, rk4_order
    from .ergosphere import kerr_horizon_curve, kerr_horizon_radii

    g = build_metric(cfg)
    res = find_closed_characteristic(g, _window(cfg), n_seeds=cfg["search.n_seeds"],
                                     h=cfg["search.h"])
    man.info["coverage"] = res.coverage
    man.check("closed_characteristic_found", res.found, res.found, True)
    if res.found:
        write_csv(os.path.join(out, "horizon.csv"), ["rho", "z"], res.curve.points, man)
        if cfg["metric.family"] in ("kerr", "schwarzschild"):
            prm = _kerr_params(cfg)
            rp, _ = kerr_horizon_radii(prm)
            ell = kerr_horizon_curve(prm, "outer").sample(4000).points
            gap = hausdorff(res.curve.full().loop, ell) / rp
            man.check("hausdorff_to_outer_ellipse_over_r_plus", gap < cfg["tol.hausdorff"], gap,
                      cfg["tol.hausdorff"])
    if cfg["search.check_order"]:
        start = _order_start(cfg)
        orders, _ = rk4_order(g, start)
        man.check("rk4_observed_order", float(np.min(orders)) >= cfg["tol.order"],
                  float(np.min(orders)), cfg["tol.order"])
    with open(os.path.join(out, "certificate.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(res.certificate), fh, indent=1)
    man.artifacts.append("certificate.json")


def _order_start(cfg):
    from .ergosphere import kerr_horizon_radii
    prm = _kerr_params(cfg)
    rp, rm = kerr_horizon_radii(prm)
    r = 0.5 * (rp + rm)
    return (math.sqrt(2 * prm.m * r), 0.0)


def cmd_check_surface(cfg, out, man):
    from .characteristics import characteristic_residual

    g = build_metric(cfg)
    curve = build_curve(cfg).sample(cfg["curve.samples"])
    rep = characteristic_residual(g, curve, tol=cfg["tol.residual"])
    man.info["report"] = rep.to_dict()
    man.check("characteristic_residual", rep.residual < cfg["tol.residual"], rep.residual,
              cfg["tol.residual"])
    if cfg["expect.classification"]:
        man.check("classification", rep.classification == cfg["expect.classification"],
                  rep.classification, cfg["expect.classification"])
    pts = curve.loop
    write_csv(os.path.join(out, "surface.csv"), ["rho", "z", "residual", "flux"],
              zip(pts[:, 0], pts[:, 1], rep.residuals, rep.flux), man)


def cmd_design(cfg, out, man):
    from .characteristics import characteristic_residual
    from .ergosphere import kerr_horizon_curve
    from .horizon_design import build_horizon_metric, dilated_family, family_with_horizons, \
        verify_horizon_metric
    from .metric_core import KerrParams, build_kerr

    curve = build_curve(cfg)
    g = build_horizon_metric(curve, dim=cfg["metric.dim"])
    v = verify_horizon_metric(g, curve)
    man.info["verification"] = v
    tol, tol_e = cfg["tol.residual"], cfg["tol.eikonal"]
    man.check("characteristic_residual", v["residual"] < tol, v["residual"], tol)
    man.check("max_abs_delta_on_surface", v["max_abs_delta"] < tol, v["max_abs_delta"], tol)
    man.check("black_hole_flux", v["classification"] == "black_hole", v["classification"], "black_hole")
    man.check("eikonal_residual", v["eikonal_residual"] < tol_e, v["eikonal_residual"], tol_e)
    samp = curve.sample(cfg["curve.samples"]).loop
    rows = [("design", 0.0, p[0], p[1]) for p in samp]
    eps_list = cfg["design.family_eps"]
    if eps_list:
        prm = KerrParams(cfg["design.family_base_m"], cfg["design.family_base_a"])
        base = build_kerr(prm)
        psi = dilated_family(kerr_horizon_curve(prm, "outer"), 1.0, 1.0)
        make = family_with_horizons(psi, base)
        for e in eps_list:
            ge = make(float(e))
            c = psi(float(e)).sample(cfg["curve.samples"])
            rep = characteristic_residual(ge, c, tol=1e-6)
            man.check(f"family_eps={e:g}", rep.residual < tol and rep.classification == "black_hole",
                      rep.residual, tol, note=rep.classification)
            rows += [("family", e, p[0], p[1]) for p in c.loop]
    write_csv(os.path.join(out, "design_curves.csv"), ["set", "eps", "rho", "z"], rows, man)


def cmd_perturb(cfg, out, man):
    from .characteristics import characteristic_residual, find_closed_characteristic
    from .ergosphere import delta1, trace_level_set
    from .metric_core import KerrParams, build_kerr

    if cfg["bump.epsilon"] == 0.0:
        raise ConfigValidationError("perturb needs a nonzero bump", "bump.epsilon")
    g = build_metric(cfg)
    base = build_kerr(KerrParams(cfg["metric.m"], cfg["metric.a"]))
    win = _window(cfg)
    n = 201
    R, Z = np.meshgrid(np.linspace(1e-3, win[1], n), np.linspace(win[2], win[3], n), indexing="ij")
    P = np.stack([R, Z], -1)
    change = float(np.max(np.abs(delta1(g, P) - delta1(base, P))))
    man.check("delta1_unchanged", change < cfg["tol.delta1_change"], change, cfg["tol.delta1_change"])
    rep = trace_level_set(lambda Q: delta1(g, Q), win, cfg["grid.n"])
    curve = rep.curve
    cr = characteristic_residual(g, curve.full(), tol=1e-6)
    loop = curve.full().loop
    crho = cfg["bump.center_rho"]
    if not math.isfinite(crho):
        crho = _default_bump_rho(cfg)
    inside = np.hypot(np.abs(loop[:, 0]) - crho, loop[:, 1] - cfg["bump.center_z"]) < cfg["bump.radius"]
    r_in = float(np.max(cr.residuals[inside])) if inside.any() else 0.0
    man.check("residual_inside_bump", r_in > cfg["tol.min_residual"], r_in, cfg["tol.min_residual"])
    res = find_closed_characteristic(g, win, n_seeds=cfg["search.n_seeds"], h=cfg["search.h"])
    man.check("no_closure_certificate", not res.found and res.coverage.get("seeds", 0) >= cfg["search.n_seeds"],
              res.coverage.get("seeds", 0), cfg["search.n_seeds"],
              note="no closed characteristic among the seeds")
    events = {}
    for c in res.certificate:
        events[c["event"]] = events.get(c["event"], 0) + 1
    man.info["certificate_events"] = events
    with open(os.path.join(out, "certificate.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable({"coverage": res.coverage, "trajectories": res.certificate}), fh, indent=1)
    man.artifacts.append("certificate.json")


def cmd_wave(cfg, out, man):
    from .ergosphere import kerr_horizon_curve
    from .wave_sim import SimConfig, run_simulation

    g = build_metric(cfg)
    fam = cfg["metric.family"]
    excision = None
    if cfg["grid.excise"] and fam in ("kerr", "schwarzschild"):
        excision = kerr_horizon_curve(_kerr_params(cfg), "outer")
    outer = cfg["grid.outer"]
    if outer not in ("sponge", "reflect"):
        raise ConfigValidationError("must be 'sponge' or 'reflect'", "grid.outer")
    r0, z0, w, amp = cfg["pulse.rho0"], cfg["pulse.z0"], cfg["pulse.width"], cfg["pulse.amp"]
    cyl = g.coords == "cylindrical"
    win = ((0.0, cfg["grid.rho_max"]), (-cfg["grid.z_max"], cfg["grid.z_max"]))

    def u0(x1, x2):
        return amp * np.exp(-((x1 - r0) ** 2 + (x2 - z0) ** 2) / w ** 2)

    sim = SimConfig(g, win, cfg["grid.n_rho"], cfg["grid.n_z"], cfg["time.T"], u0,
                    boundary=(("axis" if cyl else outer), outer, outer, outer), excision=excision,
                    excision_offset=cfg["grid.excision_offset"], cfl=cfg["time.cfl"],
                    sample_stride=cfg["time.sample_stride"],
                    ko=cfg["time.ko"] if math.isfinite(cfg["time.ko"]) else None,
                    snapshot_times=cfg["output.snapshot_times"])
    res = run_simulation(sim)
    rep = res.report
    write_csv(os.path.join(out, "energy.csv"), ["t", "E", "E1", "E2", "flux", "sup_u"],
              rep.csv_rows(), man)
    a = rep.arrays()
    E = a["E"]
    rise = float(np.max(E - np.minimum.accumulate(E)) / E[0]) if E[0] > 0 else 0.0
    man.info.update(rep.meta)
    man.info["ko"] = res.solver.ko
    man.info["bound_constant"] = float(np.max(a["sup_u"]) / a["sup_u"][0]) if a["sup_u"][0] else 0.0
    if excision is not None:
        man.check("energy_non_increasing", rise <= cfg["tol.energy_rise"], rise, cfg["tol.energy_rise"])
        man.check("flux_non_positive", bool(np.all(a["flux"] <= 0)), float(np.max(a["flux"])), 0.0)
    if math.isfinite(cfg["tol.balance"]):
        man.check("energy_balance", rep.max_balance() <= cfg["tol.balance"], rep.max_balance(),
                  cfg["tol.balance"])
    grid = res.solver.grid
    for ts, u in sorted(res.snapshots.items()):
        name = f"snapshot_t{ts:g}.csv"
        act = grid.active
        write_csv(os.path.join(out, name), ["rho", "z", "u"],
                  zip(grid.X1[act], grid.X2[act], u[act]), man)


def cmd_travel_time(cfg, out, man):
    from .wave_sim.observables import LinePath, lambda_pm, travel_time

    g = build_metric(cfg)
    a, b = np.asarray(cfg["path.start"]), np.asarray(cfg["path.end"])
    if a.shape != b.shape or a.shape[0] != g.point_dim:
        raise ConfigValidationError(f"path points need {g.point_dim} coordinates", "path.start")
    path = LinePath(tuple(a), tuple(b))
    length = float(np.linalg.norm(b - a))
    sig = np.linspace(0.0, 1.0, cfg["path.samples"])[:-1]
    prof = lambda_pm(g, path, sig)
    T = [travel_time(g, path, float(s)) for s in sig]
    write_csv(os.path.join(out, "travel_time.csv"), ["sigma", "lambda_plus", "lambda_minus", "T"],
              zip(sig, prof.plus, prof.minus, T), man)
    man.check("vieta_identities", prof.vieta_residual() <= cfg["tol.vieta"], prof.vieta_residual(),
              cfg["tol.vieta"])
    ks = cfg["path.dist_exponents"]
    Tk = [travel_time(g, path, 1.0 - 10.0 ** (-k) / length) for k in ks]
    slopes = np.diff(Tk) / (np.diff(ks) * math.log(10.0))
    man.info["divergence"] = {"exponents": list(ks), "T": Tk, "slopes_per_log_dist": slopes.tolist()}
    if len(slopes) >= 2:
        rel = float(np.max(np.abs(np.diff(slopes)) / np.abs(slopes[1:])))
        man.check("log_divergence_slope_stable", rel <= cfg["tol.slope"], rel, cfg["tol.slope"])
    man.check("travel_time_increasing", bool(np.all(np.diff(Tk) > 0)), Tk, None)


def cmd_dn(cfg, out, man):
    from .wave_sim.observables import dn_operator, echo_experiment, smooth_pulse

    g = build_metric(cfg)
    if g.point_dim != 2 or g.coords != "cartesian":
        raise ConfigValidationError("dn runs on planar slabs (metric.dim = 2)", "metric.dim")
    f = smooth_pulse(cfg["pulse.center"], cfg["pulse.half_width"])
    L, n, wc = cfg["grid.length"], cfg["grid.n"], cfg["grid.width_cells"]
    h = L / n
    tr = dn_operator(g, f, ((0.0, L), (0.0, wc * h)), n, wc, cfg["time.T"], side="x1min",
                     boundary=("dirichlet", "reflect", "reflect", "reflect"))
    write_csv(os.path.join(out, "dn_trace.csv"), ["t", "s", "value"], tr.rows(), man)
    if cfg["metric.family"] == "minkowski":
        d = 1e-6
        ref = -(f(tr.times + d, 0.0) - f(tr.times - d, 0.0)) / (2 * d)
        err = float(np.max(np.abs(tr.values.mean(axis=1) - ref)) / np.max(np.abs(ref)))
        man.check("flat_slab_matches_transmission_oracle", err < cfg["tol.flat_oracle"], err,
                  cfg["tol.flat_oracle"])
    depths = cfg["echo.depths"]
    if depths:
        res = echo_experiment(g, depths, h=cfg["echo.h"])
        rows = [(r.depth, r.delay, r.round_trip, r.inbound) for r in res]
        write_csv(os.path.join(out, "echo.csv"), ["depth", "delay", "round_trip", "inbound"], rows, man)
        worst = max(r.relative_error for r in res)
        man.check("echo_delay_matches_round_trip", worst < cfg["tol.echo"], worst, cfg["tol.echo"])


COMMAND_FUNCS = {
    "ergo": cmd_ergo, "horizon": cmd_horizon, "check-surface": cmd_check_surface,
    "design": cmd_design, "perturb": cmd_perturb, "wave": cmd_wave,
    "travel-time": cmd_travel_time, "dn": cmd_dn,
}


# ---------------------------------------------------------------------------
# recipes


def recipe_dir():
    return resources.files("analogue_bh") / "recipes"


def list_recipes() -> List[tuple]:
    """(name, description, path) for every bundled recipe."""
    out = []
    for entry in sorted(recipe_dir().iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".cfg"):
            continue
        desc = ""
        for line in entry.read_text(encoding="utf-8").splitlines():
            if line.strip().startswith("description"):
                desc = line.split("=", 1)[1].strip()
        out.append((entry.name[:-4], desc, str(entry)))
    return out


def run(config_path: str, out_dir: str, seed=None, stream=None) -> int:
    stream = stream if stream is not None else sys.stdout
    try:
        cfg = load(config_path)
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if seed is not None:
        cfg.values["seed"] = int(seed)
    os.makedirs(out_dir, exist_ok=True)
    man = RunManifest(cfg.echo())
    man.info["anchor"] = cfg["anchor"]
    t0 = time.perf_counter()
    try:
        COMMAND_FUNCS[cfg.command](cfg, out_dir, man)
    except ConfigValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # module errors are reported with their type
        print(f"runtime error in {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    man.wall_time = time.perf_counter() - t0
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(man.to_dict(), fh, indent=1)
    for c in man.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['value']} "
              f"(threshold {c['threshold']})", file=stream)
    return EXIT_OK if man.passed else EXIT_FAIL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="analogue-bh", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="experiment config file (key = value lines)")
    ap.add_argument("--recipe", help="name of a bundled recipe (see --list-recipes)")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--list-recipes", action="store_true", help="print the bundled recipes")
    args = ap.parse_args(argv)
    if args.list_recipes:
        for name, desc, _ in list_recipes():
            print(f"{name:24s} {desc}")
        return EXIT_OK
    path = args.config
    if args.recipe:
        names = {n: p for n, _, p in list_recipes()}
        if args.recipe not in names:
            print(f"unknown recipe {args.recipe!r}", file=sys.stderr)
            return EXIT_VALIDATION
        path = names[args.recipe]
    if not path:
        ap.error("one of --config, --recipe or --list-recipes is required")
    return run(path, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
