"""Manufacture a metric with a prescribed horizon, then break a Kerr horizon with a bump.

Run: python3 demos/design_and_perturb.py
"""
import math

from analogue_bh.characteristics import find_closed_characteristic
from analogue_bh.curves import ParametricCurve
from analogue_bh.ergosphere import kerr_horizon_radii
from analogue_bh.horizon_design import (
    BumpSpec, build_horizon_metric, perturb_metric_bump, verify_horizon_metric,
)
from analogue_bh.metric_core import KerrParams, build_kerr

curve = ParametricCurve.perturbed_circle(1.0, 0.1, 3)
g = build_horizon_metric(curve, dim=2)
v = verify_horizon_metric(g, curve)
print("designed planar horizon (perturbed circle):")
for key in ("residual", "max_abs_delta", "classification", "eikonal_residual"):
    print(f"  {key:18s} {v[key]}")

prm = KerrParams(1.0, 0.5)
rp, _ = kerr_horizon_radii(prm)
bumped = perturb_metric_bump(build_kerr(prm), BumpSpec((math.sqrt(2 * rp), 0.0), 0.3, 0.05))
res = find_closed_characteristic(bumped, (0.0, 3.0, -3.0, 3.0), n_seeds=64)
events = {}
for c in res.certificate:
    events[c["event"]] = events.get(c["event"], 0) + 1
print(f"bumped Kerr: closed characteristic found = {res.found}; exit events {events}")
