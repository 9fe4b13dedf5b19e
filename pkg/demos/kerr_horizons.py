"""Trace the ergosphere and restricted ergosphere of a Kerr metric and recover its horizon.

Run: python3 demos/kerr_horizons.py
"""
import numpy as np

from analogue_bh.characteristics import find_closed_characteristic
from analogue_bh.curves import hausdorff
from analogue_bh.ergosphere import (
    containment_check, delta, delta1, kerr_horizon_curve, kerr_horizon_radii, trace_level_set,
)
from analogue_bh.metric_core import KerrParams, build_kerr

prm = KerrParams(1.0, 0.5)
g = build_kerr(prm)
window = (0.0, 3.0, -3.0, 3.0)
rp, rm = kerr_horizon_radii(prm)
print(f"Kerr m={prm.m}, a={prm.a}: r+ = {rp:.6f}, r- = {rm:.6f}")

ergo = trace_level_set(lambda P: delta(g, P), window, 256)
restricted = trace_level_set(lambda P: delta1(g, P), window, 256)
print(f"ergosphere components: {len(ergo.curves)}, restricted ergosphere components: "
      f"{len(restricted.curves)}")
for c, which in zip(restricted.curves, ("outer", "inner")):
    ell = kerr_horizon_curve(prm, which).sample(4000).points
    print(f"  {which} restricted ergosphere vs horizon ellipse: "
          f"Hausdorff {hausdorff(c.loop, ell):.2e}")

res = containment_check(restricted.curve, ergo.curve)
print(f"containment: {res.status}, touching points near z = +-r+: "
      f"{np.round(res.touching[[0, -1]], 6).tolist()}")

found = find_closed_characteristic(g, window, n_seeds=16, h=1e-4)
ell = kerr_horizon_curve(prm, "outer").sample(4000).points
print(f"closed characteristic found: {found.found}, Hausdorff / r+ = "
      f"{hausdorff(found.curve.full().loop, ell) / rp:.2e}")
