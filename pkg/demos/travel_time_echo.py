"""Travel time toward an ergosphere and the matching echo delay seen at the boundary.

Run: python3 demos/travel_time_echo.py
"""
import math

import numpy as np

from analogue_bh.metric_core import build_acoustic, radial_drain
from analogue_bh.wave_sim.observables import (
    LinePath, echo_experiment, slab_flow_metric, travel_time,
)

one = lambda p: np.ones(np.asarray(p).shape[:-1])  # noqa: E731
drain = build_acoustic(one, one, radial_drain(1.0), dim=3)
path = LinePath((3.0, 0.0, 0.0), (1.0, 0.0, 0.0))
print("radial drain, sonic sphere at r = 1")
print(f"{'dist':>8s} {'T':>10s} {'-log(dist)':>11s}")
for k in range(1, 6):
    d = 10.0 ** -k
    print(f"{d:8.0e} {travel_time(drain, path, 1 - d / 2):10.5f} {-math.log(d):11.5f}")

slab = slab_flow_metric(lambda x: x)
print("\nflowing slab, sonic at x = 1: echo delay vs round-trip travel time")
for r in echo_experiment(slab, [0.5, 0.7, 0.8, 0.9], h=2e-3):
    print(f"  depth {r.depth:.2f}: delay {r.delay:.4f}, round trip {r.round_trip:.4f}, "
          f"rel. error {r.relative_error:.2e}")
