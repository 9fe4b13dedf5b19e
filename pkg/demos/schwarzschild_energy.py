"""Evolve a pulse outside an excised Schwarzschild horizon and print the energy history.

Run: python3 demos/schwarzschild_energy.py [n] [T]
"""
import sys

import numpy as np

from analogue_bh.ergosphere import kerr_horizon_curve
from analogue_bh.metric_core import KerrParams, build_kerr
from analogue_bh.wave_sim import SimConfig, run_simulation

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
T = float(sys.argv[2]) if len(sys.argv) > 2 else 30.0
prm = KerrParams(1.0, 0.0)
cfg = SimConfig(build_kerr(prm), ((0.0, 10.0), (-10.0, 10.0)), n, n, T,
                lambda r, z: np.exp(-(r * r + (z - 4.0) ** 2) / 0.49),
                excision=kerr_horizon_curve(prm, "outer"), sample_stride=max(1, n // 10))
res = run_simulation(cfg)
rep = res.report
print(f"{'t':>7s} {'E':>12s} {'flux':>12s} {'sup|u|':>12s} {'balance':>12s}")
for k in range(0, len(rep), max(1, len(rep) // 15)):
    print(f"{rep.times[k]:7.2f} {rep.E[k]:12.5e} {rep.flux[k]:12.5e} {rep.sup_u[k]:12.5e} "
          f"{rep.balance[k]:12.3e}")
print(f"wall time {rep.meta['wall_time']:.1f}s, max |balance| {rep.max_balance():.2e}")
