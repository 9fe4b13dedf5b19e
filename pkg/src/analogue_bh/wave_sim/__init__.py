"""Axisymmetric wave evolution, energy functionals and boundary observables."""
from .grid import Grid2D, GridError
from .solver import (BalanceError, BlowUpError, CFLError, EnergyReport, SimConfig, SimResult,
                     WaveSolver, WaveState, energies, horizon_flux, make_solver, run_simulation,
                     step)

__all__ = [
    "Grid2D", "GridError", "BalanceError", "BlowUpError", "CFLError", "EnergyReport",
    "SimConfig", "SimResult", "WaveSolver", "WaveState", "energies", "horizon_flux",
    "make_solver", "run_simulation", "step",
]
