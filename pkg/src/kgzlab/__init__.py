"""Numerical laboratory for the 1-D Klein-Gordon-Zakharov system.

Standing waves, their Hessian spectrum, conservation laws, virial
functionals, modulation fits and orbital stability experiments on a
periodic Fourier grid.
"""
from .backend import BACKEND
from .diagnostics import (CutoffProfile, ModulationFit, OrbitDistance, SolitonMonitor, cutoff,
                          modulation_fit, orbit_distance, velocity_estimates, virial_I,
                          virial_I_tilde, virial_rhs_check)
from .errors import (BlowUp, CutoffTooLarge, EigensolveFailure, FrequencyOutOfRange, GridError,
                     GridMismatch, KGZError, MeanNotZero, NoConvergence, WindowTooShort)
from .evolve import DiagnosticsRecord, EvolveConfig, Trajectory, evolve, rhs, step
from .functionals import IdentityReport, action, charge, energy, identity_report, momentum
from .grid import Grid1D, make_grid
from .harness import (ExperimentConfig, StabilityVerdict, run_instability_experiment,
                      stability_scan, suite_identities, suite_spectra)
from .linops import (RealBlockOperator, SpectrumReport, assemble_hessian, assemble_Lpm,
                     coercivity_check, spectrum)
from .soliton import SolitonFamily, family, ground_state, modulated_soliton, translate_rotate
from .state import KGZState

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BlowUp", "CutoffProfile", "CutoffTooLarge", "DiagnosticsRecord",
    "EigensolveFailure", "EvolveConfig", "ExperimentConfig", "FrequencyOutOfRange", "Grid1D",
    "GridError", "GridMismatch", "IdentityReport", "KGZError", "KGZState", "MeanNotZero",
    "ModulationFit", "NoConvergence", "OrbitDistance", "RealBlockOperator", "SolitonFamily",
    "SolitonMonitor", "SpectrumReport", "StabilityVerdict", "Trajectory", "WindowTooShort",
    "action", "assemble_Lpm", "assemble_hessian", "charge", "coercivity_check", "cutoff",
    "energy", "evolve", "family", "ground_state", "identity_report", "make_grid",
    "modulated_soliton", "modulation_fit", "momentum", "orbit_distance", "rhs",
    "run_instability_experiment", "spectrum", "stability_scan", "step", "suite_identities",
    "suite_spectra", "translate_rotate", "velocity_estimates", "virial_I", "virial_I_tilde",
    "virial_rhs_check",
]
