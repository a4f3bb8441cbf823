"""Quantum optics of Moessbauer nuclei in thin-film x-ray cavities.

Three tiers share one parameter language (all rates in units of the
single-nucleus linewidth gamma):

* linear_response: collective few-level systems, reflectance spectra,
  rocking curves and the closed-form unmagnetized oracle;
* master_equation: full Lindblad dynamics of N nuclei and two truncated
  photon modes, plus the adiabatically eliminated nuclear-only model;
* scenario / cli: JSON scenarios, presets and file outputs.

The per-point scan solver runs on a compiled kernel when available; see
nucav.backend.BACKEND.
"""

from .backend import BACKEND
from .cavity import (
    CavityParams,
    CouplingParams,
    EffectiveConstants,
    cavity_detuning_exact,
    cavity_detuning_linear,
    effective_constants,
    electronic_reflection,
)
from .ensemble import (
    EnsembleConfig,
    HyperfineConfig,
    TransitionRecord,
    branching_check,
    ground_populations,
    transition_table,
)
from .geometry import (
    ExperimentGeometry,
    build_frame,
    coupling_matrix,
    dipole_vectors,
    geometry_coupling,
    transverse_projector,
)
from .linear_response import (
    CollectiveParams,
    EffectiveLevelSystem,
    Spectrum,
    build_effective_system,
    canonical_geometries,
    collective_parameters,
    reflectance,
    scan_angle,
    scan_detuning,
    steady_coherences,
    symmetric_mode_analysis,
    two_level_reflectance,
)
from .master_equation import (
    QuantumConfig,
    QuantumModel,
    build_hamiltonian,
    build_liouvillian,
    eliminated_dynamics,
    eliminated_spectrum,
    g2,
    observables,
    quantum_spectrum,
    steady_state,
    time_evolve,
    weak_drive_crosscheck,
)
from .scenario import Scenario, list_presets, load_preset, load_scenario, scenario_from_dict

__version__ = "0.1.0"
