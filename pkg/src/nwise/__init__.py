"""Spin-1/2 systems with uniform N-wise couplings, solved plane by plane."""

__version__ = "0.1.0"

from .dynamics import PropagatorOptions, SparsePropagator, assemble_propagator, rabi_probability
from .errors import (CapacityError, IntegrationError, NumericalError, NwiseError, OutputError, ScenarioError,
                     UsageError)
from .model import (Constant, Cosine, CouplingSchedule, InitialState, LinearRamp, ScenarioConfig, SechPulse,
                    Sine, Tabulated, build_full_hamiltonian)
from .protocols import CoolingScenario, GhzScenario, run_cooling, run_ghz, selectivity_map
from .subspace import SubspaceLabel, effective_field, enumerate_labels, static_spectrum
from .transform import chain_unitary

__all__ = [
    "CapacityError", "Constant", "CoolingScenario", "Cosine", "CouplingSchedule", "GhzScenario",
    "InitialState", "IntegrationError", "LinearRamp", "NumericalError", "NwiseError", "OutputError",
    "PropagatorOptions", "ScenarioConfig", "ScenarioError", "SechPulse", "Sine", "SparsePropagator",
    "SubspaceLabel", "Tabulated", "UsageError", "assemble_propagator", "build_full_hamiltonian",
    "chain_unitary", "effective_field", "enumerate_labels", "rabi_probability", "run_cooling", "run_ghz",
    "selectivity_map", "static_spectrum",
]
