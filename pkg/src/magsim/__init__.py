"""Simulator for entangling nonlocal magnons through cavity-qubit exchange."""

from .dynamics import (
    CollapseSet,
    IntegrationError,
    PositivityError,
    SimulationResult,
    StepControl,
    evolve_ket,
    evolve_lindblad,
    fidelity,
)
from .hamiltonian import (
    DECOUPLED,
    SegmentConfig,
    build_effective_hamiltonian,
    build_full_hamiltonian,
)
from .hilbert import (
    OperatorMatrix,
    QuantumState,
    SystemLayout,
    annihilation,
    basis_ket,
    build_layout,
    creation,
    qubit_ops,
    total_excitation_operator,
)
from .parameters import (
    FarDetuningError,
    ParameterError,
    PhysicalParams,
    magnon_frequency_from_field,
    paper_params,
)
from .protocol import (
    ENGINES,
    IsoprobabilityUnattainable,
    ProtocolSchedule,
    TargetState,
    analytic_coefficients,
    execute,
    isoprobability_time,
    n_magnon_schedule,
    target_state,
    two_magnon_bell_schedule,
)
from .sweeps import SweepResult, SweepSpec, probability_trace, run_sweep

__all__ = [
    "CollapseSet",
    "DECOUPLED",
    "ENGINES",
    "FarDetuningError",
    "IntegrationError",
    "IsoprobabilityUnattainable",
    "OperatorMatrix",
    "ParameterError",
    "PhysicalParams",
    "PositivityError",
    "ProtocolSchedule",
    "QuantumState",
    "SegmentConfig",
    "SimulationResult",
    "StepControl",
    "SweepResult",
    "SweepSpec",
    "SystemLayout",
    "TargetState",
    "analytic_coefficients",
    "annihilation",
    "basis_ket",
    "build_effective_hamiltonian",
    "build_full_hamiltonian",
    "build_layout",
    "creation",
    "evolve_ket",
    "evolve_lindblad",
    "execute",
    "fidelity",
    "isoprobability_time",
    "magnon_frequency_from_field",
    "n_magnon_schedule",
    "paper_params",
    "probability_trace",
    "qubit_ops",
    "run_sweep",
    "target_state",
    "total_excitation_operator",
    "two_magnon_bell_schedule",
]

__version__ = "0.1.0"
