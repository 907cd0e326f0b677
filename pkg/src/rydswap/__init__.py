"""Pulse synthesis and noise budgeting for Rydberg exchange (iSWAP) gates."""

from rydswap.hamiltonian import (
    DriveChannel,
    GateTarget,
    Scheme,
    SystemConfig,
    ControlSnapshot,
    build_hamiltonian,
    embed_target,
    project_to_qubit,
)
from rydswap.propagation import (
    EvolutionResult,
    Modulation,
    PulseProtocol,
    exchange_phase,
    gate_fidelity,
    propagate,
)

__version__ = "0.1.0"

__all__ = [
    "ControlSnapshot",
    "DriveChannel",
    "EvolutionResult",
    "GateTarget",
    "Modulation",
    "PulseProtocol",
    "Scheme",
    "SystemConfig",
    "build_hamiltonian",
    "embed_target",
    "exchange_phase",
    "gate_fidelity",
    "project_to_qubit",
    "propagate",
]
