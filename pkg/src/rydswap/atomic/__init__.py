"""88Sr atomic data from quantum-defect theory."""

from rydswap.atomic.decay import (
    C3_ANCHOR,
    DecayChannel,
    DecayReport,
    ScalingPoint,
    c3_coefficient,
    decay_rate,
    lifetime,
    partial_rate,
    power_law_exponent,
    rabi_factor,
    scaling_laws,
    transition_wavelength,
)
from rydswap.atomic.dipole import (
    pair_strength,
    radial_integral,
    radial_parameters,
    radial_wavefunction,
    reduced_dipole,
)
from rydswap.atomic.qd import (
    SR88,
    AtomConstants,
    QdModel,
    Series,
    default_model,
    effective_n,
    level_energy,
    load_qd_model,
    quantum_defect,
)
from rydswap.atomic.wigner import clebsch_gordan, wigner_3j, wigner_6j

__all__ = [
    "AtomConstants",
    "C3_ANCHOR",
    "DecayChannel",
    "DecayReport",
    "QdModel",
    "SR88",
    "ScalingPoint",
    "Series",
    "c3_coefficient",
    "clebsch_gordan",
    "decay_rate",
    "default_model",
    "effective_n",
    "level_energy",
    "lifetime",
    "load_qd_model",
    "pair_strength",
    "partial_rate",
    "power_law_exponent",
    "quantum_defect",
    "rabi_factor",
    "radial_integral",
    "radial_parameters",
    "radial_wavefunction",
    "reduced_dipole",
    "scaling_laws",
    "transition_wavelength",
    "wigner_3j",
    "wigner_6j",
]
