"""Piecewise-constant time evolution, gate fidelity and population integrals."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
import scipy.linalg

from rydswap.errors import ConfigurationError, InputError
from rydswap.hamiltonian import (
    DIM,
    IDX_RPR,
    IDX_RRP,
    QUBIT_INDICES,
    RYDBERG_OCCUPATION,
    SCHEME_CHANNELS,
    DriveChannel,
    GateTarget,
    Scheme,
    SystemConfig,
    drive_hamiltonians,
    project_to_qubit,
    static_hamiltonian,
)

DEFAULT_SUBSTEPS = 8


class Modulation(str, enum.Enum):
    RABI = "rabi"
    PHASE = "phase"


@dataclass(frozen=True)
class PulseProtocol:
    """Piecewise-constant control pulse.

    ``controls`` holds Rabi arrays (rad/s) for Rabi modulation and phase
    arrays (rad) for phase modulation; in the latter case every channel is
    driven at the constant Rabi frequency ``omega0``.
    """

    scheme: Scheme
    modulation: Modulation
    duration: float
    controls: Mapping[DriveChannel, np.ndarray]
    omega0: float = 1.0
    v_over_omega: float | None = None

    def __post_init__(self):
        scheme = Scheme(self.scheme)
        modulation = Modulation(self.modulation)
        controls = {DriveChannel(k): np.array(v, dtype=float) for k, v in self.controls.items()}
        expected = SCHEME_CHANNELS[scheme]
        if set(controls) != set(expected):
            raise InputError(
                f"scheme {scheme.value} needs controls for {[c.value for c in expected]}, "
                f"got {[c.value for c in controls]}"
            )
        lengths = {v.shape for v in controls.values()}
        if len(lengths) != 1 or len(next(iter(lengths))) != 1:
            raise InputError("all control arrays must be 1-D with equal length")
        n = next(iter(controls.values())).size
        if n < 2:
            raise InputError("a pulse needs at least two segments")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise InputError(f"duration must be positive, got {self.duration}")
        for ch, arr in controls.items():
            if not np.all(np.isfinite(arr)):
                raise InputError(f"non-finite control values on {ch.value}")
            if modulation is Modulation.RABI and np.any(arr < 0):
                raise InputError(f"negative Rabi frequency on {ch.value}")
        if modulation is Modulation.PHASE and not (self.omega0 > 0):
            raise InputError("phase-modulated pulses need omega0 > 0")
        ordered = {ch: controls[ch] for ch in expected}
        for arr in ordered.values():
            arr.setflags(write=False)
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "modulation", modulation)
        object.__setattr__(self, "controls", ordered)
        object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "omega0", float(self.omega0))

    @property
    def channels(self) -> tuple[DriveChannel, ...]:
        return SCHEME_CHANNELS[self.scheme]

    @property
    def segments(self) -> int:
        return next(iter(self.controls.values())).size

    @property
    def dt(self) -> float:
        return self.duration / self.segments

    def control_matrix(self) -> np.ndarray:
        return np.vstack([self.controls[ch] for ch in self.channels])

    def rabi_matrix(self) -> np.ndarray:
        if self.modulation is Modulation.RABI:
            return self.control_matrix()
        return np.full((len(self.channels), self.segments), self.omega0)

    def phase_matrix(self) -> np.ndarray:
        if self.modulation is Modulation.PHASE:
            return self.control_matrix()
        return np.zeros((len(self.channels), self.segments))

    @property
    def omega_max(self) -> float:
        """Largest Rabi frequency over all channels and segments."""
        return float(self.rabi_matrix().max())

    def with_controls(self, matrix: np.ndarray, **changes) -> "PulseProtocol":
        controls = {ch: row for ch, row in zip(self.channels, np.asarray(matrix, dtype=float))}
        return replace(self, controls=controls, **changes)


@dataclass(frozen=True)
class EvolutionResult:
    final_operator: np.ndarray
    t_int: float
    t_ryd: float
    t_int_per_state: np.ndarray = field(repr=False)
    t_ryd_per_state: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    trajectory_populations: np.ndarray | None = field(default=None, repr=False)


def _exponentials(h: np.ndarray, dt: float, hermitian: bool) -> np.ndarray:
    if hermitian:
        evals, evecs = np.linalg.eigh(h)
        phases = np.exp(-1j * dt * evals)
        return (evecs * phases[:, None, :]) @ np.conj(np.swapaxes(evecs, -1, -2))
    return scipy.linalg.expm(-1j * dt * h)


def evolve(
    h_steps: np.ndarray,
    dt: float,
    hermitian: bool,
    repeats: int = 1,
    initial_states: np.ndarray | None = None,
    record_populations: bool = False,
) -> EvolutionResult:
    """Evolve under a stack of constant Hamiltonians, each applied ``repeats`` times for ``dt``.

    Population integrals use the trapezoid rule on the step grid and are
    averaged over the columns of ``initial_states`` (default: qubit basis).
    """
    if initial_states is None:
        initial_states = np.eye(DIM, dtype=complex)[:, QUBIT_INDICES]
    psi = np.asarray(initial_states, dtype=complex)
    if psi.ndim == 1:
        psi = psi[:, None]
    steps = _exponentials(h_steps, dt, hermitian)
    n_total = len(steps) * repeats

    weights_int = np.zeros(DIM)
    weights_int[[IDX_RRP, IDX_RPR]] = 1.0

    pops = np.empty((n_total + 1, DIM, psi.shape[1]))
    u_total = np.eye(DIM, dtype=complex)
    pops[0] = np.abs(psi) ** 2
    i = 0
    for step in steps:
        for _ in range(repeats):
            u_total = step @ u_total
            i += 1
            pops[i] = np.abs(u_total @ psi) ** 2

    int_series = np.einsum("d,kds->ks", weights_int, pops)
    ryd_series = np.einsum("d,kds->ks", RYDBERG_OCCUPATION, pops)
    t_int_states = dt * (int_series.sum(axis=0) - 0.5 * (int_series[0] + int_series[-1]))
    t_ryd_states = dt * (ryd_series.sum(axis=0) - 0.5 * (ryd_series[0] + ryd_series[-1]))
    return EvolutionResult(
        final_operator=u_total,
        t_int=float(t_int_states.mean()),
        t_ryd=float(t_ryd_states.mean()),
        t_int_per_state=t_int_states,
        t_ryd_per_state=t_ryd_states,
        times=dt * np.arange(n_total + 1),
        trajectory_populations=pops if record_populations else None,
    )


def segment_hamiltonians(config: SystemConfig, pulse: PulseProtocol, detunings=None) -> np.ndarray:
    if pulse.scheme is not config.scheme:
        raise ConfigurationError(
            f"pulse scheme {pulse.scheme.value} does not match system scheme {config.scheme.value}"
        )
    h = drive_hamiltonians(pulse.channels, pulse.rabi_matrix(), pulse.phase_matrix())
    h += static_hamiltonian(config.v_dipole, detunings, config.gamma_r, config.gamma_rp)
    return h


def propagate(
    config: SystemConfig,
    pulse: PulseProtocol,
    substeps_per_segment: int = DEFAULT_SUBSTEPS,
    initial_states: np.ndarray | None = None,
    record_populations: bool = False,
) -> EvolutionResult:
    """Noise-free evolution of ``pulse`` under ``config``."""
    from rydswap.noise import NoiseDraw, noisy_propagate

    return noisy_propagate(
        config,
        pulse,
        NoiseDraw(),
        substeps_per_segment,
        initial_states=initial_states,
        record_populations=record_populations,
    )


def gate_fidelity(result: EvolutionResult | np.ndarray, target: GateTarget) -> float:
    u = result.final_operator if isinstance(result, EvolutionResult) else np.asarray(result)
    overlap = np.trace(np.conj(target.matrix).T @ project_to_qubit(u))
    return float(abs(overlap) / 4.0)


def exchange_phase(result: EvolutionResult, config: SystemConfig) -> float:
    return result.t_int * config.v_dipole
