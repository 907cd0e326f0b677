"""Fidelity response theory for laser phase and intensity noise.

To first order in a weak stationary perturbation ``eps(t) * O(t)`` the gate
infidelity is ``int S(f) I(f) df`` where

    I(f) = int int dt dtau cos(2 pi f (t - tau)) <O_H(t) O_H(tau)>_c

and ``O_H`` is the noise operator in the Heisenberg picture of the
noise-free pulse. With ``A(f) = int dt exp(-2 pi i f t) O_H(t)`` this
factorizes into ``(<A A^+> + <A^+ A>) / 2 - |<A>|^2``.

``basis_average`` uses the maximally mixed qubit state, which is the
average under which the first-order expansion of the gate fidelity holds
exactly. ``state_list`` averages the connected correlator over the given
pure states.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from rydswap.errors import ConfigurationError, InputError
from rydswap.hamiltonian import (
    DIM,
    QUBIT_INDICES,
    SCHEME_CHANNELS,
    ControlSnapshot,
    DriveChannel,
    Scheme,
    SystemConfig,
    drive_hamiltonians,
    drive_operator,
    static_hamiltonian,
)
from rydswap.noise import PsdTable
from rydswap.propagation import DEFAULT_SUBSTEPS, PulseProtocol


class NoiseKind(str, enum.Enum):
    PHASE = "phase"
    INTENSITY = "intensity"


class StateAverage(str, enum.Enum):
    BASIS = "basis_average"
    STATES = "state_list"


@dataclass(frozen=True)
class NoiseOperatorKind:
    kind: NoiseKind
    channel: DriveChannel

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        object.__setattr__(self, "channel", DriveChannel(self.channel))

    def check_scheme(self, scheme: Scheme) -> None:
        if self.channel not in SCHEME_CHANNELS[Scheme(scheme)]:
            raise ConfigurationError(f"channel {self.channel.value} is not driven in scheme {Scheme(scheme).value}")


@dataclass
class ResponseSpectrum:
    frequencies: np.ndarray
    values: dict[NoiseOperatorKind, np.ndarray]
    state_average: StateAverage = StateAverage.BASIS
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.ndim != 1 or (f.size > 1 and np.any(np.diff(f) <= 0)):
            raise InputError("spectrum frequencies must be strictly ascending")
        self.frequencies = f

    def total(self, kind: NoiseKind | None = None) -> np.ndarray:
        out = np.zeros_like(self.frequencies)
        for key, vals in self.values.items():
            if kind is None or key.kind is NoiseKind(kind):
                out = out + vals
        return out


def _operator(kind: NoiseKind, channel: DriveChannel, rabi: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Stacked noise operators for arrays of Rabi frequency and phase."""
    x = drive_operator(channel)
    e = np.exp(1j * np.asarray(phase, dtype=float))[..., None, None]
    rabi = np.asarray(rabi, dtype=float)[..., None, None]
    if NoiseKind(kind) is NoiseKind.PHASE:
        return 0.5 * rabi * (1j * e * x - 1j * np.conj(e) * x.T)
    return 0.25 * rabi * (e * x + np.conj(e) * x.T)


def noise_operator(kind: NoiseKind, channel: DriveChannel, snapshot: ControlSnapshot) -> np.ndarray:
    """First-order change of H per unit phase offset or relative intensity."""
    channel = DriveChannel(channel)
    return _operator(kind, channel, snapshot.rabi.get(channel, 0.0), snapshot.phase.get(channel, 0.0))


def default_grid(pulse: PulseProtocol, points: int = 400) -> np.ndarray:
    """0 plus log-spaced low frequencies plus a linear tail to 10 * Omega_max / 2 pi."""
    f_max = 10.0 * pulse.omega_max / (2 * np.pi)
    if not f_max > 0:
        return np.linspace(0.0, 1.0, points)
    n_log = points // 2
    low = np.geomspace(f_max * 1e-4, f_max / 10, n_log, endpoint=False)
    high = np.linspace(f_max / 10, f_max, points - n_log - 1)
    return np.concatenate([[0.0], low, high])


def _states(state_average: StateAverage, states: np.ndarray | None) -> np.ndarray:
    if StateAverage(state_average) is StateAverage.BASIS:
        return np.eye(DIM, dtype=complex)[:, QUBIT_INDICES]
    if states is None:
        raise InputError("state_list averaging needs explicit states")
    s = np.asarray(states, dtype=complex)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[0] != DIM:
        raise InputError(f"states must have {DIM} rows")
    norms = np.linalg.norm(s, axis=0)
    if np.any(norms == 0):
        raise InputError("zero state in state list")
    return s / norms


def response_function(
    config: SystemConfig,
    pulse: PulseProtocol,
    kind: NoiseKind,
    channel: DriveChannel | None = None,
    frequencies: np.ndarray | None = None,
    state_average: StateAverage = StateAverage.BASIS,
    states: np.ndarray | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    method: str = "factorized",
) -> ResponseSpectrum:
    """Response functions for one noise kind on one channel (or all channels).

    The decay terms of ``config`` are ignored: the Heisenberg picture is
    taken along the unitary noise-free trajectory.
    """
    freqs = default_grid(pulse) if frequencies is None else np.asarray(frequencies, dtype=float)
    if np.any(freqs < 0):
        raise InputError("frequencies must be >= 0")
    config = replace(config, gamma_r=0.0, gamma_rp=0.0)
    channels = pulse.channels if channel is None else (DriveChannel(channel),)
    keys = [NoiseOperatorKind(kind, ch) for ch in channels]
    for key in keys:
        key.check_scheme(pulse.scheme)
    avg = StateAverage(state_average)
    psi0 = _states(avg, states)
    traj = _trajectory_unitaries(config, pulse, substeps)
    values = {}
    for key in keys:
        if method == "factorized":
            values[key] = _factorized(traj, key, psi0, freqs, avg is StateAverage.BASIS)
        elif method == "direct":
            values[key] = _direct(traj, key, psi0, freqs, avg is StateAverage.BASIS)
        else:
            raise InputError(f"unknown method {method!r}")
    return ResponseSpectrum(freqs, values, avg, meta={"substeps": substeps, "method": method})


@dataclass
class _Unitaries:
    times: np.ndarray
    weight: float
    unitaries: np.ndarray  # (K, 16, 16) U(t_k) at substep midpoints
    rabi: np.ndarray
    phase: np.ndarray
    channels: tuple


def _trajectory_unitaries(config: SystemConfig, pulse: PulseProtocol, substeps: int) -> _Unitaries:
    if substeps < 1:
        raise InputError("substeps must be >= 1")
    if pulse.scheme is not config.scheme:
        raise ConfigurationError("pulse and system schemes differ")
    dt = pulse.dt / substeps
    h = drive_hamiltonians(pulse.channels, pulse.rabi_matrix(), pulse.phase_matrix())
    h = h + static_hamiltonian(config.v_dipole)
    evals, q = np.linalg.eigh(h)
    qh = np.conj(np.swapaxes(q, -1, -2))
    full = (q * np.exp(-1j * dt * evals)[:, None, :]) @ qh
    half = (q * np.exp(-0.5j * dt * evals)[:, None, :]) @ qh
    k_total = pulse.segments * substeps
    out = np.empty((k_total, DIM, DIM), dtype=complex)
    u = np.eye(DIM, dtype=complex)
    k = 0
    for seg in range(pulse.segments):
        for _ in range(substeps):
            out[k] = half[seg] @ u
            u = full[seg] @ u
            k += 1
    return _Unitaries(
        times=dt * (np.arange(k_total) + 0.5),
        weight=dt,
        unitaries=out,
        rabi=np.repeat(pulse.rabi_matrix(), substeps, axis=1),
        phase=np.repeat(pulse.phase_matrix(), substeps, axis=1),
        channels=pulse.channels,
    )


def _heisenberg_on_states(traj: _Unitaries, key: NoiseOperatorKind, psi0: np.ndarray) -> np.ndarray:
    """v[k] = U_k^+ O_k U_k psi0, shape (K, 16, S)."""
    c = traj.channels.index(key.channel)
    ops = _operator(key.kind, key.channel, traj.rabi[c], traj.phase[c])
    u = traj.unitaries
    return np.conj(np.swapaxes(u, -1, -2)) @ (ops @ (u @ psi0))


def _factorized(traj: _Unitaries, key, psi0, freqs, mixed: bool) -> np.ndarray:
    v = _heisenberg_on_states(traj, key, psi0)
    k, d, s = v.shape
    kernel = np.exp(-2j * np.pi * np.outer(freqs, traj.times)) * traj.weight  # (F, K)
    flat = v.reshape(k, d * s)
    a_psi = (kernel @ flat).reshape(len(freqs), d, s)
    adag_psi = (np.conj(kernel) @ flat).reshape(len(freqs), d, s)
    aad = np.sum(np.abs(adag_psi) ** 2, axis=1)  # <A A^+>
    ada = np.sum(np.abs(a_psi) ** 2, axis=1)  # <A^+ A>
    mean = np.einsum("ds,fds->fs", np.conj(psi0), a_psi)
    if mixed:
        return 0.5 * (aad.mean(axis=1) + ada.mean(axis=1)) - np.abs(mean.mean(axis=1)) ** 2
    return np.mean(0.5 * (aad + ada) - np.abs(mean) ** 2, axis=1)


def _direct(traj: _Unitaries, key, psi0, freqs, mixed: bool) -> np.ndarray:
    """O(K^2) double sum of the connected correlator (validation oracle)."""
    c = traj.channels.index(key.channel)
    ops = _operator(key.kind, key.channel, traj.rabi[c], traj.phase[c])
    u = traj.unitaries
    o_h = np.conj(np.swapaxes(u, -1, -2)) @ ops @ u  # (K, 16, 16)
    if mixed:
        rho = psi0 @ np.conj(psi0).T / psi0.shape[1]
        prod = np.einsum("ab,kbc,lca->kl", rho, o_h, o_h)
        mean = np.einsum("ab,kba->k", rho, o_h)
        corr = prod - np.outer(mean, mean)
    else:
        corr = np.zeros((len(o_h), len(o_h)), dtype=complex)
        for s in range(psi0.shape[1]):
            p = psi0[:, s]
            left = np.einsum("a,kab->kb", np.conj(p), o_h)
            right = np.einsum("lbc,c->lb", o_h, p)
            mean = left @ p
            corr += left @ right.T - np.outer(mean, mean)
        corr /= psi0.shape[1]
    dtau = traj.times[:, None] - traj.times[None, :]
    w2 = traj.weight**2
    out = np.empty(len(freqs))
    for i, f in enumerate(freqs):
        out[i] = w2 * np.real(np.sum(np.cos(2 * np.pi * f * dtau) * corr))
    return out


def frt_infidelity(
    spectrum: ResponseSpectrum,
    psd: PsdTable | Mapping[str, PsdTable],
) -> float:
    """Trapezoid integral of S(f) I(f) summed over channels of matching kind."""
    tables = {psd.kind: psd} if isinstance(psd, PsdTable) else {NoiseKind(k).value: v for k, v in psd.items()}
    total = 0.0
    f = spectrum.frequencies
    for key, vals in spectrum.values.items():
        table = tables.get(key.kind.value)
        if table is None:
            continue
        total += float(np.trapezoid(table(f) * vals, f)) if f.size > 1 else 0.0
    return total


def frt_integrand(spectrum: ResponseSpectrum, psd: PsdTable) -> np.ndarray:
    return psd(spectrum.frequencies) * spectrum.total(psd.kind)


def zero_frequency_audit(
    config: SystemConfig,
    pulse: PulseProtocol,
    substeps: int = DEFAULT_SUBSTEPS,
) -> dict[DriveChannel, tuple[float, float]]:
    """Per-channel (I_phase(0), I_intensity(0)) under the basis average."""
    zero = np.array([0.0])
    phase = response_function(config, pulse, NoiseKind.PHASE, frequencies=zero, substeps=substeps)
    inten = response_function(config, pulse, NoiseKind.INTENSITY, frequencies=zero, substeps=substeps)
    out = {}
    for ch in pulse.channels:
        out[ch] = (
            float(phase.values[NoiseOperatorKind(NoiseKind.PHASE, ch)][0]),
            float(inten.values[NoiseOperatorKind(NoiseKind.INTENSITY, ch)][0]),
        )
    return out


def response_spectra(
    config: SystemConfig,
    pulse: PulseProtocol,
    kinds: Sequence[NoiseKind] = (NoiseKind.PHASE, NoiseKind.INTENSITY),
    frequencies: np.ndarray | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
) -> ResponseSpectrum:
    """All channels and kinds on one grid."""
    freqs = default_grid(pulse) if frequencies is None else np.asarray(frequencies, dtype=float)
    values = {}
    for kind in kinds:
        values.update(response_function(config, pulse, kind, frequencies=freqs, substeps=substeps).values)
    return ResponseSpectrum(freqs, values, StateAverage.BASIS, meta={"substeps": substeps})
