"""Two-atom, four-level state space and Hamiltonian assembly.

Single-atom levels are indexed 0 -> |0>, 1 -> |1>, 2 -> |r>, 3 -> |r'>.
Pair states use the row-major tensor index ``4 * a1 + a2`` so that the
qubit subspace |00>, |01>, |10>, |11> sits at indices (0, 1, 4, 5).

Everything is expressed with hbar = 1 and angular frequencies (rad/s).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from rydswap.errors import ConfigurationError, DomainError, InputError

LEVEL_0, LEVEL_1, LEVEL_R, LEVEL_RP = 0, 1, 2, 3
N_LEVELS = 4
DIM = N_LEVELS * N_LEVELS
QUBIT_INDICES = (0, 1, 4, 5)


def pair_index(a1: int, a2: int) -> int:
    if not (0 <= a1 < N_LEVELS and 0 <= a2 < N_LEVELS):
        raise InputError(f"level index out of range: ({a1}, {a2})")
    return N_LEVELS * a1 + a2


IDX_RRP = pair_index(LEVEL_R, LEVEL_RP)
IDX_RPR = pair_index(LEVEL_RP, LEVEL_R)


class Scheme(str, enum.Enum):
    A = "A"
    B = "B"


class DriveChannel(str, enum.Enum):
    CH01 = "ch01"
    CH1R = "ch1r"
    CH0RP = "ch0rp"
    CHRRP = "chrrp"

    @property
    def levels(self) -> tuple[int, int]:
        """(a, b) of the |b><a| term carrying exp(+i phi)."""
        return _CHANNEL_LEVELS[self]


_CHANNEL_LEVELS = {
    DriveChannel.CH01: (LEVEL_0, LEVEL_1),
    DriveChannel.CH1R: (LEVEL_1, LEVEL_R),
    DriveChannel.CH0RP: (LEVEL_0, LEVEL_RP),
    DriveChannel.CHRRP: (LEVEL_R, LEVEL_RP),
}

SCHEME_CHANNELS: dict[Scheme, tuple[DriveChannel, ...]] = {
    Scheme.A: (DriveChannel.CH1R, DriveChannel.CH0RP),
    Scheme.B: (DriveChannel.CH01, DriveChannel.CH1R, DriveChannel.CHRRP),
}


def _single(a: int, b: int) -> np.ndarray:
    m = np.zeros((N_LEVELS, N_LEVELS))
    m[b, a] = 1.0
    return m


def _both_atoms(op: np.ndarray) -> np.ndarray:
    eye = np.eye(N_LEVELS)
    return np.kron(op, eye) + np.kron(eye, op)


def _build_drive_ops() -> dict[DriveChannel, np.ndarray]:
    return {ch: _both_atoms(_single(*ch.levels)) for ch in DriveChannel}


_DRIVE_OPS = _build_drive_ops()


def drive_operator(channel: DriveChannel) -> np.ndarray:
    """Real 16x16 matrix sum_i |b>_i<a| for the channel's transition."""
    return _DRIVE_OPS[DriveChannel(channel)].copy()


def level_occupation(level: int) -> np.ndarray:
    """Number of atoms in ``level`` for every pair state (length-16 vector)."""
    occ = np.zeros(DIM)
    for a1 in range(N_LEVELS):
        for a2 in range(N_LEVELS):
            occ[pair_index(a1, a2)] = (a1 == level) + (a2 == level)
    return occ


RYDBERG_OCCUPATION = level_occupation(LEVEL_R) + level_occupation(LEVEL_RP)


def swap_permutation() -> np.ndarray:
    """Permutation matrix exchanging the two atoms."""
    p = np.zeros((DIM, DIM))
    for a1 in range(N_LEVELS):
        for a2 in range(N_LEVELS):
            p[pair_index(a2, a1), pair_index(a1, a2)] = 1.0
    return p


@dataclass(frozen=True)
class SystemConfig:
    v_dipole: float
    gamma_r: float = 0.0
    gamma_rp: float = 0.0
    scheme: Scheme = Scheme.A

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        for name in ("v_dipole", "gamma_r", "gamma_rp"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {value}")

    @property
    def channels(self) -> tuple[DriveChannel, ...]:
        return SCHEME_CHANNELS[self.scheme]

    @property
    def has_decay(self) -> bool:
        return self.gamma_r > 0 or self.gamma_rp > 0


def _zero_detunings() -> np.ndarray:
    return np.zeros((2, 3))


@dataclass(frozen=True)
class ControlSnapshot:
    """Drive values at one instant.

    ``detunings`` has shape (2, 3): per atom, (delta1, deltar, deltarp).
    """

    rabi: Mapping[DriveChannel, float]
    phase: Mapping[DriveChannel, float] = field(default_factory=dict)
    detunings: np.ndarray = field(default_factory=_zero_detunings)

    def __post_init__(self):
        rabi = {DriveChannel(k): float(v) for k, v in self.rabi.items()}
        phase = {DriveChannel(k): float(v) for k, v in self.phase.items()}
        for ch, value in rabi.items():
            if not np.isfinite(value) or value < 0:
                raise InputError(f"Rabi frequency on {ch.value} must be >= 0, got {value}")
        det = np.asarray(self.detunings, dtype=float)
        if det.shape == (3,):
            det = np.vstack([det, det])
        if det.shape != (2, 3):
            raise InputError(f"detunings must have shape (2, 3), got {det.shape}")
        object.__setattr__(self, "rabi", rabi)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "detunings", det)

    def check_scheme(self, scheme: Scheme) -> None:
        allowed = set(SCHEME_CHANNELS[Scheme(scheme)])
        extra = (set(self.rabi) | set(self.phase)) - allowed
        if extra:
            names = ", ".join(sorted(ch.value for ch in extra))
            raise ConfigurationError(f"channels {names} are not driven in scheme {Scheme(scheme).value}")


def static_hamiltonian(
    v_dipole: float,
    detunings: np.ndarray | None = None,
    gamma_r: float = 0.0,
    gamma_rp: float = 0.0,
) -> np.ndarray:
    """Exchange, Doppler detuning and non-Hermitian decay terms."""
    h = np.zeros((DIM, DIM), dtype=complex)
    h[IDX_RRP, IDX_RPR] = v_dipole
    h[IDX_RPR, IDX_RRP] = v_dipole
    diag = np.zeros(DIM, dtype=complex)
    if detunings is not None:
        det = np.asarray(detunings, dtype=float).reshape(2, 3)
        for a1 in range(N_LEVELS):
            for a2 in range(N_LEVELS):
                idx = pair_index(a1, a2)
                for atom, level in ((0, a1), (1, a2)):
                    if level != LEVEL_0:
                        diag[idx] -= det[atom, level - 1]
    if gamma_r or gamma_rp:
        diag -= 0.5j * (gamma_r * level_occupation(LEVEL_R) + gamma_rp * level_occupation(LEVEL_RP))
    h[np.diag_indices(DIM)] += diag
    return h


def drive_hamiltonians(
    channels: Sequence[DriveChannel],
    rabi: np.ndarray,
    phase: np.ndarray,
) -> np.ndarray:
    """Stack of drive terms, shape (K, 16, 16), for controls of shape (C, K)."""
    rabi = np.atleast_2d(np.asarray(rabi, dtype=float))
    phase = np.atleast_2d(np.asarray(phase, dtype=float))
    k = rabi.shape[1]
    h = np.zeros((k, DIM, DIM), dtype=complex)
    for c, ch in enumerate(channels):
        op = _DRIVE_OPS[ch]
        coupling = 0.5 * rabi[c] * np.exp(1j * phase[c])
        h += coupling[:, None, None] * op
        h += np.conj(coupling)[:, None, None] * op.T
    return h


def build_hamiltonian(config: SystemConfig, snapshot: ControlSnapshot) -> np.ndarray:
    """Full 16x16 H/hbar for one set of instantaneous controls."""
    snapshot.check_scheme(config.scheme)
    channels = config.channels
    rabi = np.array([[snapshot.rabi.get(ch, 0.0)] for ch in channels])
    phase = np.array([[snapshot.phase.get(ch, 0.0)] for ch in channels])
    h = drive_hamiltonians(channels, rabi, phase)[0]
    h += static_hamiltonian(config.v_dipole, snapshot.detunings, config.gamma_r, config.gamma_rp)
    return h


@dataclass(frozen=True)
class GateTarget:
    theta: float
    matrix: np.ndarray

    def embedded(self) -> np.ndarray:
        """16x16 matrix carrying the target on the qubit block, zero elsewhere."""
        out = np.zeros((DIM, DIM), dtype=complex)
        out[np.ix_(QUBIT_INDICES, QUBIT_INDICES)] = self.matrix
        return out


def exchange_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, 1j * s, 0],
            [0, 1j * s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def embed_target(theta: float) -> GateTarget:
    theta = float(theta)
    if not (0.0 < theta <= np.pi + 1e-12):
        raise DomainError(f"exchange angle must lie in (0, pi], got {theta}")
    return GateTarget(theta=theta, matrix=exchange_matrix(theta))


def project_to_qubit(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u)
    return u[..., QUBIT_INDICES, :][..., :, QUBIT_INDICES]
