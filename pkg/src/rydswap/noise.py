"""Stochastic noise channels, noisy propagation and Monte-Carlo budgets.

Atomic motion follows the frozen-gas picture: positions and velocities are
drawn once per shot. Laser phase and intensity noise are synthesised from
one-sided PSDs as random-phase cosine sums and vary on the substep grid.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import constants

from rydswap.errors import ConfigurationError, DomainError, InputError
from rydswap.hamiltonian import (
    DriveChannel,
    GateTarget,
    Scheme,
    SystemConfig,
    drive_hamiltonians,
    embed_target,
    static_hamiltonian,
)
from rydswap.propagation import (
    DEFAULT_SUBSTEPS,
    EvolutionResult,
    PulseProtocol,
    evolve,
    gate_fidelity,
    segment_hamiltonians,
)

log = logging.getLogger(__name__)

HBAR = constants.hbar
K_B = constants.k
SR88_MASS = 87.9056122571 * constants.atomic_mass
AXES = ("x", "y", "z")


class NoiseSource(str, enum.Enum):
    INTERACTION = "interaction"
    DOPPLER = "doppler"
    DECAY = "decay"
    LASER_PHASE = "laser_phase"
    LASER_INTENSITY = "laser_intensity"


ALL_COMBINED = "all_combined"


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic tweezer parameters. ``c3`` in rad/s * m^3, separation along x."""

    omega_xy: float
    omega_z: float
    temperature: float
    mass: float = SR88_MASS
    separation: float = 6.8e-6
    c3: float = 2 * np.pi * 1570.34e6 * 1e-18
    zero_temperature: bool = False

    def __post_init__(self):
        for name in ("omega_xy", "omega_z", "mass", "separation", "c3"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if not self.zero_temperature and not (self.temperature > 0):
            raise DomainError(
                f"temperature must be > 0 K (use zero_temperature=True for the T -> 0 limit), "
                f"got {self.temperature}"
            )

    @property
    def v_dipole(self) -> float:
        return self.c3 / self.separation**3

    @property
    def axis_frequencies(self) -> np.ndarray:
        return np.array([self.omega_xy, self.omega_xy, self.omega_z])

    def occupation(self) -> np.ndarray:
        """Thermal phonon number per axis."""
        if self.zero_temperature:
            return np.zeros(3)
        x = HBAR * self.axis_frequencies / (K_B * self.temperature)
        return 1.0 / np.expm1(x)


@dataclass(frozen=True)
class WavevectorConfig:
    """Effective wavevector (rad/m) per drive channel and axis."""

    k_eff: Mapping[DriveChannel, np.ndarray]

    def __post_init__(self):
        table = {}
        for ch, vec in self.k_eff.items():
            arr = np.asarray(vec, dtype=float).reshape(3)
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"non-finite wavevector on {DriveChannel(ch).value}")
            table[DriveChannel(ch)] = arr
        object.__setattr__(self, "k_eff", table)

    @classmethod
    def uniform(cls, channels: Iterable[DriveChannel], kx: float, ky: float = 0.0, kz: float = 0.0):
        return cls({ch: np.array([kx, ky, kz]) for ch in channels})

    def vector(self, channel: DriveChannel) -> np.ndarray:
        return self.k_eff.get(DriveChannel(channel), np.zeros(3))


@dataclass(frozen=True)
class PsdTable:
    """One-sided PSD: rad^2/Hz for phase, 1/Hz for relative intensity."""

    kind: str
    frequencies: np.ndarray
    densities: np.ndarray

    def __post_init__(self):
        if self.kind not in ("phase", "intensity"):
            raise InputError(f"PSD kind must be 'phase' or 'intensity', got {self.kind!r}")
        f = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.densities, dtype=float)
        if f.ndim != 1 or f.shape != s.shape or f.size == 0:
            raise InputError("PSD needs matching 1-D frequency and density columns")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise InputError("PSD frequencies must be strictly increasing")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise InputError("PSD densities must be finite and non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "densities", s)

    def __call__(self, f: np.ndarray) -> np.ndarray:
        """Linear interpolation inside the table, zero outside."""
        f = np.asarray(f, dtype=float)
        inside = (f >= self.frequencies[0]) & (f <= self.frequencies[-1])
        out = np.zeros_like(f)
        out[inside] = np.interp(f[inside], self.frequencies, self.densities)
        return out

    def covers(self, f_low: float, f_high: float) -> bool:
        return self.frequencies[0] <= f_low and self.frequencies[-1] >= f_high

    def scaled(self, factor: float) -> "PsdTable":
        return replace(self, densities=self.densities * factor)

    @classmethod
    def white(cls, kind: str, level: float, f_max: float, points: int = 2):
        return cls(kind, np.linspace(0.0, f_max, points), np.full(points, float(level)))


@dataclass
class BudgetEntry:
    mean: float
    stderr: float
    shots: int


@dataclass
class NoiseBudget:
    entries: dict[str, BudgetEntry]
    noise_free: float

    def __getitem__(self, source) -> BudgetEntry:
        key = source.value if isinstance(source, NoiseSource) else source
        return self.entries[key]

    def rows(self) -> list[tuple[str, float, float, int]]:
        rows = [("noise_free", self.noise_free, 0.0, 1)]
        rows += [(k, e.mean, e.stderr, e.shots) for k, e in self.entries.items()]
        return rows


# ---------------------------------------------------------------------------
# Thermal motion


def position_sigma(trap: TrapConfig) -> np.ndarray:
    """Per-axis position standard deviation (m)."""
    nbar = trap.occupation()
    return np.sqrt(HBAR * (1 + 2 * nbar) / (2 * trap.mass * trap.axis_frequencies))


def velocity_sigma(trap: TrapConfig) -> np.ndarray:
    """Per-axis velocity standard deviation (m/s)."""
    nbar = trap.occupation()
    return np.sqrt(HBAR * trap.axis_frequencies * (1 + 2 * nbar) / (2 * trap.mass))


def doppler_sigma(trap: TrapConfig, wavevectors: WavevectorConfig) -> dict[DriveChannel, float]:
    """Detuning standard deviation per channel (rad/s), sum_alpha k_alpha * dv_alpha."""
    dv = velocity_sigma(trap)
    return {ch: float(np.dot(k, dv)) for ch, k in wavevectors.k_eff.items()}


def sample_interaction(trap: TrapConfig, rng: np.random.Generator, displacements: np.ndarray | None = None) -> float:
    """Perturbed exchange strength C3 / R~^3 for one frozen-gas shot."""
    sigma = position_sigma(trap)
    nominal = np.array([trap.separation, 0.0, 0.0])
    while True:
        delta = rng.normal(0.0, 1.0, size=(2, 3)) * sigma if displacements is None else np.asarray(displacements)
        r = np.linalg.norm(nominal + delta[1] - delta[0])
        if r > 0:
            return trap.c3 / r**3
        if displacements is not None:
            raise InputError("forced displacements place the atoms on top of each other")


def channel_to_state_detunings(scheme: Scheme, channel_detunings: Mapping[DriveChannel, float]) -> np.ndarray:
    """Map laser Doppler shifts onto (delta1, deltar, deltarp) of one atom.

    Energies are referenced to |0>; each level inherits the shifts of the
    drives that connect it to |0> in the active scheme.
    """
    d = {ch: channel_detunings.get(ch, 0.0) for ch in DriveChannel}
    if Scheme(scheme) is Scheme.A:
        d1 = 0.0
        dr = d[DriveChannel.CH1R]
        drp = d[DriveChannel.CH0RP]
    else:
        d1 = d[DriveChannel.CH01]
        dr = d1 + d[DriveChannel.CH1R]
        drp = dr + d[DriveChannel.CHRRP]
    return np.array([d1, dr, drp])


def sample_doppler(
    trap: TrapConfig,
    wavevectors: WavevectorConfig,
    scheme: Scheme,
    rng: np.random.Generator,
    shared: bool = False,
    velocities: np.ndarray | None = None,
) -> np.ndarray:
    """Per-atom state detunings, shape (2, 3), from one velocity draw per atom."""
    if velocities is None:
        dv = velocity_sigma(trap)
        n_atoms = 1 if shared else 2
        velocities = rng.normal(0.0, 1.0, size=(n_atoms, 3)) * dv
        if shared:
            velocities = np.vstack([velocities, velocities])
    velocities = np.asarray(velocities, dtype=float).reshape(2, 3)
    out = np.empty((2, 3))
    for atom in range(2):
        shifts = {ch: float(np.dot(k, velocities[atom])) for ch, k in wavevectors.k_eff.items()}
        out[atom] = channel_to_state_detunings(scheme, shifts)
    return out


def psd_frequency_grid(duration: float, dt: float, padding: int = 4) -> np.ndarray:
    df = 1.0 / (padding * duration)
    f_max = 1.0 / (2.0 * dt)
    n = int(math.floor(f_max / df + 1e-9))
    return df * np.arange(1, n + 1)


def sample_psd_series(
    psd: PsdTable,
    duration: float,
    dt: float,
    rng: np.random.Generator,
    padding: int = 4,
    times: np.ndarray | None = None,
) -> np.ndarray:
    """Random-phase cosine synthesis of a noise trace from a one-sided PSD.

    The trace is evaluated at ``times`` (default: midpoints of the dt grid).
    """
    if not dt > 0:
        raise InputError("dt must be positive")
    if duration / dt < 2 - 1e-9:
        raise InputError("duration must span at least two time steps")
    if times is None:
        times = dt * (np.arange(int(round(duration / dt))) + 0.5)
    freqs = psd_frequency_grid(duration, dt, padding)
    df = 1.0 / (padding * duration)
    if freqs.size and not psd.covers(freqs[0], freqs[-1]):
        log.info(
            "%s PSD covers %.3g..%.3g Hz, sampling grid %.3g..%.3g Hz; zero outside",
            psd.kind, psd.frequencies[0], psd.frequencies[-1], freqs[0], freqs[-1],
        )
    amplitude = 2.0 * np.sqrt(psd(freqs) * df)
    phases = rng.uniform(0.0, 2 * np.pi, size=freqs.size)
    keep = amplitude > 0
    if not np.any(keep):
        return np.zeros(len(times))
    arg = 2 * np.pi * np.outer(times, freqs[keep]) + phases[keep]
    return np.cos(arg) @ amplitude[keep]


def series_variance(psd: PsdTable, duration: float, dt: float, padding: int = 4) -> float:
    """Analytic variance sum_j 2 S(f_j) df of :func:`sample_psd_series`."""
    freqs = psd_frequency_grid(duration, dt, padding)
    df = 1.0 / (padding * duration)
    return float(2.0 * np.sum(psd(freqs)) * df)


# ---------------------------------------------------------------------------
# Noisy evolution


@dataclass
class NoiseDraw:
    """One shot's worth of noise. ``None`` disables a channel.

    Laser series are sampled on the substep grid (length N * substeps).
    """

    v_dipole: float | None = None
    detunings: np.ndarray | None = None
    gammas: tuple[float, float] | None = None
    phase_noise: Mapping[DriveChannel, np.ndarray] | None = None
    intensity_noise: Mapping[DriveChannel, np.ndarray] | None = None


def noisy_propagate(
    config: SystemConfig,
    pulse: PulseProtocol,
    draw: NoiseDraw,
    substeps: int = DEFAULT_SUBSTEPS,
    initial_states: np.ndarray | None = None,
    record_populations: bool = False,
) -> EvolutionResult:
    if substeps < 1:
        raise InputError("substeps_per_segment must be >= 1")
    if pulse.scheme is not config.scheme:
        raise ConfigurationError(
            f"pulse scheme {pulse.scheme.value} does not match system scheme {config.scheme.value}"
        )
    cfg = config
    if draw.v_dipole is not None:
        cfg = replace(cfg, v_dipole=float(draw.v_dipole))
    if draw.gammas is not None:
        cfg = replace(cfg, gamma_r=float(draw.gammas[0]), gamma_rp=float(draw.gammas[1]))
    hermitian = not cfg.has_decay
    dt_sub = pulse.dt / substeps

    if draw.phase_noise is None and draw.intensity_noise is None:
        h = segment_hamiltonians(cfg, pulse, draw.detunings)
        return evolve(h, dt_sub, hermitian, repeats=substeps,
                      initial_states=initial_states, record_populations=record_populations)

    n_sub = pulse.segments * substeps
    rabi = np.repeat(pulse.rabi_matrix(), substeps, axis=1)
    phase = np.repeat(pulse.phase_matrix(), substeps, axis=1)
    for c, ch in enumerate(pulse.channels):
        if draw.intensity_noise is not None and ch in draw.intensity_noise:
            alpha = np.asarray(draw.intensity_noise[ch], dtype=float)
            if alpha.shape != (n_sub,):
                raise InputError(f"intensity noise on {ch.value} must have length {n_sub}")
            rabi[c] = rabi[c] * (1.0 + 0.5 * alpha)
        if draw.phase_noise is not None and ch in draw.phase_noise:
            dphi = np.asarray(draw.phase_noise[ch], dtype=float)
            if dphi.shape != (n_sub,):
                raise InputError(f"phase noise on {ch.value} must have length {n_sub}")
            phase[c] = phase[c] + dphi
    h = drive_hamiltonians(pulse.channels, rabi, phase)
    h += static_hamiltonian(cfg.v_dipole, draw.detunings, cfg.gamma_r, cfg.gamma_rp)
    return evolve(h, dt_sub, hermitian, repeats=1,
                  initial_states=initial_states, record_populations=record_populations)


@dataclass(frozen=True)
class NoiseConfig:
    """Everything a Monte-Carlo budget needs besides the pulse."""

    trap: TrapConfig | None = None
    wavevectors: WavevectorConfig | None = None
    gamma_r: float = 0.0
    gamma_rp: float = 0.0
    phase_psd: PsdTable | None = None
    intensity_psd: PsdTable | None = None
    psd_padding: int = 4
    shared_doppler: bool = False


def draw_noise(
    sources: Sequence[NoiseSource],
    noise: NoiseConfig,
    pulse: PulseProtocol,
    substeps: int,
    seed_sequence: np.random.SeedSequence,
) -> NoiseDraw:
    """Draw every requested channel from its own child stream of ``seed_sequence``.

    Children are indexed by source so a channel's realisation does not
    depend on which other channels are active (matched streams).
    """
    children = dict(zip(NoiseSource, seed_sequence.spawn(len(NoiseSource))))
    draw = NoiseDraw()
    sources = set(NoiseSource(s) for s in sources)
    dt_sub = pulse.dt / substeps
    if NoiseSource.INTERACTION in sources:
        if noise.trap is None:
            raise ConfigurationError("interaction noise needs a trap configuration")
        draw.v_dipole = sample_interaction(noise.trap, np.random.default_rng(children[NoiseSource.INTERACTION]))
    if NoiseSource.DOPPLER in sources:
        if noise.trap is None or noise.wavevectors is None:
            raise ConfigurationError("Doppler noise needs trap and wavevector configurations")
        draw.detunings = sample_doppler(
            noise.trap, noise.wavevectors, pulse.scheme,
            np.random.default_rng(children[NoiseSource.DOPPLER]), shared=noise.shared_doppler,
        )
    if NoiseSource.DECAY in sources:
        draw.gammas = (noise.gamma_r, noise.gamma_rp)
    for source, psd, attr in (
        (NoiseSource.LASER_PHASE, noise.phase_psd, "phase_noise"),
        (NoiseSource.LASER_INTENSITY, noise.intensity_psd, "intensity_noise"),
    ):
        if source not in sources:
            continue
        if psd is None:
            raise ConfigurationError(f"{source.value} noise requested without a PSD table")
        rng = np.random.default_rng(children[source])
        series = {
            ch: sample_psd_series(psd, pulse.duration, dt_sub, rng, padding=noise.psd_padding)
            for ch in pulse.channels
        }
        setattr(draw, attr, series)
    return draw


def _mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


_DETERMINISTIC = {NoiseSource.DECAY}


def noise_budget(
    config: SystemConfig,
    pulse: PulseProtocol,
    noise: NoiseConfig,
    shots: int,
    seed: int,
    sources: Sequence[NoiseSource] | None = None,
    target: GateTarget | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    combined: bool = True,
) -> NoiseBudget:
    """Mean infidelity per noise source and for all requested sources together.

    Shot ``s`` draws from ``SeedSequence(seed, spawn_key=(s,))`` for every
    source configuration, so single-source and combined runs see the same
    realisations. Decay alone is deterministic and evaluated once.
    """
    if shots < 1:
        raise InputError("shots must be >= 1")
    target = target or embed_target(np.pi)
    base = replace(config, gamma_r=0.0, gamma_rp=0.0)
    noise_free = 1.0 - gate_fidelity(noisy_propagate(base, pulse, NoiseDraw(), substeps), target)
    if sources is None:
        sources = [s for s in NoiseSource if _source_available(s, noise)]
    sources = [NoiseSource(s) for s in sources]

    runs: list[tuple[str, list[NoiseSource]]] = [(s.value, [s]) for s in sources]
    if combined and sources:
        runs.append((ALL_COMBINED, list(sources)))

    entries: dict[str, BudgetEntry] = {}
    for name, active in runs:
        n = 1 if set(active) <= _DETERMINISTIC else shots
        values = []
        for s in range(n):
            ss = np.random.SeedSequence(seed, spawn_key=(s,))
            draw = draw_noise(active, noise, pulse, substeps, ss)
            values.append(1.0 - gate_fidelity(noisy_propagate(base, pulse, draw, substeps), target))
        mean, err = _mean_stderr(values)
        entries[name] = BudgetEntry(mean=mean, stderr=err, shots=n)
    return NoiseBudget(entries=entries, noise_free=noise_free)


def _source_available(source: NoiseSource, noise: NoiseConfig) -> bool:
    if source is NoiseSource.INTERACTION:
        return noise.trap is not None
    if source is NoiseSource.DOPPLER:
        return noise.trap is not None and noise.wavevectors is not None
    if source is NoiseSource.DECAY:
        return noise.gamma_r > 0 or noise.gamma_rp > 0
    if source is NoiseSource.LASER_PHASE:
        return noise.phase_psd is not None
    return noise.intensity_psd is not None
