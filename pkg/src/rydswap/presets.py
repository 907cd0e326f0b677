"""Hardware presets and the glue from dimensionless pulses to physical noise runs.

Optimised pulses live in units where the largest Rabi frequency is of
order one. A hardware configuration fixes the physical Rabi frequency,
trap, temperature, Rydberg level and laser wavevector; from it and a pulse
this module builds the ``SystemConfig``/``NoiseConfig`` pair used by the
Monte-Carlo budget, and runs one-parameter sensitivity sweeps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from rydswap.errors import ConfigurationError, DataGapError, InputError
from rydswap.hamiltonian import DriveChannel, SystemConfig
from rydswap.noise import (
    SR88_MASS,
    NoiseBudget,
    NoiseConfig,
    NoiseSource,
    PsdTable,
    TrapConfig,
    WavevectorConfig,
    noise_budget,
)
from rydswap.propagation import DEFAULT_SUBSTEPS, Modulation, PulseProtocol

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
ANCHOR_N = 61
C3_ANCHOR_M3 = TWO_PI * 1570.34e6 * 1e-18  # rad/s m^3 at n = 61
GAMMA_R_61 = TWO_PI * 1.66e3
GAMMA_RP_61 = TWO_PI * 0.44e3
K_EFF_61 = TWO_PI * 3.10e6  # rad/m, 5s5p 3P2 <-> 5s61s 3S1 at 323 nm

# microwave drives carry no appreciable photon momentum
MICROWAVE_CHANNELS = (DriveChannel.CHRRP,)


@dataclass(frozen=True)
class HardwareConfig:
    """Physical operating point. Angular frequencies in rad/s, SI otherwise.

    ``gamma_r``/``gamma_rp``/``c3`` left as ``None`` are derived from the
    n = 61 anchors with the n-dependence of the atomic-data module.
    ``reference`` keeps table values that belong to one specific pulse.
    """

    name: str = "custom"
    omega_max: float = TWO_PI * 10e6
    omega_xy: float = TWO_PI * 100e3
    omega_z: float = TWO_PI * 20e3
    n: int = 61
    temperature: float = 1e-6
    k_eff_x: float = K_EFF_61
    gamma_r: float | None = GAMMA_R_61
    gamma_rp: float | None = GAMMA_RP_61
    c3: float | None = C3_ANCHOR_M3
    mass: float = SR88_MASS
    zero_temperature: bool = False
    k_eff_law: str = "power_law"
    reference: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ConfigurationError("omega_max must be positive")
        if int(self.n) != self.n or self.n < 10:
            raise ConfigurationError(f"Rydberg level n={self.n} is not supported")
        if self.k_eff_law not in ("power_law", "levels"):
            raise ConfigurationError(f"unknown k_eff scaling law {self.k_eff_law!r}")

    def resolved(self) -> "HardwareConfig":
        """Fill derived rates and C3 for this n."""
        if self.gamma_r is not None and self.gamma_rp is not None and self.c3 is not None:
            return self
        g_r, g_rp = self.gamma_r, self.gamma_rp
        if g_r is None or g_rp is None:
            r_ratio, rp_ratio = decay_ratios(self.n)
            g_r = GAMMA_R_61 * r_ratio if g_r is None else g_r
            g_rp = GAMMA_RP_61 * rp_ratio if g_rp is None else g_rp
        c3 = self.c3 if self.c3 is not None else c3_at(self.n)
        return replace(self, gamma_r=g_r, gamma_rp=g_rp, c3=c3)

    def at_level(self, n: int) -> "HardwareConfig":
        """Move the Rydberg level, carrying along Omega, Gamma, C3 and k_eff."""
        from rydswap.atomic import rabi_factor, scaling_laws

        if n == self.n:
            return self
        point = scaling_laws(n)
        base = scaling_laws(self.n)
        k_ratio = (point.k_eff_power_law / base.k_eff_power_law if self.k_eff_law == "power_law"
                   else point.k_eff_factor / base.k_eff_factor)
        here = self.resolved()
        return replace(
            here,
            n=int(n),
            omega_max=here.omega_max * rabi_factor(n) / rabi_factor(self.n),
            gamma_r=here.gamma_r * point.gamma_r / base.gamma_r,
            gamma_rp=here.gamma_rp * point.gamma_rp / base.gamma_rp,
            c3=here.c3 * point.c3 / base.c3,
            k_eff_x=here.k_eff_x * k_ratio,
        )


def decay_ratios(n: int) -> tuple[float, float]:
    """Gamma(n) / Gamma(61) for the 3S1 and 3P0 series."""
    from rydswap.atomic import Series, decay_rate

    try:
        r = decay_rate(Series.S1, n).rate / decay_rate(Series.S1, ANCHOR_N).rate
        rp = decay_rate(Series.P0, n).rate / decay_rate(Series.P0, ANCHOR_N).rate
    except DataGapError as exc:
        raise DataGapError(f"no decay data at n={n}: {exc}") from None
    return r, rp


def c3_at(n: int) -> float:
    from rydswap.atomic import c3_coefficient

    return c3_coefficient(n) * 1e-18


PRESETS = {
    # Scheme A Rabi modulation
    "standard": HardwareConfig(name="standard",
                               reference={"v_dipole": TWO_PI * 5e6, "separation": 6.8e-6, "fidelity": 0.9981}),
    "optimal": HardwareConfig(name="optimal", omega_max=TWO_PI * 20e6, omega_xy=TWO_PI * 50e3, n=65,
                              gamma_r=None, gamma_rp=None, c3=None,
                              reference={"v_dipole": TWO_PI * 10e6, "separation": 6.0e-6, "fidelity": 0.9992}),
    # Scheme A phase modulation
    "phase-standard": HardwareConfig(name="phase-standard",
                                     reference={"v_dipole": TWO_PI * 5e6, "separation": 5.4e-6,
                                                "fidelity": 0.9989}),
    "phase-optimal": HardwareConfig(name="phase-optimal", omega_max=TWO_PI * 20e6, n=70,
                                    gamma_r=None, gamma_rp=None, c3=None,
                                    reference={"v_dipole": TWO_PI * 20e6, "separation": 5.2e-6,
                                               "fidelity": 0.9995}),
}


def preset(name: str) -> HardwareConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# keys of the JSON hardware file; frequencies in Hz (omega = 2 pi f)
_FILE_KEYS = {
    "rabi_MHz": ("omega_max", TWO_PI * 1e6),
    "trap_xy_kHz": ("omega_xy", TWO_PI * 1e3),
    "trap_z_kHz": ("omega_z", TWO_PI * 1e3),
    "n": ("n", None),
    "temperature_uK": ("temperature", 1e-6),
    "k_eff_x_rad_per_m": ("k_eff_x", 1.0),
    "gamma_r_kHz": ("gamma_r", TWO_PI * 1e3),
    "gamma_rp_kHz": ("gamma_rp", TWO_PI * 1e3),
    "c3_MHz_um3": ("c3", TWO_PI * 1e6 * 1e-18),
    "zero_temperature": ("zero_temperature", None),
    "k_eff_law": ("k_eff_law", None),
}


def hardware_from_dict(data: Mapping) -> HardwareConfig:
    """``{"preset": name, <overrides>}``; unknown keys are an error."""
    data = dict(data)
    base = preset(data.pop("preset", "standard"))
    changes = {}
    for key, value in data.items():
        if key not in _FILE_KEYS:
            raise ConfigurationError(f"unknown hardware key {key!r}; known: {sorted(_FILE_KEYS)}")
        attr, scale = _FILE_KEYS[key]
        if value is None:
            changes[attr] = None
        elif scale is None:
            changes[attr] = int(value) if attr == "n" else value
        else:
            changes[attr] = float(value) * scale
    if "n" in changes and changes["n"] != base.n:
        # rates and C3 follow the new level unless given explicitly
        for attr in ("gamma_r", "gamma_rp", "c3"):
            changes.setdefault(attr, None)
    return replace(base, name=changes.pop("name", base.name), **changes)


def hardware_to_dict(hw: HardwareConfig) -> dict:
    out = {"preset": hw.name if hw.name in PRESETS else "standard"}
    for key, (attr, scale) in _FILE_KEYS.items():
        value = getattr(hw, attr)
        out[key] = value if (value is None or scale is None) else value / scale
    return out


# ---------------------------------------------------------------------------
# Rescaling


@dataclass(frozen=True)
class Rescaled:
    pulse: PulseProtocol
    v_dipole: float
    flagged: bool


def rescale_pulse(pulse: PulseProtocol, new_omega_max: float, new_v_dipole: float | None = None) -> Rescaled:
    """Scale time by Omega_old / Omega_new and amplitudes by the inverse.

    V follows Omega unless overridden; an override that changes V/Omega is
    honoured but flagged, since the noise-free fidelity is then not preserved.
    """
    if not new_omega_max > 0:
        raise InputError("new_omega_max must be positive")
    old = pulse.omega_max
    if not old > 0:
        raise InputError("cannot rescale a pulse with zero Rabi frequency")
    if pulse.v_over_omega is None:
        raise InputError("pulse does not record V/Omega")
    s = new_omega_max / old
    matrix = pulse.control_matrix() * s if pulse.modulation is Modulation.RABI else pulse.control_matrix()
    v_nominal = pulse.v_over_omega * new_omega_max
    flagged = False
    v = v_nominal
    if new_v_dipole is not None:
        v = float(new_v_dipole)
        flagged = not math.isclose(v, v_nominal, rel_tol=1e-12)
    out = pulse.with_controls(
        matrix,
        duration=pulse.duration / s,
        omega0=pulse.omega0 * s,
        v_over_omega=v / new_omega_max,
    )
    return Rescaled(out, v, flagged)


# ---------------------------------------------------------------------------
# Physical noise setup


@dataclass(frozen=True)
class PhysicalSetup:
    pulse: PulseProtocol
    config: SystemConfig
    noise: NoiseConfig
    hardware: HardwareConfig

    @property
    def separation(self) -> float:
        return self.noise.trap.separation


def physical_setup(
    pulse: PulseProtocol,
    hardware: HardwareConfig,
    phase_psd: PsdTable | None = None,
    intensity_psd: PsdTable | None = None,
    shared_doppler: bool = False,
) -> PhysicalSetup:
    """Rescale ``pulse`` to the hardware Rabi frequency and derive R from C3 and V."""
    hw = hardware.resolved()
    scaled = rescale_pulse(pulse, hw.omega_max)
    v = scaled.v_dipole
    if not v > 0:
        raise ConfigurationError("interaction noise needs V_dipole > 0")
    separation = (hw.c3 / v) ** (1.0 / 3.0)
    trap = TrapConfig(
        omega_xy=hw.omega_xy,
        omega_z=hw.omega_z,
        temperature=hw.temperature,
        mass=hw.mass,
        separation=separation,
        c3=hw.c3,
        zero_temperature=hw.zero_temperature,
    )
    lasers = [ch for ch in scaled.pulse.channels if ch not in MICROWAVE_CHANNELS]
    k = WavevectorConfig.uniform(lasers, hw.k_eff_x)
    noise = NoiseConfig(
        trap=trap,
        wavevectors=k,
        gamma_r=hw.gamma_r,
        gamma_rp=hw.gamma_rp,
        phase_psd=phase_psd,
        intensity_psd=intensity_psd,
        shared_doppler=shared_doppler,
    )
    config = SystemConfig(v_dipole=v, gamma_r=0.0, gamma_rp=0.0, scheme=scaled.pulse.scheme)
    return PhysicalSetup(scaled.pulse, config, noise, hw)


def hardware_budget(
    pulse: PulseProtocol,
    hardware: HardwareConfig,
    sources: Sequence[NoiseSource] | None,
    shots: int,
    seed: int,
    phase_psd: PsdTable | None = None,
    intensity_psd: PsdTable | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    target=None,
) -> NoiseBudget:
    setup = physical_setup(pulse, hardware, phase_psd, intensity_psd)
    if sources is not None:
        for s in sources:
            s = NoiseSource(s)
            if s is NoiseSource.LASER_PHASE and phase_psd is None:
                raise ConfigurationError("laser_phase requested without a phase PSD file")
            if s is NoiseSource.LASER_INTENSITY and intensity_psd is None:
                raise ConfigurationError("laser_intensity requested without an intensity PSD file")
    return noise_budget(setup.config, setup.pulse, setup.noise, shots, seed, sources,
                        target=target, substeps=substeps)


SENSITIVITY_PARAMETERS = ("omega", "omega_xy", "omega_z", "n", "temperature")


@dataclass
class SensitivityPoint:
    value: float
    budget: NoiseBudget | None
    hardware: HardwareConfig | None
    error: str | None = None


def vary(hardware: HardwareConfig, parameter: str, value: float) -> HardwareConfig:
    """One-parameter change with the coupled scalings that go with it.

    ``omega`` in rad/s, trap frequencies in rad/s, temperature in K. At
    fixed V/Omega the separation follows Omega; varying ``n`` moves Omega,
    Gamma, C3 and k_eff together.
    """
    if parameter == "omega":
        return replace(hardware.resolved(), omega_max=float(value))
    if parameter == "omega_xy":
        return replace(hardware, omega_xy=float(value))
    if parameter == "omega_z":
        return replace(hardware, omega_z=float(value))
    if parameter == "temperature":
        return replace(hardware, temperature=float(value))
    if parameter == "n":
        return hardware.at_level(int(round(value)))
    raise InputError(f"unknown sensitivity parameter {parameter!r}; choose from {SENSITIVITY_PARAMETERS}")


def sensitivity_sweep(
    pulse: PulseProtocol,
    hardware: HardwareConfig,
    parameter: str,
    values: Sequence[float],
    sources: Sequence[NoiseSource] | None,
    shots: int,
    seed: int,
    phase_psd: PsdTable | None = None,
    intensity_psd: PsdTable | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
) -> list[SensitivityPoint]:
    """Budget per grid value. Points outside the atomic data are kept with an error note."""
    out = []
    for value in values:
        try:
            hw = vary(hardware, parameter, value)
        except DataGapError as exc:
            log.warning("sensitivity point %s=%s skipped: %s", parameter, value, exc)
            out.append(SensitivityPoint(float(value), None, None, str(exc)))
            continue
        budget = hardware_budget(pulse, hw, sources, shots, seed, phase_psd, intensity_psd, substeps)
        out.append(SensitivityPoint(float(value), budget, hw))
    return out


def budget_rows(budget: NoiseBudget) -> list[tuple]:
    return [(name, mean, err, shots) for name, mean, err, shots in budget.rows()]


def noise_free_infidelity(pulse: PulseProtocol, hardware: HardwareConfig) -> float:
    from rydswap.hamiltonian import embed_target
    from rydswap.propagation import gate_fidelity, propagate

    setup = physical_setup(pulse, hardware)
    return 1.0 - gate_fidelity(propagate(setup.config, setup.pulse), embed_target(np.pi))
