"""Radiative decay rates of triplet Rydberg levels and n-scaling laws.

Rates use the spontaneous-emission formula Gamma = sum_j (4/3) omega^3 |D|^2 / (hbar c^3),
evaluated in atomic units. Black-body transitions are not included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rydswap.atomic.dipole import pair_strength, radial_integral
from rydswap.atomic.qd import QdModel, Series, default_model, effective_n, level_energy
from rydswap.errors import DataGapError

C_AU = 137.035999084
HARTREE_GHZ = 6579683.920502
AU_TIME_S = 2.4188843265857e-17
BOHR_M = 5.29177210903e-11
C_SI = 299792458.0

C3_ANCHOR = 2 * math.pi * 1570.34e6  # rad/s um^3 at n = 61
ANCHOR_N = 61


@dataclass(frozen=True)
class DecayChannel:
    series: Series
    n: int
    rate: float  # 1/s
    qd_source: str


@dataclass
class DecayReport:
    series: Series
    n: int
    rate: float  # 1/s
    channels: list[DecayChannel] = field(default_factory=list)
    missing: list[tuple[Series, int]] = field(default_factory=list)
    coverage: dict[str, int] = field(default_factory=dict)

    @property
    def lifetime(self) -> float:
        return 1.0 / self.rate if self.rate > 0 else math.inf

    @property
    def complete(self) -> bool:
        return not self.missing

    @property
    def flagged(self) -> bool:
        """True when any channel relies on missing or placeholder defects."""
        return bool(self.missing) or any(
            src not in ("ritz", "table", "interpolated") for src in self.coverage
        )


def _lower_series(series: Series) -> tuple[Series, ...]:
    if series is Series.S1:
        return (Series.P0, Series.P1, Series.P2)
    if series is Series.P0:
        return (Series.S1, Series.D1)
    raise DataGapError(f"decay channels are tabulated for 3S1 and 3P0 only, not {series.value}")


def partial_rate(upper: Series, n_up: int, lower: Series, n_low: int, model: QdModel | None = None,
                 convention: str = "sum_rule") -> float:
    """Spontaneous rate (1/s) from one level to one lower level, summed over final M."""
    model = model or default_model()
    omega = (level_energy(upper, n_up, model) - level_energy(lower, n_low, model)) / HARTREE_GHZ
    if omega <= 0:
        return 0.0
    strength = pair_strength(upper, lower, convention) * radial_integral(upper, n_up, lower, n_low, model) ** 2
    return (4.0 / 3.0) * omega**3 * strength / C_AU**3 / AU_TIME_S


def decay_rate(series: Series, n: int, model: QdModel | None = None, convention: str = "sum_rule") -> DecayReport:
    """Total radiative rate of (series, n) into every lower dipole-allowed level."""
    series = Series(series)
    model = model or default_model()
    e_up = level_energy(series, n, model)
    report = DecayReport(series, int(n), 0.0)
    partials = []
    for lower in _lower_series(series):
        for n_low in range(lower.lowest_n, n + 1):
            try:
                entry = model.lookup(lower, n_low)
            except DataGapError:
                report.missing.append((lower, n_low))
                continue
            if level_energy(lower, n_low, model) >= e_up:
                continue
            try:
                rate = partial_rate(series, n, lower, n_low, model, convention)
            except DataGapError:
                report.missing.append((lower, n_low))
                continue
            partials.append(rate)
            report.channels.append(DecayChannel(lower, n_low, rate, entry.source))
            report.coverage[entry.source] = report.coverage.get(entry.source, 0) + 1
    report.rate = math.fsum(partials)
    return report


def lifetime(series: Series, n: int, model: QdModel | None = None, convention: str = "sum_rule") -> float:
    return decay_rate(series, n, model, convention).lifetime


def transition_wavelength(upper: Series, n_up: int, lower: Series, n_low: int, model: QdModel | None = None) -> float:
    """Vacuum wavelength in metres."""
    d_ghz = abs(level_energy(upper, n_up, model) - level_energy(lower, n_low, model))
    return C_SI / (d_ghz * 1e9)


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    c3: float  # rad/s um^3
    rabi_factor: float  # Omega(n) / Omega(61) at fixed field
    wavelength: float  # m, 5s5p 3P2 <-> 5sns 3S1
    k_eff_factor: float  # k(n) / k(61) from the level energies
    k_eff_power_law: float  # (n / 61)^2
    gamma_r: float  # 1/s, 3S1
    gamma_rp: float  # 1/s, 3P0

    def separation(self, v_dipole: float) -> float:
        """Atom separation (um) giving exchange rate v_dipole (rad/s)."""
        return (self.c3 / v_dipole) ** (1.0 / 3.0)


def c3_coefficient(n: int, anchor: float = C3_ANCHOR, model: QdModel | None = None) -> float:
    """C3(n) = anchor * (n*(n) / n*(61))^4 with 3S1 effective quantum numbers."""
    ratio = effective_n(Series.S1, n, model) / effective_n(Series.S1, ANCHOR_N, model)
    return anchor * ratio**4


def rabi_factor(n: int, model: QdModel | None = None) -> float:
    """|<5p 3P2|d|ns 3S1>| relative to n = 61 (angular factors cancel)."""
    d = radial_integral(Series.S1, n, Series.P2, 5, model)
    d61 = radial_integral(Series.S1, ANCHOR_N, Series.P2, 5, model)
    return abs(d / d61)


def scaling_laws(n: int, c3_anchor: float = C3_ANCHOR, model: QdModel | None = None,
                 convention: str = "sum_rule") -> ScalingPoint:
    lam = transition_wavelength(Series.S1, n, Series.P2, 5, model)
    lam61 = transition_wavelength(Series.S1, ANCHOR_N, Series.P2, 5, model)
    return ScalingPoint(
        n=int(n),
        c3=c3_coefficient(n, c3_anchor, model),
        rabi_factor=rabi_factor(n, model),
        wavelength=lam,
        k_eff_factor=lam61 / lam,
        k_eff_power_law=(n / ANCHOR_N) ** 2,
        gamma_r=decay_rate(Series.S1, n, model, convention).rate,
        gamma_rp=decay_rate(Series.P0, n, model, convention).rate,
    )


def power_law_exponent(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)
