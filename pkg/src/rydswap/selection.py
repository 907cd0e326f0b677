"""Pulse libraries: filtering, ranking and the (T_int V, T_ryd) lower boundary.

All quantities are dimensionless so pulses optimised at different Rabi
scales compare directly: ``theta_dipole = T_int * V``, ``t_ryd_omega =
T_ryd * Omega_max`` and ``tau_omega = tau * Omega_max``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from rydswap.errors import ConfigurationError, InputError
from rydswap.io import PulseFile, read_pulse

RANK_KEYS = ("t_ryd", "theta_dipole", "tau", "infidelity")


@dataclass(frozen=True)
class LibraryEntry:
    name: str
    pulse_file: PulseFile
    infidelity: float
    theta_dipole: float
    t_ryd_omega: float
    tau_omega: float
    v_over_omega: float

    @classmethod
    def from_pulse_file(cls, name: str, pf: PulseFile) -> "LibraryEntry":
        d = pf.diagnostics
        missing = [k for k in ("infidelity", "t_int_s", "t_ryd_s") if k not in d]
        if missing:
            raise InputError(f"{name}: pulse file lacks diagnostics {missing}")
        p = pf.pulse
        omega = p.omega_max
        vo = p.v_over_omega if p.v_over_omega is not None else float("nan")
        return cls(
            name=name,
            pulse_file=pf,
            infidelity=float(d["infidelity"]),
            theta_dipole=float(d["t_int_s"]) * vo * omega,
            t_ryd_omega=float(d["t_ryd_s"]) * omega,
            tau_omega=p.duration * omega,
            v_over_omega=vo,
        )

    def row(self) -> tuple:
        return (self.name, self.infidelity, self.theta_dipole, self.t_ryd_omega, self.tau_omega, self.v_over_omega)


TABLE_HEADER = ("name", "infidelity", "t_int_v_rad", "t_ryd_omega_rad", "tau_omega_rad", "v_over_omega")


def load_library(paths: Iterable[str | Path]) -> list[LibraryEntry]:
    """Pulse files from explicit paths or directories (``*.json`` without manifests)."""
    entries = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files = sorted(f for f in p.glob("*.json")
                           if f.name != "manifest.json" and not f.name.endswith(".manifest.json"))
        elif p.exists():
            files = [p]
        else:
            raise ConfigurationError(f"library path {p} not found")
        for f in files:
            entries.append(LibraryEntry.from_pulse_file(str(f), read_pulse(f)))
    if not entries:
        raise ConfigurationError("pulse library is empty")
    return entries


def filter_library(
    entries: Sequence[LibraryEntry],
    max_infidelity: float | None = None,
    theta_dipole: tuple[float | None, float | None] = (None, None),
    t_ryd_omega: tuple[float | None, float | None] = (None, None),
    tau_omega: tuple[float | None, float | None] = (None, None),
) -> list[LibraryEntry]:
    def inside(x, bounds):
        lo, hi = bounds
        return (lo is None or x >= lo) and (hi is None or x <= hi)

    return [
        e for e in entries
        if (max_infidelity is None or e.infidelity < max_infidelity)
        and inside(e.theta_dipole, theta_dipole)
        and inside(e.t_ryd_omega, t_ryd_omega)
        and inside(e.tau_omega, tau_omega)
    ]


def rank(entries: Sequence[LibraryEntry], key: str = "t_ryd") -> list[LibraryEntry]:
    """Ascending by the key, ties broken by infidelity."""
    attr = {"t_ryd": "t_ryd_omega", "theta_dipole": "theta_dipole", "tau": "tau_omega",
            "infidelity": "infidelity"}
    if key not in attr:
        raise InputError(f"unknown ranking key {key!r}; choose from {RANK_KEYS}")
    return sorted(entries, key=lambda e: (getattr(e, attr[key]), e.infidelity, e.name))


def lower_boundary(entries: Sequence[LibraryEntry]) -> list[LibraryEntry]:
    """Pulses not dominated in (T_int V, T_ryd Omega): no other pulse is lower in both."""
    ordered = sorted(entries, key=lambda e: (e.theta_dipole, e.t_ryd_omega))
    front = []
    best = np.inf
    for e in ordered:
        if e.t_ryd_omega < best:
            front.append(e)
            best = e.t_ryd_omega
    return front


def extremal_picks(entries: Sequence[LibraryEntry]) -> dict[str, LibraryEntry]:
    if not entries:
        return {}
    return {
        "min_t_int_v": min(entries, key=lambda e: (e.theta_dipole, e.infidelity)),
        "min_t_ryd": min(entries, key=lambda e: (e.t_ryd_omega, e.infidelity)),
        "min_tau": min(entries, key=lambda e: (e.tau_omega, e.infidelity)),
    }
