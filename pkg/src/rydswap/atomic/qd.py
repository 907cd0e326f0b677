"""Quantum defects and level energies of the 88Sr triplet Rydberg series.

High-n defects follow the extended Rydberg-Ritz formula. Below each
formula's validity floor the defects come from a text table
(``data/qd_sr88.txt``, or ``$RYDSWAP_DATA_DIR/qd_sr88.txt`` if set).
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from rydswap.errors import DataGapError, InputError

DATA_ENV = "RYDSWAP_DATA_DIR"
QD_FILENAME = "qd_sr88.txt"


@dataclass(frozen=True)
class AtomConstants:
    ionization_ghz: float = 1377012.72
    rydberg_ghz: float = 3289821.43
    mass_u: float = 87.9056122571
    # metastable qubit levels, rates / 2 pi in Hz
    gamma_3p0_hz: float = 1.35e-3
    gamma_3p2_hz: float = 0.15e-3
    # literature rate for 5s5p 3P2 in 1/s, kept alongside (different convention)
    gamma_3p2_per_s: float = 9.55e-4


SR88 = AtomConstants()


class Series(str, enum.Enum):
    S1 = "3S1"
    P0 = "3P0"
    P1 = "3P1"
    P2 = "3P2"
    D1 = "3D1"

    @property
    def l(self) -> int:
        return {"S": 0, "P": 1, "D": 2}[self.value[1]]

    @property
    def j(self) -> int:
        return int(self.value[2])

    @property
    def spin(self) -> int:
        return 1

    @property
    def qd_key(self) -> str:
        """Fine-structure components share one defect."""
        return "3P" if self.l == 1 else self.value

    @property
    def lowest_n(self) -> int:
        """Lowest principal quantum number of the triplet term above the 5s core."""
        return {0: 6, 1: 5, 2: 4}[self.l]

    def wavefunction_index(self, n: int) -> int:
        """The integer I(l) entering l* = l - delta + I(l)."""
        if self.l == 0:
            return 4
        if self.l == 1:
            return 2
        return 0 if n in (4, 5) else 2


@dataclass(frozen=True)
class RitzCoefficients:
    d0: float
    d2: float
    d4: float
    n_min: int

    def __call__(self, n: float) -> float:
        x = (n - self.d0) ** -2
        return self.d0 + self.d2 * x + self.d4 * x * x


RITZ = {
    "3S1": RitzCoefficients(3.370778, 0.418, -0.3, 15),
    "3P": RitzCoefficients(2.883326, 0.255, 4.07, 15),
    "3D1": RitzCoefficients(2.67517, -13.15, -4444.0, 28),
}


@dataclass(frozen=True)
class QdEntry:
    delta: float
    source: str


@dataclass(frozen=True)
class QdModel:
    ritz: dict = field(default_factory=lambda: dict(RITZ))
    table: dict = field(default_factory=dict)  # (qd_key, n) -> QdEntry
    provenance: str = ""

    def lookup(self, series: Series, n: int) -> QdEntry:
        series = Series(series)
        if int(n) != n:
            raise InputError(f"principal quantum number must be an integer, got {n}")
        n = int(n)
        key = series.qd_key
        # a fine-structure-resolved row wins over the shared one
        for k in (series.value, key):
            if (k, n) in self.table:
                return self.table[(k, n)]
        ritz = self.ritz[key]
        if n >= ritz.n_min:
            return QdEntry(ritz(n), "ritz")
        table_ns = [m for (k, m) in self.table if k in (key, series.value)]
        if table_ns and n > max(table_ns):
            # between the table and the formula's validity floor
            return QdEntry(ritz(n), "ritz-bridged")
        raise DataGapError(f"no quantum defect for {series.value} at n={n}")

    def n_min(self, series: Series) -> int:
        series = Series(series)
        key = series.qd_key
        table_ns = [m for (k, m) in self.table if k in (key, series.value)]
        return min(table_ns) if table_ns else self.ritz[key].n_min


def data_path(name: str = QD_FILENAME) -> Path:
    override = os.environ.get(DATA_ENV)
    if override:
        path = Path(override) / name
        if path.exists():
            return path
    return Path(__file__).with_name("data") / name


def parse_qd_table(text: str) -> dict:
    """Rows of ``series n delta source``; ``#`` starts a comment."""
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise InputError(f"QD table line {lineno}: expected 'series n delta [source]'")
        key = parts[0]
        if key not in RITZ and key not in {s.value for s in Series}:
            raise InputError(f"QD table line {lineno}: unknown series {parts[0]!r}")
        try:
            n = int(parts[1])
            delta = float(parts[2])
        except ValueError as exc:
            raise InputError(f"QD table line {lineno}: {exc}") from None
        table[(key, n)] = QdEntry(delta, parts[3] if len(parts) > 3 else "table")
    return table


def load_qd_model(path: str | os.PathLike | None = None) -> QdModel:
    path = Path(path) if path is not None else data_path()
    text = path.read_text()
    return QdModel(table=parse_qd_table(text), provenance=str(path))


@lru_cache(maxsize=1)
def default_model() -> QdModel:
    return load_qd_model()


def quantum_defect(series: Series, n: int, model: QdModel | None = None) -> float:
    return (model or default_model()).lookup(series, n).delta


def effective_n(series: Series, n: int, model: QdModel | None = None) -> float:
    return n - quantum_defect(series, n, model)


def level_energy(series: Series, n: int, model: QdModel | None = None, atom: AtomConstants = SR88) -> float:
    """Energy above the ground state in GHz."""
    return atom.ionization_ghz - atom.rydberg_ghz / effective_n(series, n, model) ** 2
