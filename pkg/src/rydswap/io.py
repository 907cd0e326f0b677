"""File formats: pulse files, run manifests, PSD tables and CSV reports.

Everything is human-readable text. Floats go through ``repr`` (JSON) so
arrays round-trip bit-exactly, and every file is written to a temporary
sibling and renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import platform
import tempfile
import time
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from rydswap.errors import ConfigurationError, InputError
from rydswap.hamiltonian import DriveChannel, Scheme
from rydswap.noise import PsdTable
from rydswap.propagation import Modulation, PulseProtocol

PULSE_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (Scheme, Modulation, DriveChannel)):
        return obj.value
    if isinstance(obj, dict):
        return {str(_jsonable(k)): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def settings_digest(settings: Any) -> str:
    text = json.dumps(_jsonable(settings), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Pulse files


@dataclass
class PulseFile:
    pulse: PulseProtocol
    diagnostics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    schema_version: int = PULSE_SCHEMA_VERSION

    def to_dict(self) -> dict:
        p = self.pulse
        return {
            "schema_version": self.schema_version,
            "scheme": p.scheme.value,
            "modulation": p.modulation.value,
            "duration_s": p.duration,
            "segments": p.segments,
            "omega0_rad_per_s": p.omega0,
            "v_over_omega": p.v_over_omega,
            "controls": {ch.value: [float(x) for x in p.controls[ch]] for ch in p.channels},
            "provenance": _jsonable(self.provenance),
            "diagnostics": _jsonable(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseFile":
        version = data.get("schema_version")
        if version != PULSE_SCHEMA_VERSION:
            raise InputError(f"unsupported pulse schema_version {version!r} (expected {PULSE_SCHEMA_VERSION})")
        try:
            controls = {DriveChannel(k): np.array(v, dtype=float) for k, v in data["controls"].items()}
            pulse = PulseProtocol(
                scheme=Scheme(data["scheme"]),
                modulation=Modulation(data["modulation"]),
                duration=float(data["duration_s"]),
                controls=controls,
                omega0=float(data.get("omega0_rad_per_s", 1.0)),
                v_over_omega=data.get("v_over_omega"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed pulse file: {exc}") from None
        if "segments" in data and int(data["segments"]) != pulse.segments:
            raise InputError("pulse file segment count does not match its control arrays")
        return cls(pulse, dict(data.get("diagnostics", {})), dict(data.get("provenance", {})), version)


def write_pulse(path, pulse_file: PulseFile) -> Path:
    return atomic_write_text(path, dumps(pulse_file.to_dict()))


def read_pulse(path) -> PulseFile:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"pulse file {path} not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    return PulseFile.from_dict(data)


def record_pulse_file(record, provenance: dict | None = None) -> PulseFile:
    """PulseFile from an optimisation record, with its diagnostics."""
    diagnostics = {
        "infidelity": record.infidelity,
        "cost": record.cost,
        "t_int_s": record.t_int,
        "t_ryd_s": record.t_ryd,
        "theta_dipole": record.theta_dipole,
        "theta": record.theta,
        "v_dipole_rad_per_s": record.v_dipole,
        "iterations": record.iterations,
        "converged": record.converged,
        "flagged": record.flagged,
    }
    prov = {"seed": record.seed}
    prov.update(provenance or {})
    return PulseFile(record.pulse, diagnostics, prov)


# ---------------------------------------------------------------------------
# Manifests


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    outputs: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.time)
    finished: float | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        from rydswap import __version__

        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "tool_version": __version__,
            "command": self.command,
            "argv": list(self.argv),
            "config": _jsonable(self.config),
            "seed": self.seed,
            "outputs": list(self.outputs),
            "warnings": list(self.warnings),
            "wall_clock": {
                "started_unix": self.started,
                "finished_unix": self.finished,
                "elapsed_s": None if self.finished is None else self.finished - self.started,
                "host": platform.node(),
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
        }


def write_manifest(path, manifest: RunManifest) -> Path:
    if manifest.finished is None:
        manifest.finished = time.time()
    return atomic_write_text(path, dumps(manifest.to_dict()))


def read_manifest(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise InputError(f"unsupported manifest schema_version {data.get('schema_version')!r}")
    return data


# ---------------------------------------------------------------------------
# PSD tables


def parse_psd(text: str, source: str = "<psd>") -> PsdTable:
    """Two columns ``frequency_Hz density``; a ``# kind: phase|intensity`` header is required."""
    kind = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("kind:"):
                kind = body.split(":", 1)[1].strip().lower()
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise InputError(f"{source}:{lineno}: expected two columns")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise InputError(f"{source}:{lineno}: non-numeric entry") from None
    if kind is None:
        raise InputError(f"{source}: missing '# kind: phase|intensity' header line")
    if not rows:
        raise InputError(f"{source}: no data rows")
    f, s = np.array(rows).T
    return PsdTable(kind, f, s)


def read_psd(path) -> PsdTable:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"PSD file {path} not found")
    return parse_psd(path.read_text(), str(path))


def format_psd(psd: PsdTable) -> str:
    unit = "rad^2/Hz" if psd.kind == "phase" else "1/Hz"
    lines = [f"# kind: {psd.kind}", f"# frequency_Hz density_{unit}"]
    lines += [f"{f!r} {s!r}" for f, s in zip(psd.frequencies.tolist(), psd.densities.tolist())]
    return "\n".join(lines) + "\n"


def write_psd(path, psd: PsdTable) -> Path:
    return atomic_write_text(path, format_psd(psd))


# ---------------------------------------------------------------------------
# CSV tables


def format_table(header: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else _jsonable(x) for x in row])
    return buf.getvalue()


def write_table(path, header, rows, comments: Sequence[str] = ()) -> Path:
    return atomic_write_text(path, format_table(header, rows, comments))


def read_table(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
