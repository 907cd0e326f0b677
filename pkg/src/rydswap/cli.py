"""``rydswap`` command line.

Physical inputs use Hz-type units at the boundary (an angular frequency
``omega`` is given as ``omega / 2 pi``); dimensionless pulse parameters
such as tau*Omega are given in units of 2 pi. Every command writes a
manifest next to its outputs.

Exit codes: 0 success, 2 usage, 3 configuration or input, 4 data gap,
5 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import shutil
import sys
from pathlib import Path

import numpy as np

from rydswap import __version__
from rydswap.errors import ConfigurationError, RydswapError
from rydswap.hamiltonian import Scheme, SystemConfig, embed_target
from rydswap.io import (
    RunManifest,
    load_json,
    read_pulse,
    record_pulse_file,
    settings_digest,
    write_manifest,
    write_pulse,
    write_table,
    read_psd,
    PulseFile,
)
from rydswap.noise import NoiseSource
from rydswap.propagation import Modulation

log = logging.getLogger("rydswap")

TWO_PI = 2 * math.pi
EXIT_USAGE = 2


class UsageError(RydswapError):
    exit_code = EXIT_USAGE


def _floats(text: str) -> list[float]:
    """Comma list or ``start:stop:count`` linear range."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return list(np.linspace(float(a), float(b), int(n)))
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers like '1,2,3' or 'a:b:n', got {text!r}") from None


def _ints(text: str) -> list[int]:
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                return list(range(parts[0], parts[1] + 1))
            return list(range(parts[0], parts[1] + 1, parts[2]))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like '20,40' or 'a:b[:step]', got {text!r}") from None


def _manifest_path(out: Path) -> Path:
    return (out if out.is_dir() or not out.suffix else out.parent) / (
        "manifest.json" if out.is_dir() or not out.suffix else f"{out.stem}.manifest.json"
    )


def _hardware(args):
    from rydswap.presets import hardware_from_dict, preset

    if getattr(args, "hardware", None):
        return hardware_from_dict(load_json(args.hardware))
    return preset(args.preset)


def _sources(values):
    if values is None:
        return None
    if values == ["none"]:
        return []
    try:
        return [NoiseSource(v) for v in values]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _psds(args):
    phase = read_psd(args.phase_psd) if getattr(args, "phase_psd", None) else None
    inten = read_psd(args.intensity_psd) if getattr(args, "intensity_psd", None) else None
    if phase is not None and phase.kind != "phase":
        raise ConfigurationError(f"{args.phase_psd} declares kind {phase.kind!r}, expected phase")
    if inten is not None and inten.kind != "intensity":
        raise ConfigurationError(f"{args.intensity_psd} declares kind {inten.kind!r}, expected intensity")
    return phase, inten


def _settings(args):
    from rydswap.grape import OptimizationSettings

    return OptimizationSettings(
        lam=args.lam,
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        gradient_tolerance=args.gradient_tolerance,
        seed=args.seed,
        bounds_mode=args.bounds,
        target_infidelity=args.target_infidelity,
        rabi_max=args.rabi_max,
    )


def _check_scheme(scheme: str, modulation: str) -> None:
    if scheme not in ("A", "B"):
        raise UsageError(f"scheme must be A or B, got {scheme!r}")
    if modulation not in ("rabi", "phase"):
        raise UsageError(f"modulation must be rabi or phase, got {modulation!r}")


# ---------------------------------------------------------------------------
# optimize / sweep


def cmd_optimize(args) -> int:
    from rydswap.grape import optimize

    _check_scheme(args.scheme, args.modulation)
    if args.tau_omega <= 0 or args.v_over_omega < 0 or args.segments < 2:
        raise UsageError("need --tau-omega > 0, --v-over-omega >= 0 and --segments >= 2")
    settings = _settings(args)
    config = SystemConfig(v_dipole=args.v_over_omega, scheme=Scheme(args.scheme))
    record = optimize(config, settings, TWO_PI * args.tau_omega, args.segments, Modulation(args.modulation),
                      target=embed_target(math.pi * args.theta))
    out = Path(args.out)
    manifest = RunManifest("optimize", sys.argv, vars_clean(args), args.seed)
    write_pulse(out, record_pulse_file(record, {"settings_digest": settings_digest(settings),
                                                "tool_version": __version__, "command": "optimize"}))
    manifest.outputs.append(str(out))
    write_manifest(_manifest_path(out), manifest)
    print(f"infidelity {record.infidelity:.3e}  T_int*V {record.theta_dipole:.4f}  "
          f"T_ryd*Omega {record.t_ryd * record.pulse.omega_max:.4f}  iterations {record.iterations}")
    return 0


LANDSCAPE_HEADER = ("point", "tau_omega_rad", "v_over_omega", "seed", "infidelity", "t_int_v_rad",
                    "t_ryd_omega_rad", "iterations", "converged", "file")


def cmd_sweep(args) -> int:
    from rydswap.grape import detect_speed_limit, landscape_sweep

    _check_scheme(args.scheme, args.modulation)
    settings = _settings(args)
    config = SystemConfig(v_dipole=0.0, scheme=Scheme(args.scheme))
    durations = [TWO_PI * t for t in args.tau_omega]
    records = landscape_sweep(config, durations, args.v_over_omega, args.runs, args.segments,
                              Modulation(args.modulation), settings, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("sweep", sys.argv, vars_clean(args), args.seed)
    rows = []
    per_point = args.runs
    for i, rec in enumerate(records):
        point, run = divmod(i, per_point)
        name = f"pulse_p{point:03d}_r{run:02d}.json"
        if not args.no_pulses:
            write_pulse(out / name, record_pulse_file(rec, {"settings_digest": settings_digest(settings),
                                                            "point": point, "run": run,
                                                            "tool_version": __version__}))
            manifest.outputs.append(str(out / name))
        rows.append((point, float(rec.pulse.duration), rec.v_dipole, rec.seed, rec.infidelity,
                     rec.theta_dipole, rec.t_ryd * rec.pulse.omega_max, rec.iterations, rec.converged,
                     "" if args.no_pulses else name))
    write_table(out / "landscape.csv", LANDSCAPE_HEADER, rows,
                comments=["tau_omega_rad is tau * Omega0 (rad); pulses in units Omega0 = 1"])
    manifest.outputs.append(str(out / "landscape.csv"))
    for v in args.v_over_omega:
        recs = [r for r in records if math.isclose(r.v_dipole, v)]
        tau = detect_speed_limit(recs)
        label = "none" if tau is None else f"{tau / TWO_PI:.3f} x 2pi"
        print(f"V/Omega={v:g}: speed limit tau*Omega = {label}")
    write_manifest(out / "manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# select


def cmd_select(args) -> int:
    from rydswap.selection import (
        TABLE_HEADER,
        extremal_picks,
        filter_library,
        load_library,
        lower_boundary,
        rank,
    )

    entries = load_library(args.library)
    kept = filter_library(
        entries,
        max_infidelity=args.max_infidelity,
        theta_dipole=(args.t_int_v_min, args.t_int_v_max),
        t_ryd_omega=(args.t_ryd_min, args.t_ryd_max),
        tau_omega=(_scale(args.tau_min), _scale(args.tau_max)),
    )
    ranked = rank(kept, args.rank)
    front = {e.name for e in lower_boundary(kept)}
    picks = extremal_picks(kept)
    rows = [e.row() + (e.name in front,) for e in ranked[: args.top or None]]
    header = TABLE_HEADER + ("on_lower_boundary",)
    if args.out:
        out = Path(args.out)
        write_table(out, header, rows, comments=[f"ranked by {args.rank}; {len(kept)} of {len(entries)} kept"])
        manifest = RunManifest("select", sys.argv, vars_clean(args), None, [str(out)])
        if args.pick and picks:
            dest = out.with_name(f"{out.stem}.{args.pick}.json")
            shutil.copyfile(picks[args.pick].name, dest)
            manifest.outputs.append(str(dest))
        write_manifest(_manifest_path(out), manifest)
    if not kept:
        print("no pulses pass the filters")
        return 0
    print(",".join(header))
    for row in rows:
        print(",".join(f"{x:.6g}" if isinstance(x, float) else str(x) for x in row))
    for k, e in picks.items():
        print(f"# {k}: {e.name}")
    return 0


def _scale(x):
    return None if x is None else TWO_PI * x


# ---------------------------------------------------------------------------
# budget / frt / sensitivity / rescale


BUDGET_HEADER = ("source", "infidelity", "stderr", "shots")


def _target_from(pf: PulseFile):
    return embed_target(float(pf.diagnostics.get("theta", math.pi)))


def cmd_budget(args) -> int:
    from rydswap.presets import hardware_budget

    pf = read_pulse(args.pulse)
    hw = _hardware(args)
    phase, inten = _psds(args)
    sources = _sources(args.sources)
    budget = hardware_budget(pf.pulse, hw, sources, args.shots, args.seed, phase, inten,
                             substeps=args.substeps, target=_target_from(pf))
    rows = budget.rows()
    if args.out:
        out = Path(args.out)
        write_table(out, BUDGET_HEADER, rows, comments=[f"hardware {hw.name}; infidelity is 1 - F"])
        write_manifest(_manifest_path(out), RunManifest("budget", sys.argv, vars_clean(args), args.seed, [str(out)]))
    for name, mean, err, shots in rows:
        print(f"{name:16s} {mean:.4e} +- {err:.1e}  ({shots} shots)")
    return 0


def cmd_frt(args) -> int:
    from rydswap.frt import NoiseKind, default_grid, frt_infidelity, response_spectra, zero_frequency_audit
    from rydswap.presets import physical_setup

    pf = read_pulse(args.pulse)
    hw = _hardware(args)
    phase, inten = _psds(args)
    setup = physical_setup(pf.pulse, hw)
    kinds = [NoiseKind.PHASE, NoiseKind.INTENSITY] if args.kind == "both" else [NoiseKind(args.kind)]
    if args.f_max is not None:
        freqs = np.concatenate([[0.0], np.geomspace(args.f_max * 1e-5, args.f_max, args.points - 1)])
    else:
        freqs = default_grid(setup.pulse, args.points)
    spectrum = response_spectra(setup.config, setup.pulse, kinds, freqs, substeps=args.substeps)
    audit = zero_frequency_audit(setup.config, setup.pulse, substeps=args.substeps)
    psds = {p.kind: p for p in (phase, inten) if p is not None}
    manifest = RunManifest("frt", sys.argv, vars_clean(args), None)
    for p in psds.values():
        if not p.covers(freqs[0], freqs[-1]):
            msg = (f"{p.kind} PSD covers {p.frequencies[0]:.3g}..{p.frequencies[-1]:.3g} Hz but the grid "
                   f"spans {freqs[0]:.3g}..{freqs[-1]:.3g} Hz; zero outside")
            log.warning(msg)
            manifest.warnings.append(msg)
    keys = list(spectrum.values)
    header = ["frequency_Hz"] + [f"I_{k.kind.value}_{k.channel.value}_rad2" for k in keys]
    cols = [spectrum.values[k] for k in keys]
    for kind, p in psds.items():
        if NoiseKind(kind) in kinds:
            header.append(f"integrand_{kind}_per_Hz")
            cols.append(p(freqs) * spectrum.total(kind))
    rows = [(f,) + tuple(c[i] for c in cols) for i, f in enumerate(freqs)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "response.csv", header, rows,
                comments=["response functions I(f) per channel; infidelity = int S(f) I(f) df"])
    audit_rows = [(ch.value, ip, ii) for ch, (ip, ii) in audit.items()]
    write_table(out / "zero_frequency.csv", ("channel", "I_phase_0_rad2", "I_intensity_0"), audit_rows)
    summary = []
    for kind, p in psds.items():
        if NoiseKind(kind) in kinds:
            summary.append((kind, frt_infidelity(spectrum, p)))
    write_table(out / "frt_infidelity.csv", ("kind", "infidelity"), summary)
    manifest.outputs += [str(out / n) for n in ("response.csv", "zero_frequency.csv", "frt_infidelity.csv")]
    write_manifest(out / "manifest.json", manifest)
    for ch, ip, ii in audit_rows:
        print(f"zero-frequency {ch}: I_phase(0)={ip:.3e} I_intensity(0)={ii:.3e}")
    for kind, val in summary:
        print(f"FRT infidelity ({kind}): {val:.4e}")
    return 0


_VARY_UNITS = {"omega": TWO_PI * 1e6, "omega_xy": TWO_PI * 1e3, "omega_z": TWO_PI * 1e3, "n": 1.0,
               "temperature": 1e-6}
_VARY_LABEL = {"omega": "omega_MHz", "omega_xy": "omega_xy_kHz", "omega_z": "omega_z_kHz", "n": "n",
               "temperature": "temperature_uK"}


def cmd_sensitivity(args) -> int:
    from rydswap.presets import sensitivity_sweep

    pf = read_pulse(args.pulse)
    hw = _hardware(args)
    phase, inten = _psds(args)
    values = [v * _VARY_UNITS[args.vary] for v in args.grid]
    points = sensitivity_sweep(pf.pulse, hw, args.vary, values, _sources(args.sources), args.shots, args.seed,
                               phase, inten, substeps=args.substeps)
    rows = []
    for pt, raw in zip(points, args.grid):
        if pt.budget is None:
            rows.append((raw, "data_gap", float("nan"), float("nan"), 0))
            continue
        for name, mean, err, shots in pt.budget.rows():
            rows.append((raw, name, mean, err, shots))
    out = Path(args.out)
    write_table(out, (_VARY_LABEL[args.vary], "source", "infidelity", "stderr", "shots"), rows,
                comments=[f"hardware {hw.name}; varying {args.vary}"])
    write_manifest(_manifest_path(out), RunManifest("sensitivity", sys.argv, vars_clean(args), args.seed, [str(out)]))
    for r in rows:
        print(",".join(f"{x:.4g}" if isinstance(x, float) else str(x) for x in r))
    return 4 if any(pt.budget is None for pt in points) else 0


def cmd_rescale(args) -> int:
    from rydswap.presets import rescale_pulse

    pf = read_pulse(args.pulse)
    v = None if args.v_dipole_mhz is None else TWO_PI * 1e6 * args.v_dipole_mhz
    res = rescale_pulse(pf.pulse, TWO_PI * 1e6 * args.omega_max_mhz, v)
    prov = dict(pf.provenance, rescaled_from=str(args.pulse), rescale_flagged=res.flagged)
    diag = dict(pf.diagnostics)
    s = res.pulse.duration / pf.pulse.duration
    for key in ("t_int_s", "t_ryd_s"):
        if key in diag:
            diag[key] = diag[key] * s
    diag["v_dipole_rad_per_s"] = res.v_dipole
    out = Path(args.out)
    write_pulse(out, PulseFile(res.pulse, diag, prov))
    write_manifest(_manifest_path(out), RunManifest("rescale", sys.argv, vars_clean(args), None, [str(out)]))
    if res.flagged:
        log.warning("V_dipole override changes V/Omega; the noise-free fidelity is not preserved")
    print(f"duration {res.pulse.duration:.6e} s  Omega_max/2pi {res.pulse.omega_max / TWO_PI:.6e} Hz  "
          f"V/2pi {res.v_dipole / TWO_PI:.6e} Hz")
    return 0


# ---------------------------------------------------------------------------
# atomic


def cmd_atomic(args) -> int:
    from rydswap.atomic import (
        C3_ANCHOR,
        Series,
        c3_coefficient,
        decay_rate,
        default_model,
        level_energy,
        load_qd_model,
        scaling_laws,
    )

    model = load_qd_model(args.qd_file) if args.qd_file else default_model()
    status = 0
    out_rows = []
    if args.what == "lifetime":
        header = ("series", "n", "lifetime_us", "rate_per_s", "gamma_over_2pi_kHz", "channels", "missing",
                  "coverage")
        for series in args.series:
            for n in args.n:
                rep = decay_rate(Series(series), n, model, args.convention)
                if rep.missing:
                    status = 4
                    log.warning("%s n=%d: %d channels lack data", series, n, len(rep.missing))
                cov = ";".join(f"{k}={v}" for k, v in sorted(rep.coverage.items()))
                out_rows.append((series, n, rep.lifetime * 1e6, rep.rate, rep.rate / TWO_PI / 1e3,
                                 len(rep.channels), len(rep.missing), cov))
                if args.channels:
                    for ch in sorted(rep.channels, key=lambda c: -c.rate)[: args.channels]:
                        print(f"  {series} {n} -> {ch.series.value} {ch.n}: {ch.rate:.4e} /s ({ch.qd_source})")
    elif args.what == "energy":
        header = ("series", "n", "energy_GHz", "quantum_defect", "qd_source")
        for series in args.series:
            for n in args.n:
                entry = model.lookup(Series(series), n)
                out_rows.append((series, n, level_energy(Series(series), n, model), entry.delta, entry.source))
    elif args.what == "c3":
        header = ("n", "c3_MHz_um3")
        for n in args.n:
            out_rows.append((n, c3_coefficient(n, C3_ANCHOR, model) / TWO_PI / 1e6))
    else:
        header = ("n", "c3_MHz_um3", "rabi_factor", "wavelength_nm", "k_eff_factor_levels", "k_eff_factor_n2",
                  "gamma_r_over_2pi_kHz", "gamma_rp_over_2pi_kHz")
        for n in args.n:
            p = scaling_laws(n, model=model, convention=args.convention)
            out_rows.append((n, p.c3 / TWO_PI / 1e6, p.rabi_factor, p.wavelength * 1e9, p.k_eff_factor,
                             p.k_eff_power_law, p.gamma_r / TWO_PI / 1e3, p.gamma_rp / TWO_PI / 1e3))
    if args.out:
        out = Path(args.out)
        write_table(out, header, out_rows, comments=[f"QD data: {model.provenance}"])
        write_manifest(_manifest_path(out), RunManifest(f"atomic {args.what}", sys.argv, vars_clean(args), None,
                                                        [str(out)]))
    print(",".join(header))
    for r in out_rows:
        print(",".join(f"{x:.6g}" if isinstance(x, float) else str(x) for x in r))
    return status


# ---------------------------------------------------------------------------
# continuation


def cmd_continuation(args) -> int:
    from rydswap.grape import OptimizationRecord, continuation_theta
    from rydswap.propagation import propagate

    pf = read_pulse(args.pulse)
    pulse = pf.pulse
    theta0 = float(pf.diagnostics.get("theta", math.pi))
    v = pulse.v_over_omega * pulse.omega_max
    config = SystemConfig(v_dipole=v, scheme=pulse.scheme)
    ev = propagate(config, pulse)
    from rydswap.propagation import gate_fidelity

    infid = 1.0 - gate_fidelity(ev, embed_target(theta0))
    seed_rec = OptimizationRecord(pulse, infid, infid, ev.t_int, ev.t_ryd, 0,
                                  int(pf.provenance.get("seed", 0)), True, theta0, v)
    thetas = np.linspace(theta0, math.pi * args.theta_end, args.steps + 1)
    records = continuation_theta(config, seed_rec, thetas, _settings(args), threshold=args.threshold)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("continuation", sys.argv, vars_clean(args), args.seed)
    rows = []
    prev = None
    for i, rec in enumerate(records):
        name = f"theta_{i:03d}.json"
        write_pulse(out / name, record_pulse_file(rec, {"command": "continuation", "step": i}))
        manifest.outputs.append(str(out / name))
        dist = float("nan") if prev is None else pulse_distance(prev.pulse, rec.pulse)
        rows.append((i, rec.theta, rec.infidelity, rec.pulse.duration * rec.pulse.omega_max, dist, rec.flagged, name))
        prev = rec
    write_table(out / "continuation.csv",
                ("step", "theta_rad", "infidelity", "tau_omega_rad", "l2_distance_to_previous", "flagged", "file"),
                rows)
    manifest.outputs.append(str(out / "continuation.csv"))
    write_manifest(out / "manifest.json", manifest)
    for r in rows:
        print(f"step {r[0]:3d} theta/pi {r[1] / math.pi:.4f} infidelity {r[2]:.2e} dist {r[4]:.3g}")
    return 5 if any(r.flagged for r in records) else 0


def pulse_distance(a, b) -> float:
    """RMS distance of the control matrices after resampling onto a common grid."""
    from rydswap.grape import resample_pulse

    n = max(a.segments, b.segments)
    ma = resample_pulse(a, n).control_matrix()
    mb = resample_pulse(b, n).control_matrix()
    return float(np.sqrt(np.mean((ma - mb) ** 2)))


# ---------------------------------------------------------------------------


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _opt_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3, help="smoothness weight")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--gradient-tolerance", type=float, default=1e-10)
    p.add_argument("--target-infidelity", type=float, default=0.0,
                   help="stop a run early once the infidelity drops below this")
    p.add_argument("--bounds", choices=("box", "reparameterize"), default="box")
    p.add_argument("--rabi-max", type=float, help="optional cap on Rabi amplitudes (units of Omega0)")


def _hw_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", default="standard",
                   choices=("standard", "optimal", "phase-standard", "phase-optimal"))
    g.add_argument("--hardware", help="JSON hardware file ({\"preset\": ..., overrides})")
    p.add_argument("--phase-psd", help="phase PSD file (two columns, '# kind: phase')")
    p.add_argument("--intensity-psd", help="intensity PSD file (two columns, '# kind: intensity')")
    p.add_argument("--substeps", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydswap", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"rydswap {__version__}")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimise one pulse")
    p.add_argument("--scheme", required=True)
    p.add_argument("--modulation", required=True)
    p.add_argument("--tau-omega", type=float, required=True, help="tau*Omega in units of 2 pi")
    p.add_argument("--v-over-omega", type=float, required=True)
    p.add_argument("--segments", type=int, default=100)
    p.add_argument("--theta", type=float, default=1.0, help="exchange angle in units of pi")
    p.add_argument("--out", required=True, help="pulse file to write")
    _opt_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="speed-limit landscape over tau*Omega and V/Omega")
    p.add_argument("--scheme", required=True)
    p.add_argument("--modulation", required=True)
    p.add_argument("--tau-omega", type=_floats, required=True, help="list in units of 2 pi")
    p.add_argument("--v-over-omega", type=_floats, required=True)
    p.add_argument("--segments", type=int, default=100)
    p.add_argument("--runs", type=int, default=1, help="independent runs per grid point")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-pulses", action="store_true", help="write only the landscape table")
    p.add_argument("--out-dir", required=True)
    _opt_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select", help="filter and rank a pulse library")
    p.add_argument("library", nargs="+", help="pulse files or directories")
    p.add_argument("--max-infidelity", type=float)
    p.add_argument("--t-int-v-min", type=float)
    p.add_argument("--t-int-v-max", type=float)
    p.add_argument("--t-ryd-min", type=float, help="T_ryd*Omega lower bound (rad)")
    p.add_argument("--t-ryd-max", type=float)
    p.add_argument("--tau-min", type=float, help="tau*Omega lower bound in units of 2 pi")
    p.add_argument("--tau-max", type=float)
    p.add_argument("--rank", choices=("t_ryd", "theta_dipole", "tau", "infidelity"), default="t_ryd")
    p.add_argument("--top", type=int, default=0)
    p.add_argument("--pick", choices=("min_t_int_v", "min_t_ryd", "min_tau"),
                   help="copy this extremal pulse next to --out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("budget", help="Monte-Carlo noise budget at a hardware operating point")
    p.add_argument("pulse")
    p.add_argument("--sources", nargs="+", help="subset of noise sources, or 'none'",
                   choices=[s.value for s in NoiseSource] + ["none"])
    p.add_argument("--shots", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _hw_flags(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("frt", help="fidelity response functions and FRT infidelity")
    p.add_argument("pulse")
    p.add_argument("--kind", choices=("phase", "intensity", "both"), default="both")
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--f-max", type=float, help="largest grid frequency in Hz (log grid)")
    p.add_argument("--out", required=True, help="output directory")
    _hw_flags(p)
    p.set_defaults(func=cmd_frt)

    p = sub.add_parser("sensitivity", help="budget curves under one hardware parameter")
    p.add_argument("pulse")
    p.add_argument("--vary", required=True, choices=tuple(_VARY_UNITS))
    p.add_argument("--grid", type=_floats, required=True,
                   help="values: omega in MHz, trap frequencies in kHz, temperature in uK, n")
    p.add_argument("--sources", nargs="+", choices=[s.value for s in NoiseSource])
    p.add_argument("--shots", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _hw_flags(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("rescale", help="rescale a pulse to a physical Rabi frequency")
    p.add_argument("pulse")
    p.add_argument("--omega-max-mhz", type=float, required=True, help="Omega_max / 2 pi in MHz")
    p.add_argument("--v-dipole-mhz", type=float, help="override V / 2 pi in MHz (flagged)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("atomic", help="88Sr atomic data reports")
    p.add_argument("what", choices=("lifetime", "energy", "c3", "scaling"))
    p.add_argument("--n", type=_ints, default=[61], help="e.g. 61 or 20,40,60 or 30:70:10")
    p.add_argument("--series", nargs="+", default=["3S1", "3P0"], choices=["3S1", "3P0", "3P1", "3P2", "3D1"])
    p.add_argument("--convention", choices=("sum_rule", "upper_weight"), default="sum_rule")
    p.add_argument("--channels", type=int, default=0, help="print the strongest decay channels")
    p.add_argument("--qd-file", help="quantum-defect table to use instead of the shipped one")
    p.add_argument("--out")
    p.set_defaults(func=cmd_atomic)

    p = sub.add_parser("continuation", help="warm-started sweep of the exchange angle")
    p.add_argument("pulse", help="converged seed pulse")
    p.add_argument("--theta-end", type=float, default=0.25, help="final angle in units of pi")
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("--out-dir", required=True)
    _opt_flags(p)
    p.set_defaults(func=cmd_continuation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args) or 0)
    except UsageError as exc:
        parser.error(str(exc))
    except RydswapError as exc:
        print(f"rydswap: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"rydswap: numerical failure: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
