"""GRAPE-style pulse optimisation with exact gradients.

The cost is ``(1 - F) + lam * sum_f C_smooth[f]`` over all piecewise
control arrays. Gradients come from the adjoint recursion with the
derivative of each segment exponential taken in the segment eigenbasis.

Random streams: run ``r`` of sweep point ``p`` uses
``SeedSequence(master_seed, spawn_key=(p, r))``; a bare :func:`optimize`
call is sweep point 0.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from rydswap.errors import InputError
from rydswap.hamiltonian import (
    DIM,
    SCHEME_CHANNELS,
    GateTarget,
    Scheme,
    SystemConfig,
    drive_hamiltonians,
    drive_operator,
    embed_target,
    static_hamiltonian,
)
from rydswap.propagation import Modulation, PulseProtocol, gate_fidelity, propagate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizationSettings:
    lam: float = 1e-3
    restarts: int = 1
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-10
    seed: int = 0
    bounds_mode: str = "box"
    omega_init: float = 2 * np.pi
    target_infidelity: float = 0.0
    boundary_weight: float = 0.0
    rabi_max: float | None = None  # optional amplitude cap for Rabi modulation

    def __post_init__(self):
        if self.lam < 0:
            raise InputError("smoothness weight must be >= 0")
        if self.restarts < 1:
            raise InputError("restarts must be >= 1")
        if self.bounds_mode not in ("box", "reparameterize"):
            raise InputError(f"unknown bounds mode {self.bounds_mode!r}")
        if self.rabi_max is not None and not self.rabi_max > 0:
            raise InputError("rabi_max must be positive")


@dataclass
class OptimizationRecord:
    pulse: PulseProtocol
    infidelity: float
    cost: float
    t_int: float
    t_ryd: float
    iterations: int
    seed: int
    converged: bool
    theta: float = np.pi
    v_dipole: float = 0.0
    flagged: bool = False
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def tau_omega(self) -> float:
        return self.pulse.duration * self.pulse.omega_max

    @property
    def v_over_omega(self) -> float:
        return self.v_dipole / self.pulse.omega_max if self.pulse.omega_max > 0 else np.inf

    @property
    def theta_dipole(self) -> float:
        return self.t_int * self.v_dipole


# ---------------------------------------------------------------------------
# Cost pieces


def smoothness_cost(control: np.ndarray) -> float:
    f = np.asarray(control, dtype=float)
    if f.size < 2:
        raise InputError("smoothness needs at least two values")
    return float(np.sum((np.diff(f) / 2.0) ** 2))


def smoothness_gradient(control: np.ndarray) -> np.ndarray:
    f = np.asarray(control, dtype=float)
    d = np.diff(f) / 2.0
    g = np.zeros_like(f)
    g[:-1] -= d
    g[1:] += d
    return g


def _phi_matrix(evals: np.ndarray, dt: float) -> np.ndarray:
    """Divided differences of exp(-i dt e) over eigenvalue pairs, stable for near-degeneracy."""
    y = -dt * (evals[:, :, None] - evals[:, None, :])
    # (exp(iy) - 1) / (iy) = sin(y)/y + i * 2 sin^2(y/2)/y
    ratio = np.sinc(y / np.pi) + 1j * np.sin(y / 2) * np.sinc(y / (2 * np.pi))
    return np.exp(-1j * dt * evals)[:, None, :] * ratio


def _infidelity_and_gradient(
    config: SystemConfig,
    pulse: PulseProtocol,
    target: GateTarget,
    need_grad: bool = True,
) -> tuple[float, np.ndarray | None]:
    channels = pulse.channels
    rabi = pulse.rabi_matrix()
    phase = pulse.phase_matrix()
    dt = pulse.dt
    h = drive_hamiltonians(channels, rabi, phase) + static_hamiltonian(config.v_dipole)
    evals, q = np.linalg.eigh(h)
    qh = np.conj(np.swapaxes(q, -1, -2))
    u = (q * np.exp(-1j * dt * evals)[:, None, :]) @ qh

    w = np.conj(target.embedded()).T
    n = len(u)
    forward = np.empty((n + 1, DIM, DIM), dtype=complex)
    forward[0] = np.eye(DIM)
    for k in range(n):
        forward[k + 1] = u[k] @ forward[k]
    g = np.trace(w @ forward[n])
    infid = 1.0 - abs(g) / 4.0
    if not need_grad:
        return float(infid), None

    backward = np.empty((n, DIM, DIM), dtype=complex)
    b = w
    for k in range(n - 1, -1, -1):
        backward[k] = b
        b = b @ u[k]
    c = forward[:-1] @ backward  # C_k = A_{k-1} B_k
    m_t = np.swapaxes(qh @ c @ q, -1, -2)
    weight = m_t * _phi_matrix(evals, dt) * (-1j * dt)

    grad = np.empty((len(channels), n))
    g_abs = abs(g)
    phase_factor = np.conj(g) / (4.0 * g_abs) if g_abs > 0 else 0.0
    for ci, ch in enumerate(channels):
        x = drive_operator(ch)
        e = np.exp(1j * phase[ci])[:, None, None]
        if pulse.modulation is Modulation.RABI:
            dh = 0.5 * (e * x + np.conj(e) * x.T)
        else:
            amp = (0.5 * rabi[ci])[:, None, None]
            dh = amp * (1j * e * x - 1j * np.conj(e) * x.T)
        dg = np.einsum("kij,kij->k", weight, qh @ dh @ q)
        grad[ci] = -np.real(phase_factor * dg)
    return float(infid), grad


def total_cost(config: SystemConfig, pulse: PulseProtocol, target: GateTarget, lam: float) -> float:
    infid, _ = _infidelity_and_gradient(config, pulse, target, need_grad=False)
    return infid + lam * sum(smoothness_cost(row) for row in pulse.control_matrix())


def gradient(config: SystemConfig, pulse: PulseProtocol, target: GateTarget, lam: float) -> np.ndarray:
    """d total_cost / d control, shape (channels, segments)."""
    _, grad = _infidelity_and_gradient(config, pulse, target)
    for ci, row in enumerate(pulse.control_matrix()):
        grad[ci] += lam * smoothness_gradient(row)
    return grad


def _boundary_penalty(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    value = float(np.sum(matrix[:, 0] ** 2 + matrix[:, -1] ** 2))
    grad = np.zeros_like(matrix)
    grad[:, 0] = 2 * matrix[:, 0]
    grad[:, -1] = 2 * matrix[:, -1]
    return value, grad


# ---------------------------------------------------------------------------
# Optimisation


def _run_seed(master_seed: int, point: int, run: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(point, run))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def random_pulse(
    scheme: Scheme,
    modulation: Modulation,
    duration: float,
    segments: int,
    rng: np.random.Generator,
    omega_init: float = 2 * np.pi,
    omega0: float = 1.0,
) -> PulseProtocol:
    scheme = Scheme(scheme)
    modulation = Modulation(modulation)
    channels = SCHEME_CHANNELS[scheme]
    if modulation is Modulation.RABI:
        values = rng.uniform(0.0, omega_init, size=(len(channels), segments))
    else:
        values = rng.uniform(-np.pi, np.pi, size=(len(channels), segments))
    return PulseProtocol(scheme, modulation, duration, dict(zip(channels, values)), omega0=omega0)


def resample_pulse(pulse: PulseProtocol, segments: int) -> PulseProtocol:
    """Piecewise-constant resampling on a new segment count (same duration)."""
    if segments == pulse.segments:
        return pulse
    old = (np.arange(pulse.segments) + 0.5) / pulse.segments
    new = (np.arange(segments) + 0.5) / segments
    matrix = np.array([np.interp(new, old, row) for row in pulse.control_matrix()])
    return pulse.with_controls(matrix)


class _Objective:
    def __init__(self, config, template, target, settings, rabi_upper):
        self.config = config
        self.template = template
        self.target = target
        self.settings = settings
        self.shape = (len(template.channels), template.segments)
        self.reparam = template.modulation is Modulation.RABI and settings.bounds_mode == "reparameterize"
        self.rabi_upper = rabi_upper
        self.last_infidelity = np.inf
        self.history: list[float] = []

    def to_matrix(self, x: np.ndarray) -> np.ndarray:
        m = x.reshape(self.shape)
        return m**2 if self.reparam else m

    def from_matrix(self, m: np.ndarray) -> np.ndarray:
        return (np.sqrt(np.maximum(m, 0.0)) if self.reparam else m).ravel()

    def bounds(self):
        if self.template.modulation is Modulation.RABI and not self.reparam:
            return [(0.0, self.rabi_upper)] * int(np.prod(self.shape))
        if self.reparam and self.rabi_upper is not None:
            g = float(np.sqrt(self.rabi_upper))
            return [(-g, g)] * int(np.prod(self.shape))
        return None

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        m = self.to_matrix(x)
        pulse = self.template.with_controls(np.maximum(m, 0.0) if self.template.modulation is Modulation.RABI else m)
        infid, grad = _infidelity_and_gradient(self.config, pulse, self.target)
        lam = self.settings.lam
        cost = infid
        for ci, row in enumerate(m):
            cost += lam * smoothness_cost(row)
            grad[ci] += lam * smoothness_gradient(row)
        if self.settings.boundary_weight > 0:
            pen, pgrad = _boundary_penalty(m)
            cost += self.settings.boundary_weight * pen
            grad += self.settings.boundary_weight * pgrad
        if self.reparam:
            grad = grad * 2 * x.reshape(self.shape)
        self.last_infidelity = infid
        return cost, grad.ravel()


def _finish(config, pulse, target, settings, iterations, seed, converged, history) -> OptimizationRecord:
    result = propagate(replace(config, gamma_r=0.0, gamma_rp=0.0), pulse)
    infid = min(max(1.0 - gate_fidelity(result, target), 0.0), 1.0)
    cost = infid + settings.lam * sum(smoothness_cost(r) for r in pulse.control_matrix())
    omega = pulse.omega_max
    pulse = replace(pulse, v_over_omega=config.v_dipole / omega if omega > 0 else None)
    if pulse.modulation is Modulation.RABI and omega > 0:
        pulse = replace(pulse, omega0=omega)
    return OptimizationRecord(
        pulse=pulse,
        infidelity=infid,
        cost=cost,
        t_int=result.t_int,
        t_ryd=result.t_ryd,
        iterations=iterations,
        seed=seed,
        converged=converged,
        theta=target.theta,
        v_dipole=config.v_dipole,
        history=history,
    )


def optimize_pulse(
    config: SystemConfig,
    initial: PulseProtocol,
    settings: OptimizationSettings,
    target: GateTarget | None = None,
    seed: int = 0,
    rabi_upper: float | None = None,
) -> OptimizationRecord:
    """Run one quasi-Newton descent from ``initial``."""
    target = target or embed_target(np.pi)
    if initial.modulation is Modulation.RABI and rabi_upper is not None:
        initial = initial.with_controls(np.minimum(initial.control_matrix(), rabi_upper))
    obj = _Objective(config, initial, target, settings, rabi_upper)
    x0 = obj.from_matrix(initial.control_matrix())
    state = {"x": x0, "iterations": 0, "hit_target": False}

    def callback(intermediate_result):
        state["x"] = intermediate_result.x
        state["iterations"] += 1
        obj.history.append(float(intermediate_result.fun))
        if settings.target_infidelity > 0 and obj.last_infidelity < settings.target_infidelity:
            state["hit_target"] = True
            raise StopIteration

    res = minimize(
        obj,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=obj.bounds(),
        callback=callback,
        options={
            "maxiter": settings.max_iterations,
            "gtol": settings.gradient_tolerance,
            "ftol": 1e-16,
            "maxcor": 30,
        },
    )
    x = res.x if res.x is not None else state["x"]
    matrix = obj.to_matrix(np.asarray(x))
    if initial.modulation is Modulation.RABI:
        matrix = np.maximum(matrix, 0.0)
    pulse = initial.with_controls(matrix)
    grad_norm = float(np.max(np.abs(res.jac))) if res.jac is not None else np.inf
    converged = state["hit_target"] or grad_norm < settings.gradient_tolerance
    return _finish(config, pulse, target, settings, max(int(res.nit), state["iterations"]), seed, converged, obj.history)


def optimize_runs(
    config: SystemConfig,
    settings: OptimizationSettings,
    duration: float,
    segments: int,
    modulation: Modulation,
    scheme: Scheme | None = None,
    target: GateTarget | None = None,
    warm_start: PulseProtocol | None = None,
    point: int = 0,
    omega0: float = 1.0,
    rabi_upper: float | None = None,
) -> list[OptimizationRecord]:
    """All restarts for one (duration, V) point, in restart order."""
    if not duration > 0:
        raise InputError("duration must be positive")
    scheme = Scheme(scheme or config.scheme)
    if scheme is not config.scheme:
        config = replace(config, scheme=scheme)
    if rabi_upper is None:
        rabi_upper = settings.rabi_max
    omega_init = settings.omega_init if rabi_upper is None else min(settings.omega_init, rabi_upper)
    records = []
    for r in range(settings.restarts):
        seed = _run_seed(settings.seed, point, r)
        if warm_start is not None and r == 0:
            init = replace(resample_pulse(warm_start, segments), duration=duration)
        else:
            rng = np.random.default_rng(seed)
            init = random_pulse(scheme, modulation, duration, segments, rng, omega_init, omega0)
        records.append(optimize_pulse(config, init, settings, target, seed, rabi_upper))
    return records


def best_record(records: Sequence[OptimizationRecord]) -> OptimizationRecord:
    return min(records, key=lambda r: (r.infidelity, r.cost))


def optimize(
    config: SystemConfig,
    settings: OptimizationSettings,
    duration: float,
    segments: int,
    modulation: Modulation,
    scheme: Scheme | None = None,
    target: GateTarget | None = None,
    warm_start: PulseProtocol | None = None,
    omega0: float = 1.0,
    rabi_upper: float | None = None,
) -> OptimizationRecord:
    """Best record over ``settings.restarts`` runs (the first run is warm-started if given)."""
    return best_record(
        optimize_runs(config, settings, duration, segments, modulation, scheme, target,
                      warm_start, omega0=omega0, rabi_upper=rabi_upper)
    )


def _sweep_task(args):
    config, settings, duration, segments, modulation, point, omega0 = args
    return optimize_runs(config, settings, duration, segments, modulation, point=point, omega0=omega0)


def landscape_sweep(
    config: SystemConfig,
    durations: Sequence[float],
    v_over_omega: Sequence[float],
    runs_per_point: int,
    segments: int,
    modulation: Modulation,
    settings: OptimizationSettings,
    omega0: float = 1.0,
    workers: int = 1,
) -> list[OptimizationRecord]:
    """One record per (duration, V/Omega, run), deterministic in the master seed.

    ``durations`` are in units of 1/omega0; V is set to ``v * omega0``.
    Sweep point index runs over V/Omega (outer) then duration (inner).
    """
    if not len(durations) or not len(v_over_omega):
        raise InputError("sweep grids must be non-empty")
    run_settings = replace(settings, restarts=runs_per_point)
    tasks = []
    point = 0
    for v in v_over_omega:
        cfg = replace(config, v_dipole=float(v) * omega0)
        for d in durations:
            tasks.append((cfg, run_settings, float(d), segments, Modulation(modulation), point, omega0))
            point += 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def detect_speed_limit(
    records: Sequence[OptimizationRecord],
    threshold: float = 1e-4,
    upper: float = 1e-2,
    key=lambda r: r.pulse.duration,
) -> float | None:
    """Smallest grid duration whose best infidelity drops below ``threshold``
    while the preceding grid point stays above ``upper``."""
    best: dict[float, float] = {}
    for rec in records:
        d = key(rec)
        best[d] = min(best.get(d, np.inf), rec.infidelity)
    grid = sorted(best)
    for i, d in enumerate(grid):
        if best[d] < threshold:
            if i == 0 or best[grid[i - 1]] > upper:
                return d
            return None
    return None


def stretch_pulse(pulse: PulseProtocol, duration: float) -> PulseProtocol:
    return replace(pulse, duration=float(duration))


def continuation_theta(
    config: SystemConfig,
    seed_record: OptimizationRecord,
    thetas: Sequence[float],
    settings: OptimizationSettings,
    threshold: float = 1e-6,
    duration_step: float = 0.05,
    max_duration_steps: int = 20,
) -> list[OptimizationRecord]:
    """Warm-started sweep over exchange angles at fixed maximal Rabi frequency.

    For each angle the previous pulse seeds the optimiser at the previous
    duration; on failure the duration is stretched by ``duration_step``
    (relative) until the infidelity falls below ``threshold``. Durations are
    therefore non-decreasing along the sweep.
    """
    if seed_record.infidelity >= threshold:
        raise InputError("continuation needs a converged seed pulse")
    omega_max = seed_record.pulse.omega_max
    cfg = replace(config, v_dipole=seed_record.v_dipole, scheme=seed_record.pulse.scheme)
    out: list[OptimizationRecord] = []
    current = seed_record
    for theta in thetas:
        if np.isclose(theta, seed_record.theta) and not out:
            out.append(seed_record)
            continue
        target = embed_target(theta)
        base = current.pulse
        best = None
        for step in range(max_duration_steps + 1):
            duration = base.duration * (1 + duration_step) ** step
            init = stretch_pulse(base, duration)
            rec = optimize_pulse(cfg, init, settings, target, seed=current.seed, rabi_upper=omega_max)
            if best is None or rec.infidelity < best.infidelity:
                best = rec
            if rec.infidelity < threshold:
                break
            base = rec.pulse
        assert best is not None
        if best.infidelity >= threshold:
            best.flagged = True
            log.warning("continuation step theta=%.4f stayed at infidelity %.2e", theta, best.infidelity)
        out.append(best)
        current = best
    return out
