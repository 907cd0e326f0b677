import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import random_pulse
from rydswap.errors import ConfigurationError, InputError
from rydswap.hamiltonian import (
    IDX_RPR,
    IDX_RRP,
    RYDBERG_OCCUPATION,
    ControlSnapshot,
    DriveChannel,
    Scheme,
    SystemConfig,
    build_hamiltonian,
    embed_target,
)
from rydswap.noise import NoiseDraw, noisy_propagate
from rydswap.propagation import Modulation, PulseProtocol, gate_fidelity, propagate


def ode_propagator(config, pulse):
    """Column-by-column DOP853 integration of i dU/dt = H(t) U (oracle)."""
    dt = pulse.dt
    rabi, phase = pulse.rabi_matrix(), pulse.phase_matrix()
    hs = []
    for k in range(pulse.segments):
        snap = ControlSnapshot({c: rabi[i, k] for i, c in enumerate(pulse.channels)},
                               {c: phase[i, k] for i, c in enumerate(pulse.channels)})
        hs.append(build_hamiltonian(config, snap))
    u = np.eye(16, dtype=complex)
    for h in hs:
        def rhs(t, y, h=h):
            return (-1j * h @ y.reshape(16, 16)).ravel()

        sol = solve_ivp(rhs, (0, dt), u.ravel(), method="DOP853", rtol=1e-12, atol=1e-13)
        u = sol.y[:, -1].reshape(16, 16)
    return u


@pytest.mark.parametrize("scheme", [Scheme.A, Scheme.B])
@pytest.mark.parametrize("modulation", [Modulation.RABI, Modulation.PHASE])
def test_matches_ode(rng, scheme, modulation):
    pulse = random_pulse(rng, scheme, modulation, segments=4, duration=2.0)
    cfg = SystemConfig(v_dipole=1.3, scheme=scheme)
    u = propagate(cfg, pulse, substeps_per_segment=1).final_operator
    assert np.max(np.abs(u - ode_propagator(cfg, pulse))) < 1e-8


def test_substeps_do_not_change_operator(rng):
    pulse = random_pulse(rng, segments=5)
    cfg = SystemConfig(v_dipole=0.9)
    a = propagate(cfg, pulse, 1).final_operator
    b = propagate(cfg, pulse, 7).final_operator
    assert np.allclose(a, b, atol=1e-12)


def test_unitary_without_decay(rng):
    pulse = random_pulse(rng, Scheme.B, Modulation.RABI, segments=8)
    u = propagate(SystemConfig(v_dipole=2.0, scheme=Scheme.B), pulse).final_operator
    assert np.allclose(u @ u.conj().T, np.eye(16), atol=1e-10)


def test_decay_shrinks_norm(rng):
    pulse = random_pulse(rng, segments=8)
    u = propagate(SystemConfig(v_dipole=2.0, gamma_r=0.05), pulse).final_operator
    assert np.linalg.norm(u, 2) <= 1 + 1e-12
    assert np.linalg.norm(u @ np.eye(16)[:, 0]) < 1


def test_zero_pulse_identity():
    pulse = PulseProtocol(Scheme.A, Modulation.RABI, 1.0, {DriveChannel.CH1R: [0, 0], DriveChannel.CH0RP: [0, 0]})
    res = propagate(SystemConfig(v_dipole=1.0), pulse)
    assert gate_fidelity(res, embed_target(1e-12)) == pytest.approx(1.0, abs=1e-12)
    assert res.t_int == 0 and res.t_ryd == 0


def test_t_ryd_oracle_single_atom_rabi():
    # |01>: atom 2 sees a resonant 1<->r drive; P_r = sin^2(Omega t / 2)
    omega, tau = 1.0, 2.0
    pulse = PulseProtocol(Scheme.A, Modulation.RABI, tau,
                          {DriveChannel.CH1R: [omega] * 4, DriveChannel.CH0RP: [0.0] * 4})
    state = np.zeros(16, dtype=complex)
    state[1] = 1.0
    res = propagate(SystemConfig(v_dipole=0.0), pulse, substeps_per_segment=200, initial_states=state)
    exact = tau / 2 - np.sin(omega * tau) / (2 * omega)
    assert res.t_ryd == pytest.approx(exact, rel=1e-5)
    assert res.t_int == 0.0


def test_t_int_bounds(rng):
    pulse = random_pulse(rng, segments=10, duration=5.0)
    res = propagate(SystemConfig(v_dipole=1.0), pulse, record_populations=True)
    assert 0 <= res.t_int <= res.t_ryd / 2 + 1e-12
    assert res.t_ryd <= 2 * pulse.duration
    pops = res.trajectory_populations
    assert np.allclose(pops.sum(axis=1), 1.0, atol=1e-10)
    w = np.zeros(16)
    w[[IDX_RRP, IDX_RPR]] = 1
    assert np.all(RYDBERG_OCCUPATION >= 2 * w)


def test_noiseless_draw_bitwise_equal(rng):
    pulse = random_pulse(rng, segments=6)
    cfg = SystemConfig(v_dipole=1.0)
    a = propagate(cfg, pulse)
    b = noisy_propagate(cfg, pulse, NoiseDraw())
    assert np.array_equal(a.final_operator, b.final_operator)
    assert a.t_int == b.t_int and a.t_ryd == b.t_ryd


def test_scheme_mismatch(rng):
    pulse = random_pulse(rng, Scheme.A)
    with pytest.raises(ConfigurationError):
        propagate(SystemConfig(v_dipole=1.0, scheme=Scheme.B), pulse)


def test_pulse_validation():
    with pytest.raises(InputError):
        PulseProtocol(Scheme.A, Modulation.RABI, 1.0, {DriveChannel.CH1R: [1, -1], DriveChannel.CH0RP: [0, 0]})
    with pytest.raises(InputError):
        PulseProtocol(Scheme.A, Modulation.RABI, 1.0, {DriveChannel.CH1R: [1], DriveChannel.CH0RP: [0]})
    with pytest.raises(InputError):
        PulseProtocol(Scheme.A, Modulation.RABI, 1.0, {DriveChannel.CH01: [1, 1], DriveChannel.CH0RP: [0, 0]})
    with pytest.raises(InputError):
        PulseProtocol(Scheme.A, Modulation.RABI, 0.0, {DriveChannel.CH1R: [1, 1], DriveChannel.CH0RP: [0, 0]})
    with pytest.raises(InputError):
        PulseProtocol(Scheme.A, Modulation.PHASE, 1.0, {DriveChannel.CH1R: [np.nan, 1], DriveChannel.CH0RP: [0, 0]})
