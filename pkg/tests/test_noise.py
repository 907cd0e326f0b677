import numpy as np
import pytest
from scipy import stats

from conftest import random_pulse
from rydswap.errors import ConfigurationError, DomainError, InputError
from rydswap.hamiltonian import DriveChannel, Scheme, SystemConfig, embed_target
from rydswap.noise import (
    ALL_COMBINED,
    HBAR,
    K_B,
    SR88_MASS,
    NoiseConfig,
    NoiseDraw,
    NoiseSource,
    PsdTable,
    TrapConfig,
    WavevectorConfig,
    channel_to_state_detunings,
    doppler_sigma,
    noise_budget,
    noisy_propagate,
    position_sigma,
    psd_frequency_grid,
    sample_doppler,
    sample_interaction,
    sample_psd_series,
    series_variance,
    velocity_sigma,
)
from rydswap.propagation import Modulation, gate_fidelity, propagate

TWO_PI = 2 * np.pi
STD_TRAP = TrapConfig(omega_xy=TWO_PI * 100e3, omega_z=TWO_PI * 20e3, temperature=1e-6)


def test_zero_temperature_ground_state_width():
    trap = TrapConfig(TWO_PI * 100e3, TWO_PI * 20e3, 0.0, zero_temperature=True)
    expected = np.sqrt(HBAR / (2 * SR88_MASS * trap.axis_frequencies))
    assert np.allclose(position_sigma(trap), expected, rtol=1e-14)
    assert np.allclose(velocity_sigma(trap), expected * trap.axis_frequencies, rtol=1e-14)


def test_high_temperature_classical_limit():
    trap = TrapConfig(TWO_PI * 1e3, TWO_PI * 1e3, 1e-3)
    assert np.allclose(velocity_sigma(trap), np.sqrt(K_B * 1e-3 / SR88_MASS), rtol=1e-3)
    assert np.allclose(position_sigma(trap), np.sqrt(K_B * 1e-3 / SR88_MASS) / (TWO_PI * 1e3), rtol=1e-3)


def test_trap_validation():
    with pytest.raises(DomainError):
        TrapConfig(TWO_PI * 100e3, TWO_PI * 20e3, 0.0)
    with pytest.raises(ConfigurationError):
        TrapConfig(-1.0, 1.0, 1e-6)


def test_reference_constants():
    k = WavevectorConfig.uniform([DriveChannel.CH1R], TWO_PI * 3.10e6)
    assert doppler_sigma(STD_TRAP, k)[DriveChannel.CH1R] / TWO_PI == pytest.approx(47e3, rel=0.01)
    assert np.allclose(position_sigma(STD_TRAP) * 1e6, [0.02, 0.02, 0.08], atol=0.005)


def test_interaction_nominal_and_statistics():
    rng = np.random.default_rng(0)
    assert sample_interaction(STD_TRAP, rng, np.zeros((2, 3))) == pytest.approx(STD_TRAP.v_dipole)
    shifted = sample_interaction(STD_TRAP, rng, np.array([[0, 0, 0], [1e-7, 0, 0]]))
    assert shifted == pytest.approx(STD_TRAP.c3 / (STD_TRAP.separation + 1e-7) ** 3)
    draws = np.array([sample_interaction(STD_TRAP, rng) for _ in range(4000)])
    rel = draws / STD_TRAP.v_dipole - 1
    # first order: dV/V = -3 dx / R with dx the relative x displacement
    sigma_x = np.sqrt(2) * position_sigma(STD_TRAP)[0]
    assert np.std(rel) == pytest.approx(3 * sigma_x / STD_TRAP.separation, rel=0.1)
    with pytest.raises(InputError):
        sample_interaction(STD_TRAP, rng, np.array([[0, 0, 0], [-STD_TRAP.separation, 0, 0]]))


def test_doppler_marginals_are_gaussian():
    k = WavevectorConfig.uniform([DriveChannel.CH1R, DriveChannel.CH0RP], TWO_PI * 3.10e6)
    sigma = doppler_sigma(STD_TRAP, k)[DriveChannel.CH1R]
    rng = np.random.default_rng(5)
    d = np.array([sample_doppler(STD_TRAP, k, Scheme.A, rng) for _ in range(5000)])
    for atom in range(2):
        assert stats.kstest(d[:, atom, 1] / sigma, "norm").pvalue > 0.01
    # both lasers share the same velocity projection
    assert np.allclose(d[:, :, 1], d[:, :, 2])
    assert np.all(d[:, :, 0] == 0)


def test_shared_doppler_mode():
    k = WavevectorConfig.uniform([DriveChannel.CH1R], 1e7)
    d = sample_doppler(STD_TRAP, k, Scheme.A, np.random.default_rng(1), shared=True)
    assert np.array_equal(d[0], d[1])


def test_state_detunings_mapping():
    shifts = {DriveChannel.CH01: 1.0, DriveChannel.CH1R: 10.0, DriveChannel.CHRRP: 100.0}
    assert np.allclose(channel_to_state_detunings(Scheme.B, shifts), [1.0, 11.0, 111.0])
    shifts = {DriveChannel.CH1R: 2.0, DriveChannel.CH0RP: 3.0}
    assert np.allclose(channel_to_state_detunings(Scheme.A, shifts), [0.0, 2.0, 3.0])


def test_psd_table_validation_and_interp():
    with pytest.raises(InputError):
        PsdTable("amplitude", [0, 1], [1, 1])
    with pytest.raises(InputError):
        PsdTable("phase", [1, 0], [1, 1])
    with pytest.raises(InputError):
        PsdTable("phase", [0, 1], [1, -1])
    t = PsdTable("phase", [1.0, 3.0], [2.0, 4.0])
    assert np.allclose(t(np.array([0.5, 2.0, 3.5])), [0.0, 3.0, 0.0])


def test_psd_series_variance():
    psd = PsdTable("phase", [0.0, 5.0, 20.0], [1e-3, 1e-3, 0.0])
    duration, dt = 1.0, 0.02
    rng = np.random.default_rng(11)
    n = 20000
    samples = np.array([sample_psd_series(psd, duration, dt, rng)[7] for _ in range(n)])
    expected = series_variance(psd, duration, dt)
    # variance of the sample variance for a Gaussian-like trace is about 2 sigma^4 / n
    assert abs(np.var(samples) - expected) < 3 * np.sqrt(2 / n) * expected * 1.5
    grid = psd_frequency_grid(duration, dt)
    assert grid[0] == pytest.approx(0.25) and grid[-1] <= 25.0


def test_psd_series_white_level():
    psd = PsdTable.white("intensity", 2e-4, 100.0)
    assert series_variance(psd, 2.0, 0.005) == pytest.approx(2 * 2e-4 * 100.0, rel=0.01)
    assert not np.any(sample_psd_series(PsdTable.white("phase", 0.0, 10.0), 1.0, 0.1, np.random.default_rng(0)))


def test_empty_draw_matches_noise_free(rng):
    pulse = random_pulse(rng, Scheme.A, Modulation.PHASE, segments=6)
    cfg = SystemConfig(v_dipole=1.3)
    u0 = propagate(cfg, pulse).final_operator
    u1 = noisy_propagate(cfg, pulse, NoiseDraw()).final_operator
    assert np.allclose(u0, u1, atol=1e-13)
    # zero laser traces route through the substep path and must agree too
    zeros = {ch: np.zeros(pulse.segments * 8) for ch in pulse.channels}
    u2 = noisy_propagate(cfg, pulse, NoiseDraw(phase_noise=zeros), substeps=8).final_operator
    assert np.allclose(u0, u2, atol=1e-12)


def test_decay_linear_in_gamma(phase_record):
    pulse = phase_record.pulse
    cfg = SystemConfig(v_dipole=pulse.v_over_omega * pulse.omega_max)
    target = embed_target(np.pi)
    base = 1 - gate_fidelity(noisy_propagate(cfg, pulse, NoiseDraw()), target)
    gammas = np.geomspace(1e-6, 1e-4, 5)
    vals = [1 - gate_fidelity(noisy_propagate(cfg, pulse, NoiseDraw(gammas=(g, g))), target) - base for g in gammas]
    slope = np.polyfit(gammas, vals, 1)[0]
    assert np.allclose(vals, slope * gammas, rtol=2e-2)
    # amplitudes decay at Gamma / 2 and the fidelity is linear in the overlap
    assert slope == pytest.approx(phase_record.t_ryd / 2, rel=0.1)


def _small_noise(pulse):
    lasers = pulse.channels
    trap = TrapConfig(1.0, 1.0, 0.0, zero_temperature=True, separation=1.0, c3=2.0, mass=HBAR * 200)
    return NoiseConfig(
        trap=trap,
        wavevectors=WavevectorConfig.uniform(lasers, 3.0),
        gamma_r=1e-4,
        gamma_rp=1e-4,
        phase_psd=PsdTable.white("phase", 1e-5, 5.0),
    )


def test_budget_determinism_and_matched_streams(phase_record):
    pulse = phase_record.pulse
    cfg = SystemConfig(v_dipole=2.0)
    noise = _small_noise(pulse)
    a = noise_budget(cfg, pulse, noise, shots=6, seed=42, substeps=4)
    b = noise_budget(cfg, pulse, noise, shots=6, seed=42, substeps=4)
    assert a.rows() == b.rows()
    assert a[NoiseSource.DECAY].shots == 1
    assert ALL_COMBINED in a.entries
    only = noise_budget(cfg, pulse, noise, shots=6, seed=42, sources=[NoiseSource.INTERACTION], substeps=4)
    assert only[NoiseSource.INTERACTION].mean == a[NoiseSource.INTERACTION].mean
    c = noise_budget(cfg, pulse, noise, shots=6, seed=43, substeps=4)
    assert c[NoiseSource.INTERACTION].mean != a[NoiseSource.INTERACTION].mean


def test_budget_requires_inputs(phase_record):
    pulse = phase_record.pulse
    with pytest.raises(ConfigurationError):
        noise_budget(SystemConfig(v_dipole=2.0), pulse, NoiseConfig(), 2, 0, sources=[NoiseSource.LASER_PHASE])
    with pytest.raises(InputError):
        noise_budget(SystemConfig(v_dipole=2.0), pulse, NoiseConfig(), 0, 0)
