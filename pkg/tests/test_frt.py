import numpy as np
import pytest

from conftest import random_pulse
from rydswap.errors import ConfigurationError, InputError
from rydswap.frt import (
    NoiseKind,
    NoiseOperatorKind,
    StateAverage,
    default_grid,
    frt_infidelity,
    noise_operator,
    response_function,
    response_spectra,
    zero_frequency_audit,
)
from rydswap.hamiltonian import ControlSnapshot, DriveChannel, Scheme, SystemConfig, embed_target
from rydswap.noise import NoiseConfig, NoiseDraw, NoiseSource, PsdTable, noise_budget, noisy_propagate
from rydswap.propagation import Modulation, gate_fidelity

FREQS = np.linspace(0.0, 2.0, 7)


@pytest.mark.parametrize("kind", list(NoiseKind))
def test_noise_operators_hermitian(kind):
    snap = ControlSnapshot(rabi={DriveChannel.CH1R: 0.7}, phase={DriveChannel.CH1R: 1.1})
    op = noise_operator(kind, DriveChannel.CH1R, snap)
    assert np.allclose(op, op.conj().T, atol=1e-15)
    assert np.linalg.norm(op) > 0


@pytest.mark.parametrize("scheme,modulation", [(Scheme.A, Modulation.PHASE), (Scheme.B, Modulation.RABI)])
@pytest.mark.parametrize("kind", list(NoiseKind))
def test_factorized_matches_direct(rng, scheme, modulation, kind):
    cfg = SystemConfig(v_dipole=2.0, scheme=scheme)
    pulse = random_pulse(rng, scheme, modulation, segments=8, duration=6.0)
    for avg, states in ((StateAverage.BASIS, None),
                        (StateAverage.STATES, rng.normal(size=(16, 3)) + 1j * rng.normal(size=(16, 3)))):
        a = response_function(cfg, pulse, kind, frequencies=FREQS, substeps=2, state_average=avg, states=states)
        b = response_function(cfg, pulse, kind, frequencies=FREQS, substeps=2, state_average=avg, states=states,
                              method="direct")
        for key in a.values:
            assert np.allclose(a.values[key], b.values[key], rtol=1e-8, atol=1e-12)
            assert np.all(a.values[key] >= -1e-12)


def test_static_offset_second_order(phase_record):
    pulse = phase_record.pulse
    cfg = SystemConfig(v_dipole=2.0)
    target = embed_target(np.pi)
    base = 1 - gate_fidelity(noisy_propagate(cfg, pulse, NoiseDraw()), target)
    audit = zero_frequency_audit(cfg, pulse, substeps=4)
    eps = 1e-3
    n_sub = pulse.segments * 4

    def shift(field, ch):
        # averaging +eps and -eps cancels the linear term left by the residual gate error
        vals = []
        for sign in (1, -1):
            draw = NoiseDraw(**{field: {ch: np.full(n_sub, sign * eps)}})
            vals.append(1 - gate_fidelity(noisy_propagate(cfg, pulse, draw, substeps=4), target) - base)
        return np.mean(vals)

    for ch in pulse.channels:
        assert shift("phase_noise", ch) == pytest.approx(0.5 * eps**2 * audit[ch][0], rel=0.05)
        assert shift("intensity_noise", ch) == pytest.approx(0.5 * eps**2 * audit[ch][1], rel=0.05)


@pytest.mark.parametrize("kind,source", [("phase", NoiseSource.LASER_PHASE), ("intensity", NoiseSource.LASER_INTENSITY)])
def test_frt_matches_monte_carlo(phase_record, kind, source):
    pulse = phase_record.pulse
    cfg = SystemConfig(v_dipole=2.0)
    f_c = 4 / (2 * np.pi)
    psd = PsdTable.white(kind, 1e-4, f_c)
    spectrum = response_function(cfg, pulse, kind, frequencies=np.linspace(0, f_c, 300))
    predicted = frt_infidelity(spectrum, psd)
    noise = NoiseConfig(**{f"{kind}_psd": psd})
    budget = noise_budget(cfg, pulse, noise, 120, 1, sources=[source], combined=False)
    entry = budget[source]
    measured = entry.mean - budget.noise_free
    assert abs(predicted - measured) <= max(0.2 * measured, 3 * entry.stderr)


def test_zero_psd_gives_zero(phase_record):
    spectrum = response_spectra(SystemConfig(v_dipole=2.0), phase_record.pulse, frequencies=FREQS)
    assert frt_infidelity(spectrum, PsdTable.white("phase", 0.0, 10.0)) == 0.0
    assert frt_infidelity(spectrum, {"intensity": PsdTable.white("intensity", 0.0, 10.0)}) == 0.0
    assert len(spectrum.values) == 2 * len(phase_record.pulse.channels)
    assert np.all(spectrum.total(NoiseKind.PHASE) >= 0)


def test_frt_linear_in_psd(phase_record):
    spectrum = response_function(SystemConfig(v_dipole=2.0), phase_record.pulse, NoiseKind.PHASE, frequencies=FREQS)
    psd = PsdTable("phase", [0.0, 1.0, 2.0], [1e-3, 5e-4, 1e-4])
    assert frt_infidelity(spectrum, psd.scaled(3.0)) == pytest.approx(3 * frt_infidelity(spectrum, psd))


def test_default_grid(phase_record):
    grid = default_grid(phase_record.pulse, points=50)
    assert grid[0] == 0.0 and len(grid) == 50
    assert np.all(np.diff(grid) > 0)
    assert grid[-1] == pytest.approx(10 * phase_record.pulse.omega_max / (2 * np.pi))


def test_validation(rng):
    pulse = random_pulse(rng, Scheme.A, Modulation.PHASE, segments=3)
    cfg = SystemConfig(v_dipole=1.0)
    with pytest.raises(ConfigurationError):
        response_function(cfg, pulse, NoiseKind.PHASE, channel=DriveChannel.CH01, frequencies=FREQS)
    with pytest.raises(InputError):
        response_function(cfg, pulse, NoiseKind.PHASE, frequencies=np.array([-1.0]))
    with pytest.raises(InputError):
        response_function(cfg, pulse, NoiseKind.PHASE, frequencies=FREQS, state_average=StateAverage.STATES)
    with pytest.raises(InputError):
        response_function(cfg, pulse, NoiseKind.PHASE, frequencies=FREQS, method="fft")
    assert NoiseOperatorKind("phase", "ch1r").kind is NoiseKind.PHASE
