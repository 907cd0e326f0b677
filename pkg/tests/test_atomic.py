import math

import numpy as np
import pytest

from rydswap.atomic import (
    C3_ANCHOR,
    SR88,
    Series,
    c3_coefficient,
    clebsch_gordan,
    decay_rate,
    default_model,
    effective_n,
    level_energy,
    lifetime,
    load_qd_model,
    pair_strength,
    power_law_exponent,
    rabi_factor,
    radial_integral,
    reduced_dipole,
    scaling_laws,
    transition_wavelength,
    wigner_3j,
    wigner_6j,
)
from rydswap.atomic.dipole import hydrogen_parameters, overlap_integral, radial_parameters
from rydswap.atomic.qd import QdEntry, parse_qd_table
from rydswap.errors import DataGapError, DomainError, InputError


def test_wigner_3j_known_values():
    assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-15)
    assert wigner_3j(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2 / 15), abs=1e-15)
    assert wigner_3j(0.5, 0.5, 1, 0.5, -0.5, 0) == pytest.approx(1 / math.sqrt(6), abs=1e-15)
    assert wigner_3j(1, 1, 1, 0, 0, 0) == 0.0
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner_3j(1, 1, 1, 1, 0, 0) == 0.0


def test_wigner_3j_orthogonality():
    j1, j2 = 2, 1.5
    for j3 in (0.5, 1.5, 2.5, 3.5):
        m3 = 0.5
        s = sum(wigner_3j(j1, j2, j3, m1, -m1 - m3, m3) ** 2
                for m1 in np.arange(-j1, j1 + 1) if abs(m1 + m3) <= j2)
        assert s == pytest.approx(1 / (2 * j3 + 1), abs=1e-14)


def test_wigner_6j_known_values():
    assert wigner_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, abs=1e-15)
    assert wigner_6j(0.5, 0.5, 1, 0.5, 0.5, 0) == pytest.approx(0.5, abs=1e-15)
    assert wigner_6j(2, 2, 2, 2, 2, 2) == pytest.approx(-3 / 70, abs=1e-15)
    assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0


def test_wigner_6j_orthogonality():
    j1, j2, j4, j5 = 1, 2, 1.5, 2.5
    for j6 in (1.5, 2.5):
        for j6p in (1.5, 2.5):
            s = sum((2 * j3 + 1) * (2 * j6 + 1) * wigner_6j(j1, j2, j3, j4, j5, j6) * wigner_6j(j1, j2, j3, j4, j5, j6p)
                    for j3 in range(1, 4))
            assert s == pytest.approx(1.0 if j6 == j6p else 0.0, abs=1e-14)


def test_clebsch_gordan():
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == pytest.approx(1 / math.sqrt(2))
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / math.sqrt(2))
    assert clebsch_gordan(1, 1, 1, 0, 2, 1) == pytest.approx(1 / math.sqrt(2))


def test_large_j_stable():
    # (j j 0; m -m 0) = (-1)^(j-m) / sqrt(2j+1)
    assert wigner_3j(100, 100, 0, 3, -3, 0) == pytest.approx(-1 / math.sqrt(201), rel=1e-12)


def test_hydrogen_radial_integrals():
    assert overlap_integral(hydrogen_parameters(1, 0), hydrogen_parameters(2, 1)) == pytest.approx(
        128 * math.sqrt(6) / 243, rel=1e-10)
    assert abs(overlap_integral(hydrogen_parameters(2, 0), hydrogen_parameters(2, 1))) == pytest.approx(
        3 * math.sqrt(3), rel=1e-10)
    # <n l | r | n l> expectation: (3 n^2 - l (l + 1)) / 2
    p = hydrogen_parameters(5, 2)
    assert overlap_integral(p, p) == pytest.approx((3 * 25 - 6) / 2, rel=1e-10)


@pytest.mark.parametrize("series,n", [(Series.S1, 61), (Series.P0, 30), (Series.S1, 6), (Series.P2, 5), (Series.D1, 4)])
def test_wavefunction_normalized(series, n):
    p = radial_parameters(series, n)
    assert overlap_integral(p, p, power=2) == pytest.approx(1.0, abs=1e-10)


def test_negative_degree_rejected():
    with pytest.raises(DomainError):
        radial_parameters(Series.S1, 4, delta=3.0)


def test_quantum_defects_and_sources():
    model = default_model()
    assert model.lookup(Series.S1, 61).source == "ritz"
    assert model.lookup(Series.S1, 6).source == "measured"
    assert model.lookup(Series.P2, 5).source == "measured"
    assert model.lookup(Series.P1, 5).delta != model.lookup(Series.P2, 5).delta
    assert 61 - effective_n(Series.S1, 61) == pytest.approx(3.371, abs=0.01)
    with pytest.raises(DataGapError):
        model.lookup(Series.S1, 2)
    with pytest.raises(InputError):
        model.lookup(Series.S1, 6.5)


def test_level_energy_asymptote():
    e = [level_energy(Series.S1, n) for n in (30, 60, 120, 400)]
    assert np.all(np.diff(e) > 0)
    assert SR88.ionization_ghz - e[-1] < 30.0


def test_wavelength_near_323nm():
    assert transition_wavelength(Series.S1, 61, Series.P2, 5) * 1e9 == pytest.approx(323.0, rel=0.01)


def test_angular_branching():
    total = sum(pair_strength(Series.S1, p) for p in (Series.P0, Series.P1, Series.P2))
    ratios = [pair_strength(Series.S1, p) / total for p in (Series.P0, Series.P1, Series.P2)]
    assert ratios == pytest.approx([1 / 9, 3 / 9, 5 / 9], abs=1e-14)
    assert pair_strength(Series.S1, Series.P0, "upper_weight") > 0
    assert reduced_dipole(Series.S1, 61, Series.S1, 60) == 0.0


@pytest.mark.parametrize("series,expected", [(Series.S1, {20: 2.28, 40: 24.58, 60: 90.99})])
def test_s1_lifetimes_band(series, expected):
    for n, tau_us in expected.items():
        assert lifetime(series, n) * 1e6 == pytest.approx(tau_us, rel=0.25)


def test_p0_longer_lived_than_s1():
    for n in range(20, 71, 5):
        assert lifetime(Series.P0, n) > lifetime(Series.S1, n)


def test_lifetime_power_law():
    ns = np.arange(30, 71, 5)
    for series in (Series.S1, Series.P0):
        a = power_law_exponent(ns, [lifetime(series, n) for n in ns])
        assert a == pytest.approx(3.0, abs=0.3)


def test_decay_report_metadata():
    rep = decay_rate(Series.S1, 40)
    assert rep.complete
    assert rep.rate == pytest.approx(sum(c.rate for c in rep.channels))
    assert sum(rep.coverage.values()) == len(rep.channels)
    assert {c.series for c in rep.channels} == {Series.P0, Series.P1, Series.P2}
    with pytest.raises(DataGapError):
        decay_rate(Series.D1, 40)


def test_scaling_anchors():
    assert c3_coefficient(61) == pytest.approx(C3_ANCHOR)
    assert rabi_factor(61) == pytest.approx(1.0)
    pt = scaling_laws(70)
    assert pt.c3 > C3_ANCHOR
    assert pt.rabi_factor < 1
    assert pt.k_eff_power_law == pytest.approx((70 / 61) ** 2)
    assert pt.gamma_r < scaling_laws(61).gamma_r
    assert pt.separation(2 * np.pi * 5.0) == pytest.approx((pt.c3 / (2 * np.pi * 5.0)) ** (1 / 3))
    ns = np.arange(50, 81, 10)
    n_star = [effective_n(Series.S1, n) for n in ns]
    assert power_law_exponent(n_star, [c3_coefficient(n) for n in ns]) == pytest.approx(4.0, abs=1e-12)


def test_radial_integral_symmetric():
    assert radial_integral(Series.S1, 40, Series.P0, 39) == pytest.approx(radial_integral(Series.P0, 39, Series.S1, 40))


def test_qd_table_parsing(tmp_path, monkeypatch):
    table = parse_qd_table("# comment\n3S1 6 3.5 measured\n3P 5 3.0\n")
    assert table[("3S1", 6)] == QdEntry(3.5, "measured")
    assert table[("3P", 5)].source == "table"
    for bad in ("3X 5 1.0", "3S1 five 1.0", "3S1 5"):
        with pytest.raises(InputError):
            parse_qd_table(bad)
    path = tmp_path / "qd_sr88.txt"
    path.write_text("3S1 6 3.5 custom\n")
    model = load_qd_model(path)
    assert model.lookup(Series.S1, 6).source == "custom"
    assert model.n_min(Series.S1) == 6
