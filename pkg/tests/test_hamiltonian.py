import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydswap.errors import ConfigurationError, DomainError, InputError
from rydswap.hamiltonian import (
    DIM,
    IDX_RPR,
    IDX_RRP,
    LEVEL_R,
    QUBIT_INDICES,
    SCHEME_CHANNELS,
    ControlSnapshot,
    DriveChannel,
    Scheme,
    SystemConfig,
    build_hamiltonian,
    embed_target,
    level_occupation,
    pair_index,
    project_to_qubit,
    swap_permutation,
)


def test_pair_index_bijection():
    seen = {pair_index(a, b) for a in range(4) for b in range(4)}
    assert seen == set(range(16))
    assert QUBIT_INDICES == (0, 1, 4, 5)
    assert (IDX_RRP, IDX_RPR) == (11, 14)


def test_exchange_only():
    h = build_hamiltonian(SystemConfig(v_dipole=0.7), ControlSnapshot({}))
    nz = np.argwhere(h != 0)
    assert {tuple(x) for x in nz} == {(IDX_RRP, IDX_RPR), (IDX_RPR, IDX_RRP)}
    assert h[IDX_RRP, IDX_RPR] == 0.7


def test_single_drive_structure():
    omega = 1.3
    h = build_hamiltonian(SystemConfig(v_dipole=0.0), ControlSnapshot({DriveChannel.CH1R: omega}))
    assert np.allclose(h, h.conj().T, atol=1e-14)
    nz = np.argwhere(np.abs(h) > 0)
    # 8 couplings (4 spectator levels x 2 atoms), each with its Hermitian partner
    assert len(np.argwhere(np.triu(np.abs(h)) > 0)) == 8
    assert len(nz) == 16
    assert np.allclose(np.abs(h[np.abs(h) > 0]), omega / 2)
    for i, j in nz:
        a = (i // 4, i % 4)
        b = (j // 4, j % 4)
        changed = [k for k in range(2) if a[k] != b[k]]
        assert len(changed) == 1
        assert {a[changed[0]], b[changed[0]]} == {1, 2}


def test_decay_diagonal_counts_occupation():
    gamma = 0.4
    h = build_hamiltonian(SystemConfig(v_dipole=0.0, gamma_r=gamma), ControlSnapshot({}))
    assert np.allclose(h - np.diag(np.diag(h)), 0)
    for a in range(4):
        for b in range(4):
            count = (a == LEVEL_R) + (b == LEVEL_R)
            assert h[pair_index(a, b), pair_index(a, b)] == pytest.approx(-0.5j * gamma * count)


def test_phase_convention():
    phi = 0.3
    h = build_hamiltonian(SystemConfig(v_dipole=0.0),
                          ControlSnapshot({DriveChannel.CH1R: 2.0}, {DriveChannel.CH1R: phi}))
    # |r><1| on the second atom carries exp(+i phi)
    assert h[pair_index(0, 2), pair_index(0, 1)] == pytest.approx(np.exp(1j * phi))


def test_detuning_signs():
    det = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, 0.0]])
    h = build_hamiltonian(SystemConfig(v_dipole=0.0), ControlSnapshot({}, detunings=det))
    assert h[pair_index(2, 0), pair_index(2, 0)] == pytest.approx(-0.2)
    assert h[pair_index(3, 1), pair_index(3, 1)] == pytest.approx(-0.3)


def test_channel_scheme_mismatch():
    with pytest.raises(ConfigurationError):
        build_hamiltonian(SystemConfig(v_dipole=1.0, scheme=Scheme.A), ControlSnapshot({DriveChannel.CH01: 1.0}))


def test_negative_rabi_rejected():
    with pytest.raises(InputError):
        ControlSnapshot({DriveChannel.CH1R: -1.0})


def test_negative_config_rejected():
    with pytest.raises(ConfigurationError):
        SystemConfig(v_dipole=-1.0)


def _snapshot(draw, scheme, shared_det=False):
    chans = SCHEME_CHANNELS[scheme]
    rabi = {c: draw(st.floats(0, 5)) for c in chans}
    phase = {c: draw(st.floats(-np.pi, np.pi)) for c in chans}
    d = [draw(st.floats(-1, 1)) for _ in range(6)]
    det = np.array(d).reshape(2, 3)
    if shared_det:
        det[1] = det[0]
    return ControlSnapshot(rabi, phase, det)


@settings(max_examples=40, deadline=None)
@given(st.data(), st.sampled_from([Scheme.A, Scheme.B]))
def test_hermitian_and_swap_symmetric(data, scheme):
    snap = _snapshot(data.draw, scheme, shared_det=True)
    cfg = SystemConfig(v_dipole=data.draw(st.floats(0, 5)), scheme=scheme)
    h = build_hamiltonian(cfg, snap)
    assert np.allclose(h, h.conj().T, atol=1e-14)
    p = swap_permutation()
    assert np.allclose(p @ h @ p.T, h, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-2.0, 2.0))
def test_linearity(omega, a):
    cfg = SystemConfig(v_dipole=0.5)

    def h_of(x):
        return build_hamiltonian(cfg, ControlSnapshot({DriveChannel.CH0RP: abs(x)}))

    h0 = h_of(0.0)
    assert np.allclose(h_of(abs(a) * omega) - h0, abs(a) * (h_of(omega) - h0), atol=1e-12)


def test_embed_target_values():
    t = embed_target(np.pi).matrix
    assert np.allclose(t, [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], atol=1e-15)
    h = embed_target(np.pi / 2).matrix
    r = np.sqrt(2) / 2
    assert np.allclose(h[1:3, 1:3], [[r, 1j * r], [1j * r, r]])
    small = embed_target(1e-9).matrix
    assert np.allclose(small, np.eye(4), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, np.pi), st.floats(1e-3, np.pi))
def test_embed_target_group(a, b):
    if a + b > np.pi:
        return
    u = embed_target(a).matrix @ embed_target(b).matrix
    assert np.allclose(u, embed_target(a + b).matrix, atol=1e-12)
    m = embed_target(a).matrix
    assert np.allclose(m @ m.conj().T, np.eye(4), atol=1e-12)
    assert np.allclose(m, m.T)


def test_embed_target_domain():
    with pytest.raises(DomainError):
        embed_target(0.0)
    with pytest.raises(DomainError):
        embed_target(4.0)


def test_project_to_qubit():
    assert np.allclose(project_to_qubit(np.eye(DIM)), np.eye(4))
    assert np.all(project_to_qubit(np.full((DIM, DIM), 7.0)) == 7.0)


@pytest.mark.parametrize("t", [0.3, 1.0, 7.5])
def test_exchange_evolution_leaves_qubits(t):
    import scipy.linalg

    h = build_hamiltonian(SystemConfig(v_dipole=1.7), ControlSnapshot({}))
    u = scipy.linalg.expm(-1j * h * t)
    assert np.allclose(project_to_qubit(u), np.eye(4), atol=1e-14)
    # analytic 2x2 block: cos(Vt) on the diagonal, -i sin(Vt) off it
    assert u[IDX_RRP, IDX_RRP] == pytest.approx(np.cos(1.7 * t))
    assert u[IDX_RRP, IDX_RPR] == pytest.approx(-1j * np.sin(1.7 * t))


def test_occupation_vector():
    occ = level_occupation(LEVEL_R)
    assert occ[pair_index(2, 2)] == 2 and occ[pair_index(2, 0)] == 1 and occ[0] == 0
