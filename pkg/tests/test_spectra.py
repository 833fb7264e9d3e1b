import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duality_lab import hilbert as hb
from duality_lab import qft_kernels as qk
from duality_lab import spectra as sp
from duality_lab._units import wrap_half
from duality_lab.ca_engine import Chirality
from duality_lab.errors import BasisMismatch, NotPermutation, TableTooShort


def test_sawtooth_identity_is_zero():
    assert np.abs(sp.sawtooth_hamiltonian(np.eye(4), 50)).max() == 0


def test_sawtooth_cycle_eigenvalues():
    H = sp.sawtooth_hamiltonian(sp.cyclic_shift_matrix(5), 10_000)
    w = np.linalg.eigvalsh(H)
    assert np.abs(w - np.sort(wrap_half(np.arange(5) / 5))).max() < 1e-4
    assert np.abs(H - H.conj().T).max() == 0


def test_sawtooth_swap_sits_on_the_edge():
    # eigenphase 1/2 lands on the jump of the sawtooth, where the series gives 0
    w = np.linalg.eigvalsh(sp.sawtooth_hamiltonian(np.array([[0, 1], [1, 0]]), 1000))
    assert np.allclose(w, 0)


@given(st.permutations(range(6)))
@settings(max_examples=30, deadline=None)
def test_sawtooth_spectrum_of_any_permutation(p):
    U = np.eye(6)[:, list(p)]
    w = np.sort(np.linalg.eigvalsh(sp.sawtooth_hamiltonian(U, 4000)))
    alpha = np.angle(np.linalg.eigvals(U)) / (2 * np.pi)
    # the series sits at the midpoint 0 on the jump at 1/2
    want = np.where(np.isclose(np.abs(alpha), 0.5), 0.0, -wrap_half(alpha))
    assert np.abs(w - np.sort(want)).max() < 1e-3
    assert np.abs(w).max() <= 0.5


def test_not_permutation():
    for bad in (np.ones((2, 2)), np.eye(3)[:2], 0.5 * np.eye(2), np.array([[1, 1], [0, 0]])):
        with pytest.raises(NotPermutation):
            sp.sawtooth_hamiltonian(bad, 10)
    with pytest.raises(ValueError):
        sp.sawtooth_hamiltonian(np.eye(2), 0)


def test_bound_and_nonextensivity():
    U3 = sp.cyclic_shift_matrix(3)
    H = sp.sawtooth_hamiltonian(U3, 1000)
    rep = sp.hamiltonian_bound_check(H, U1=U3, U2=U3, N_terms=1000)
    assert rep.within_bound and rep.hermiticity_defect == 0
    # phases 1/3 + 1/3 wrap to -1/3, a jump of one
    assert rep.nonextensive_defect == pytest.approx(1.0, abs=1e-2)
    assert np.isnan(sp.hamiltonian_bound_check(H).nonextensive_defect)


def test_build_hamiltonian_local_table():
    b = hb.enumerate_basis(4, 1)
    H = sp.build_hamiltonian(b, qk.KernelTable.custom([1.0, 0.0, 0.0]))
    a = sp.mover_matrices(b)
    assert np.allclose(H.entries, sum(m.entries @ m.entries for m in a))


def test_build_hamiltonian_full_table():
    b = hb.enumerate_basis(4, 2)
    table = qk.KernelTable.build(qk.KernelConfig(lam=1e-2, s_max=2))
    H = sp.build_hamiltonian(b, table)
    T = sp.site_shift_operator(b)
    assert H.hermiticity_defect() < 1e-12
    assert np.abs(H.entries @ T - T @ H.entries).max() < 1e-10


def test_ring_weights():
    W = sp.ring_weights(4, qk.KernelTable.custom([3.0, 2.0, 1.0]))
    # s = 2 and s = -2 are the same neighbour on a 4-ring
    assert W[0].tolist() == [3.0, 2.0, 2.0, 2.0]
    assert np.allclose(W, W.T)
    with pytest.raises(TableTooShort):
        sp.ring_weights(6, qk.KernelTable.custom([1.0, 0.5]))


def test_basis_mismatch():
    b = hb.enumerate_basis(4, 1)
    other = sp.mover_matrices(hb.enumerate_basis(4, 2))
    with pytest.raises(BasisMismatch):
        sp.build_hamiltonian(b, qk.KernelTable.custom([1, 0, 0]), movers=other)


def test_divergent_operator_rank_deficient():
    b = hb.enumerate_basis(4, 1)
    D = sp.divergent_operator(b, qk.KernelConfig(lam=1e-3))
    assert D.hermiticity_defect() < 1e-12
    assert sp.operator_rank(D) < b.dimension
    with pytest.raises(ValueError):
        sp.divergent_operator(hb.enumerate_basis(3, 1), qk.KernelConfig())


def test_site_shift_is_cyclic():
    b = hb.enumerate_basis(3, 1)
    T = sp.site_shift_operator(b)
    assert np.allclose(np.linalg.matrix_power(T, 3), np.eye(b.dimension))
    assert np.allclose(T @ T.T, np.eye(b.dimension))


def test_probe_zero_hamiltonian_matches_baseline():
    b = hb.enumerate_basis(4, 1)
    H = hb.OperatorMatrix(b, np.zeros((b.dimension,) * 2))
    rep = sp.evolution_consistency_probe(b, H)
    assert rep.fidelity == pytest.approx(rep.baseline)
    assert rep.block_defect == 0
    assert rep.n_probe > 0


def test_probe_perfect_transport():
    # a hamiltonian whose exponential is the probe's shift scores fidelity one
    b = hb.enumerate_basis(4, 1)
    S = sp.site_shift_operator(b, Chirality.LEFT.direction)
    powers = [np.linalg.matrix_power(S, n) for n in range(4)]
    H = np.zeros_like(S, dtype=complex)
    for k in range(4):
        # projector onto the eigenvalue exp(2 pi i k / 4) of S
        P = sum(np.exp(-2j * np.pi * k * n / 4) * powers[n] for n in range(4)) / 4
        H -= float(wrap_half(k / 4)) * P
    rep = sp.evolution_consistency_probe(b, hb.OperatorMatrix(b, H))
    assert rep.fidelity == pytest.approx(1.0, abs=1e-12)


def test_spectral_report():
    b = hb.enumerate_basis(3, 1)
    H = sp.build_hamiltonian(b, qk.KernelTable.custom([1.0, 0.2]))
    rep = sp.SpectralReport.from_operator(H, sp.site_shift_operator(b), label="demo")
    lines = rep.to_csv().splitlines()
    assert lines[0] == "index,eigenvalue" and len(lines) == b.dimension + 1
    assert sum(m for _, m in rep.multiplicities) == b.dimension
    assert "# spectrum demo" in rep.summary()
    assert np.all(np.diff(rep.eigenvalues) >= 0)
