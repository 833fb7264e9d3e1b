import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duality_lab import hilbert as hb
from duality_lab.errors import BasisMismatch, DimensionTooLarge

TWO_PI = 2 * np.pi


def test_enumerate_small_bases():
    b = hb.enumerate_basis(1, 1)
    assert b.dimension == 3
    assert b.configs[:, 0].tolist() == [-1, 0, 1]
    assert hb.enumerate_basis(2, 2).dimension == 25
    assert hb.enumerate_basis(4, 2).dimension == 625


@given(st.integers(1, 4), st.integers(0, 3))
@settings(max_examples=30, deadline=None)
def test_index_round_trip(n, K):
    b = hb.enumerate_basis(n, K)
    assert b.dimension == (2 * K + 1) ** n
    assert np.array_equal(b.index_of(b.configs), np.arange(b.dimension))


def test_dimension_guard():
    with pytest.raises(DimensionTooLarge):
        hb.enumerate_basis(6, 10)


def test_shift_examples():
    b = hb.enumerate_basis(1, 1)
    assert np.array_equal(hb.shift_op(b, 0, 0).entries, np.eye(3))
    S = hb.shift_op(b, 0, 1).entries.real
    assert np.array_equal(S, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])


def test_shift_inverse_on_interior():
    b = hb.enumerate_basis(2, 3)
    P = hb.shift_op(b, 1, 1) @ hb.shift_op(b, 1, -1)
    m = b.interior_mask()
    assert np.allclose(P.entries[np.ix_(m, m)], np.eye(m.sum()))
    assert hb.shift_op(b, 0, 2).is_unitary_on(b.interior_mask(2))


def test_shifts_commute():
    b = hb.enumerate_basis(2, 3)
    C = hb.commutator(hb.shift_op(b, 0, 1), hb.shift_op(b, 0, 2))
    assert np.abs(C.interior()).max() == 0
    C = hb.commutator(hb.shift_op(b, 0, 1), hb.shift_op(b, 1, -2))
    assert np.abs(C.entries).max() == 0


def test_eta_elements():
    b = hb.enumerate_basis(1, 3)
    eta = hb.eta_op(b, 0)
    assert eta.element([0], [0]) == 0
    assert np.isclose(eta.element([0], [1]), 1j / TWO_PI)
    assert np.isclose(eta.element([0], [2]), -1j / (4 * np.pi))
    assert eta.is_hermitian(1e-14)


def test_eta_spectrum_within_half():
    w = np.linalg.eigvalsh(hb.eta_op(hb.enumerate_basis(1, 40), 0).entries)
    assert np.all(np.abs(w) <= 0.5)
    assert w.max() > 0.45


def test_eta_series_examples():
    b = hb.enumerate_basis(1, 4)
    s1 = hb.eta_from_series(b, 0, 1)
    assert np.isclose(s1.element([0], [1]), 1j / TWO_PI)
    for N in (1, 3, 20):
        assert np.all(np.diag(hb.eta_from_series(b, 0, N).entries) == 0)
    full = hb.eta_from_series(b, 0, 2 * b.K)
    assert np.allclose(full.entries, hb.eta_op(b, 0).entries)


def test_eta_series_matches_shift_sum():
    b = hb.enumerate_basis(1, 3)
    direct = sum(
        (1j / (TWO_PI * n)) * (-1) ** n * hb.shift_op(b, 0, n).entries
        for N in range(1, 4) for n in (N, -N)
    )
    assert np.allclose(hb.eta_from_series(b, 0, 3).entries, direct)


def test_eta_series_error_rate():
    from duality_lab.checks import series_error

    e1, e2 = series_error(1100, 1000), series_error(1100, 2000)
    assert e1 / e2 == pytest.approx(2.0, rel=0.01)


def test_embed_local_two_site_operator():
    b = hb.enumerate_basis(3, 1)
    w = b.width
    rng = np.random.default_rng(0)
    local = rng.normal(size=(w * w, w * w))
    M = hb.embed_local(b, [2, 0], local)
    C = b.configs
    for i in range(b.dimension):
        for j in range(b.dimension):
            exp = local[(C[i, 2] + 1) * w + C[i, 0] + 1, (C[j, 2] + 1) * w + C[j, 0] + 1]
            assert M[i, j] == (exp if C[i, 1] == C[j, 1] else 0)


def test_commutator_basics():
    b = hb.enumerate_basis(1, 2)
    A = hb.eta_op(b, 0)
    assert np.abs(hb.commutator(A, A).entries).max() == 0
    with pytest.raises(BasisMismatch):
        hb.commutator(A, hb.eta_op(hb.enumerate_basis(1, 3), 0))


def test_eta_number_commutator_interior():
    b = hb.enumerate_basis(1, 16)
    C = hb.commutator(hb.eta_op(b, 0), hb.number_op(b, 0)).entries
    v = b.configs[:, 0]
    d = v[None, :] - v[:, None]
    want = (1j / TWO_PI) * ((d == 0) - (-1.0) ** (d % 2))
    m = b.interior_mask()
    assert np.abs((C - want)[np.ix_(m, m)]).max() < 1e-12


@pytest.mark.parametrize("K", [4, 8, 16])
def test_commutator_defect_is_edge_projector(K):
    b = hb.enumerate_basis(1, K)
    C = hb.commutator(hb.eta_op(b, 0), hb.number_op(b, 0)).entries
    D = C - (1j / TWO_PI) * np.eye(b.dimension)
    edge = hb.edge_state(b, 0)
    assert hb.edge_alignment(D, edge) == pytest.approx(1.0, abs=1e-12)


def test_number_op():
    b = hb.enumerate_basis(1, 1)
    assert np.array_equal(hb.number_op(b, 0).entries.real, np.diag([-1, 0, 1]))
    b2 = hb.enumerate_basis(2, 1)
    N1 = hb.number_op(b2, 1).entries
    assert np.array_equal(np.diag(N1).real, b2.configs[:, 1])
    assert np.abs(hb.commutator(hb.number_op(b2, 0), hb.number_op(b2, 1)).entries).max() == 0


def test_edge_state_components():
    b = hb.enumerate_basis(2, 1)
    e = hb.edge_state(b, (0, 1))
    parity = b.configs.sum(axis=1) % 2
    assert np.array_equal(e.components, np.where(parity == 0, 1.0, -1.0))
    assert np.linalg.norm(e.components) == pytest.approx(3.0)
    assert np.linalg.norm(e.vector) == pytest.approx(1.0)
    single = hb.edge_state(hb.enumerate_basis(1, 2), 0)
    assert single.components.tolist() == [1, -1, 1, -1, 1]


@pytest.mark.parametrize("n, K", [(1, 1), (2, 1), (2, 3), (3, 2)])
def test_edge_overlap_with_uniform_vector(n, K):
    # each site sums (-1)^A over 2K+1 values, leaving (-1)^K
    b = hb.enumerate_basis(n, K)
    e = hb.edge_state(b, tuple(range(n)))
    u = np.ones(b.dimension) / np.sqrt(b.dimension)
    assert e.vector @ u == pytest.approx((-1) ** (n * K) / b.dimension)


def test_operator_dump_round_trip():
    b = hb.enumerate_basis(2, 1)
    op = hb.eta_op(b, 1)
    text = hb.dump_operator(op)
    assert text.startswith("# basis sites=0,1 K=1")
    back = hb.load_operator(text)
    assert np.array_equal(back.entries, op.entries)


def test_operator_shape_and_flags():
    b = hb.enumerate_basis(1, 1)
    with pytest.raises(ValueError):
        hb.OperatorMatrix(b, np.eye(2))
    op = hb.shift_op(b, 0, 1)
    assert not op.is_hermitian()
    assert (op + op.H).is_hermitian()
