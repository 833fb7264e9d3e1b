import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duality_lab import ca_engine as ca
from duality_lab.errors import (
    InconsistentMovers,
    IntegerOverflowError,
    RuleNotBijective,
    WrapError,
)

ints = st.integers(-50, 50)


@st.composite
def states(draw, min_L=3, max_L=12):
    L = draw(st.integers(min_L, max_L))
    Q = draw(st.lists(ints, min_size=L, max_size=L))
    P = draw(st.lists(ints, min_size=L, max_size=L))
    return ca.AutomatonState(Q, P)


def test_step_forward_hand_example():
    s = ca.step_forward(ca.AutomatonState([0, 0, 0], [1, 0, 0]))
    assert s.Q.tolist() == [1, 0, 0]
    assert s.P_plus.tolist() == [-1, 1, 1]
    assert s.t == 1


def test_zero_and_constant_states_are_fixed():
    z = ca.AutomatonState.zeros(3)
    assert ca.step_forward(z) == ca.AutomatonState([0, 0, 0], [0, 0, 0], 1)
    c = ca.AutomatonState([7] * 5, [0] * 5)
    s = ca.step_forward(c)
    assert s.Q.tolist() == [7] * 5 and s.P_plus.tolist() == [0] * 5


def test_step_backward_inverts_example():
    s0 = ca.AutomatonState([0, 0, 0], [1, 0, 0])
    assert ca.step_backward(ca.step_forward(s0)) == s0
    assert ca.step_backward(ca.AutomatonState.zeros(4, t=1)) == ca.AutomatonState.zeros(4)


def test_round_trip_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        s = ca.AutomatonState.random(int(rng.integers(3, 20)), rng)
        assert ca.step_backward(ca.step_forward(s)) == s
        assert ca.step_forward(ca.step_backward(s)) == s


@given(states(), st.integers(-20, 20), st.integers(-20, 20))
@settings(max_examples=60, deadline=None)
def test_group_law(s, a, b):
    assert ca.evolve(ca.evolve(s, a), b) == ca.evolve(s, a + b)


def test_evolve_definition():
    s = ca.AutomatonState.random(6, 4)
    assert ca.evolve(s, 0) == s
    assert ca.evolve(s, 3) == ca.step_forward(ca.step_forward(ca.step_forward(s)))
    assert ca.evolve(ca.evolve(s, 5), -5) == s


@given(states(max_L=10), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_mover_transport(s, n):
    left, right = ca.movers(s)
    l2, r2 = ca.movers(ca.evolve(s, n))
    assert l2 == left.transported(n)
    assert r2 == right.transported(n)
    assert np.array_equal(l2.A, np.roll(left.A, -n))


@given(states(), st.integers(0, 15))
@settings(max_examples=40, deadline=None)
def test_mover_sums_conserved(s, n):
    left, right = ca.movers(s)
    l2, r2 = ca.movers(ca.evolve(s, n))
    assert int(l2.A.sum()) == int(left.A.sum())
    assert int(r2.A.sum()) == int(right.A.sum())


def test_movers_examples():
    s = ca.AutomatonState([0, 0, 0], [1, 0, 0])
    left, right = ca.movers(s)
    assert left.A.tolist() == [1, 0, 0] and right.A.tolist() == [1, 0, 0]
    left, right = ca.movers(ca.step_forward(s))
    assert left.A.tolist() == [0, 0, 1] and right.A.tolist() == [0, 1, 0]
    left, right = ca.movers(ca.AutomatonState([4] * 6, [0] * 6))
    assert not left.A.any() and not right.A.any()


def test_closed_form_examples():
    s0 = ca.AutomatonState([0, 0, 0], [1, 0, 0])
    assert ca.closed_form(s0, 0, 1) == (1, -1)
    z = ca.AutomatonState.zeros(11)
    assert ca.closed_form(z, 4, 3) == (0, 0)


def test_closed_form_matches_evolve_on_large_ring():
    s0 = ca.AutomatonState.random(40, np.random.default_rng(5))
    s = ca.evolve(s0, 12)
    for x in range(40):
        assert ca.closed_form(s0, x, 12) == (int(s.Q[x]), int(s.P_plus[x]))


@given(st.integers(1, 6), st.data())
@settings(max_examples=30, deadline=None)
def test_closed_form_at_minimal_ring(t, data):
    L = 2 * t + 1
    Q = data.draw(st.lists(ints, min_size=L, max_size=L))
    P = data.draw(st.lists(ints, min_size=L, max_size=L))
    s0 = ca.AutomatonState(Q, P)
    s = ca.evolve(s0, t)
    assert all(ca.closed_form(s0, x, t) == (int(s.Q[x]), int(s.P_plus[x])) for x in range(L))


def test_closed_form_wrap_error():
    with pytest.raises(WrapError):
        ca.closed_form(ca.AutomatonState.zeros(6), 0, 3)


def test_reconstruct_round_trip():
    rng = np.random.default_rng(8)
    for _ in range(100):
        s = ca.AutomatonState.random(int(rng.integers(3, 16)), rng)
        left, right = ca.movers(s)
        r = ca.reconstruct_state(left, right, int(s.Q[0]), int(s.Q[1]))
        assert r == s


def test_reconstruct_constant_modes():
    z = ca.MoverField("L", [0] * 4)
    zr = ca.MoverField("R", [0] * 4)
    assert ca.reconstruct_state(z, zr, 0, 0) == ca.AutomatonState.zeros(4)
    r = ca.reconstruct_state(z, zr, 3, 3)
    assert r.Q.tolist() == [3] * 4 and not r.P_plus.any()


def test_reconstruct_inconsistent():
    with pytest.raises(InconsistentMovers):
        ca.reconstruct_state(ca.MoverField("L", [1, 0, 0]), ca.MoverField("R", [0, 0, 0]), 0)


@given(states())
@settings(max_examples=40, deadline=None)
def test_reconstruct_movers_without_true_anchors(s):
    left, right = ca.movers(s)
    r = ca.reconstruct_state(left, right, 0, 0 if s.L % 2 == 0 else None)
    l2, r2 = ca.movers(r)
    assert l2 == left and r2 == right


def example_rule():
    return ca.InteractionRule.paired(q_left=3, q=0, q_right=17, p_plus=5)


def test_interaction_match_phase_example():
    s = ca.AutomatonState([3, 0, 17, 0, 0], [0, 5, 0, 0, 0])
    after = example_rule().apply(s)
    assert after.P_plus[1] == 6
    assert example_rule().apply(after) == s


def test_interaction_without_match_is_free_step():
    s = ca.AutomatonState([0] * 6, [0] * 6)
    assert ca.interaction_step(s, example_rule()) == ca.step_forward(s)


@given(states(min_L=4, max_L=9), st.integers(1, 12))
@settings(max_examples=40, deadline=None)
def test_interaction_round_trip(s, n):
    rule = ca.InteractionRule.paired(q=0, p_plus=0)
    f = ca.evolve_interacting(s, rule, n)
    assert ca.evolve_interacting(f, rule, -n) == s


@pytest.mark.parametrize(
    "inc, dec",
    [
        (ca.Predicate(q=0, p_plus=5), ca.Predicate(q=0, p_plus=5)),
        (ca.Predicate(q=0, p_plus=5), ca.Predicate(q=1, p_plus=6)),
        (ca.Predicate(q=0), ca.Predicate(q=0, p_plus=1)),
    ],
)
def test_rule_not_bijective(inc, dec):
    with pytest.raises(RuleNotBijective):
        ca.InteractionRule(inc, dec)


def test_transfer_matrix_examples():
    M = ca.transfer_matrix(0.0)
    assert np.allclose(M, [[1, 1], [0, 1]])
    assert np.allclose(ca.transfer_eigenvalues(M), [1, 1])
    M = ca.transfer_matrix(0.25)
    assert abs(np.trace(M)) < 1e-15
    assert np.allclose(sorted(ca.transfer_eigenvalues(M), key=np.imag), [-1j, 1j])
    M = ca.transfer_matrix(0.5)
    assert np.isclose(np.trace(M), -2)
    assert np.allclose(ca.transfer_eigenvalues(M), [-1, -1], atol=1e-12)


@given(st.floats(-0.5, 0.5, exclude_min=True))
def test_transfer_unimodular(k):
    M = ca.transfer_matrix(k)
    assert abs(np.linalg.det(M) - 1) < 1e-12
    assert abs(np.trace(M) - 2 * np.cos(2 * np.pi * k)) < 1e-12
    mu = ca.transfer_eigenvalues(M)
    assert np.allclose(np.abs(mu), 1, atol=1e-12)


def test_overflow_is_reported():
    big = ca.AutomatonState([2**60, 0, 0], [0, 0, 0])
    with pytest.raises(IntegerOverflowError):
        ca.step_forward(big)


def test_object_dtype_is_unbounded():
    Q = np.array([2**70, 0, 0], dtype=object)
    s = ca.AutomatonState(Q, np.array([0, 0, 0], dtype=object))
    back = ca.step_backward(ca.step_forward(s))
    assert back == s
    assert ca.step_forward(s).P_plus[0] == -2 * 2**70


def test_state_text_round_trip():
    s = ca.AutomatonState.random(7, 2, t=5)
    text = ca.dump_state(s)
    assert text.splitlines()[0].startswith("#")
    assert ca.load_state(text) == s
