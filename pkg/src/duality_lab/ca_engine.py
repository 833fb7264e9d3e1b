"""Integer cellular automaton on a periodic ring.

State is ``Q`` on sites at integer time ``t`` and ``P+`` on the forward
time-links ``(x, t) -> (x, t+1)``.  One step is::

    Q'(x)  = Q(x) + P+(x)
    P+'(x) = P+(x) + Q'(x-1) - 2 Q'(x) + Q'(x+1)

Arrays are ``int64`` with overflow checks, or ``object`` arrays of Python
ints for arbitrary precision.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._units import TWO_PI
from .errors import (
    InconsistentMovers,
    IntegerOverflowError,
    RuleNotBijective,
    WrapError,
)

# With |Q|, |P+| below this bound every intermediate of a forward or
# backward step stays below 2**63.
_SAFE_BOUND = 2**59


class Chirality(str, enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def direction(self) -> int:
        """Array shift per time step: +1 means ``A(x, t+1) = A(x+1, t)``."""
        return 1 if self is Chirality.LEFT else -1


@dataclass(frozen=True)
class RingLattice:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 3:
            raise ValueError(f"ring needs at least 3 sites, got {self.size}")

    def wrap(self, x):
        return np.mod(x, self.size)


def _as_field(values, L=None):
    arr = np.asarray(values)
    if arr.dtype == object:
        arr = np.array([int(v) for v in arr.ravel()], dtype=object)
    elif not np.issubdtype(arr.dtype, np.integer):
        if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
            raise TypeError("automaton fields must be integers")
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(np.int64)
    if arr.ndim != 1:
        raise ValueError("automaton fields are one-dimensional")
    if L is not None and arr.shape[0] != L:
        raise ValueError(f"expected {L} entries, got {arr.shape[0]}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _check_range(*arrays):
    for arr in arrays:
        if arr.dtype == object or arr.size == 0:
            continue
        if np.abs(arr).max() >= _SAFE_BOUND:
            raise IntegerOverflowError(
                "field magnitude reached 2**59; use dtype=object for "
                "arbitrary-precision evolution"
            )


@dataclass(frozen=True, eq=False)
class AutomatonState:
    """Fields ``Q(x, t)`` and ``P+(x, t) = P(x, t + 1/2)`` at clock ``t``."""

    Q: np.ndarray
    P_plus: np.ndarray
    t: int = 0

    def __post_init__(self):
        Q = _as_field(self.Q)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P_plus", _as_field(self.P_plus, Q.shape[0]))
        object.__setattr__(self, "t", int(self.t))
        RingLattice(Q.shape[0])

    @property
    def L(self) -> int:
        return self.Q.shape[0]

    @property
    def lattice(self) -> RingLattice:
        return RingLattice(self.L)

    @classmethod
    def zeros(cls, L: int, t: int = 0) -> "AutomatonState":
        z = np.zeros(L, dtype=np.int64)
        return cls(z, z, t)

    @classmethod
    def random(cls, L, rng=None, low=-5, high=5, t=0) -> "AutomatonState":
        rng = np.random.default_rng(rng)
        return cls(
            rng.integers(low, high + 1, size=L),
            rng.integers(low, high + 1, size=L),
            t,
        )

    def __eq__(self, other):
        if not isinstance(other, AutomatonState):
            return NotImplemented
        return (
            self.t == other.t
            and self.L == other.L
            and bool(np.all(self.Q == other.Q))
            and bool(np.all(self.P_plus == other.P_plus))
        )

    def __hash__(self):
        return hash((self.t, tuple(self.Q.tolist()), tuple(self.P_plus.tolist())))

    def __repr__(self):
        return (
            f"AutomatonState(Q={self.Q.tolist()}, "
            f"P_plus={self.P_plus.tolist()}, t={self.t})"
        )


def _laplacian(Q):
    return np.roll(Q, 1, axis=-1) - 2 * Q + np.roll(Q, -1, axis=-1)


def step_arrays(Q, P, n: int = 1):
    """``n`` steps on raw arrays; the last axis is the ring, leading axes batch."""
    Q, P = np.asarray(Q), np.asarray(P)
    for _ in range(abs(int(n))):
        _check_range(Q, P)
        if n > 0:
            Q = Q + P
            P = P + _laplacian(Q)
        else:
            P = P - _laplacian(Q)
            Q = Q - P
    return Q, P


def mover_arrays(Q, P):
    """``(A^L, A^R)`` on raw arrays (last axis is the ring)."""
    return P + Q - np.roll(Q, 1, axis=-1), P + Q - np.roll(Q, -1, axis=-1)


def step_forward(state: AutomatonState) -> AutomatonState:
    _check_range(state.Q, state.P_plus)
    Q = state.Q + state.P_plus
    P = state.P_plus + _laplacian(Q)
    return AutomatonState(Q, P, state.t + 1)


def step_backward(state: AutomatonState) -> AutomatonState:
    _check_range(state.Q, state.P_plus)
    P = state.P_plus - _laplacian(state.Q)
    Q = state.Q - P
    return AutomatonState(Q, P, state.t - 1)


def evolve(state: AutomatonState, n: int) -> AutomatonState:
    """Apply ``|n|`` forward (``n > 0``) or backward (``n < 0``) steps."""
    step = step_forward if n >= 0 else step_backward
    for _ in range(abs(int(n))):
        state = step(state)
    return state


def closed_form(state0: AutomatonState, x: int, t: int):
    """``(Q(x, t0+t), P+(x, t0+t))`` from the explicit solution.

    Only initial data within distance ``t`` of ``x`` enters, so the ring
    must hold ``2t + 1`` distinct sites.
    """
    t = int(t)
    if t < 1:
        raise ValueError("closed form needs t >= 1")
    L = state0.L
    if L < 2 * t + 1:
        raise WrapError(f"light cone of width {2 * t + 1} does not fit on L={L}")
    # window y = -t .. t around x, as Python ints
    idx = [(x + y) % L for y in range(-t, t + 1)]
    Qall, Pall = state0.Q.tolist(), state0.P_plus.tolist()
    q = [int(Qall[i]) for i in idx]
    p = [int(Pall[i]) for i in idx]
    # q[m] and p[m] hold the values at offset m - t
    q_t = sum(p[2 * n - 1] for n in range(1, t + 1))
    q_t += sum(q[1:2 * t:2]) - sum(q[2:2 * t:2])
    p_t = sum(p[0::2]) - sum(p[1::2]) + 2 * (sum(q[0::2]) - sum(q[1::2]))
    p_t -= q[2 * t] + q[0]
    return q_t, p_t


@dataclass(frozen=True, eq=False)
class MoverField:
    chirality: Chirality
    A: np.ndarray
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "chirality", Chirality(self.chirality))
        object.__setattr__(self, "A", _as_field(self.A))
        object.__setattr__(self, "t", int(self.t))

    @property
    def L(self) -> int:
        return self.A.shape[0]

    def transported(self, n: int) -> "MoverField":
        """The field ``n`` steps later under free transport."""
        shift = -self.chirality.direction * n
        return MoverField(self.chirality, np.roll(self.A, shift), self.t + n)

    def __eq__(self, other):
        if not isinstance(other, MoverField):
            return NotImplemented
        return (
            self.chirality == other.chirality
            and self.t == other.t
            and bool(np.all(self.A == other.A))
        )

    __hash__ = None


def movers(state: AutomatonState):
    """Left and right mover integers at the state's clock time."""
    left, right = mover_arrays(state.Q, state.P_plus)
    return (
        MoverField(Chirality.LEFT, left, state.t),
        MoverField(Chirality.RIGHT, right, state.t),
    )


def reconstruct_state(
    left: MoverField,
    right: MoverField,
    anchor_Q0: int,
    anchor_Q1: Optional[int] = None,
) -> AutomatonState:
    """Invert :func:`movers` given ``Q(0)`` and, on even rings, ``Q(1)``.

    ``A^L - A^R = Q(x+1) - Q(x-1)`` fixes ``Q`` on each sublattice reached
    by steps of two; ``P+`` then follows from ``A^L``.
    """
    if left.chirality is not Chirality.LEFT or right.chirality is not Chirality.RIGHT:
        raise ValueError("expected (left, right) mover fields")
    if left.L != right.L or left.t != right.t:
        raise InconsistentMovers("mover fields differ in size or clock")
    L = left.L
    D = [int(a) - int(b) for a, b in zip(left.A, right.A)]
    if L % 2 == 0:
        if sum(D[0::2]) != 0 or sum(D[1::2]) != 0:
            raise InconsistentMovers("sublattice sums of A^L - A^R do not vanish")
        if anchor_Q1 is None:
            raise ValueError("even rings need both anchors")
    elif sum(D) != 0:
        raise InconsistentMovers("ring sum of A^L - A^R does not vanish")

    Q: list = [None] * L
    Q[0] = int(anchor_Q0)
    starts = [0] if L % 2 else [0, 1]
    if L % 2 == 0:
        Q[1] = int(anchor_Q1)
    for s in starts:
        x = s
        for _ in range(L // len(starts) - 1):
            # Q(x+2) = Q(x) + D(x+1)
            Q[(x + 2) % L] = Q[x] + D[(x + 1) % L]
            x = (x + 2) % L
    if L % 2 and anchor_Q1 is not None and Q[1] != int(anchor_Q1):
        raise InconsistentMovers(
            f"anchor Q(1)={anchor_Q1} contradicts the value {Q[1]} forced on an odd ring"
        )
    dtype = left.A.dtype
    Qa = np.array(Q, dtype=dtype)
    P = left.A - Qa + np.roll(Qa, 1)
    return AutomatonState(Qa, P, left.t)


@dataclass(frozen=True)
class Predicate:
    """Conjunction of equalities on ``(Q(x-1), Q(x), Q(x+1), P+(x))``.

    ``None`` leaves a variable unconstrained.
    """

    q_left: Optional[int] = None
    q: Optional[int] = None
    q_right: Optional[int] = None
    p_plus: Optional[int] = None

    @property
    def q_constraints(self):
        return {k: v for k, v in
                (("q_left", self.q_left), ("q", self.q), ("q_right", self.q_right))
                if v is not None}

    def matches(self, Q, P):
        """Boolean mask over sites."""
        Q = np.asarray(Q)
        mask = np.ones(Q.shape[0], dtype=bool)
        for value, arr in (
            (self.q_left, np.roll(Q, 1)),
            (self.q, Q),
            (self.q_right, np.roll(Q, -1)),
            (self.p_plus, np.asarray(P)),
        ):
            if value is not None:
                mask &= arr == value
        return mask


@dataclass(frozen=True)
class InteractionRule:
    """Conditional ``P+(x) += 1`` / ``P+(x) -= 1`` after each free step.

    The pair is validated on construction: the local update must be a
    union of transpositions ``p <-> p + 1`` so the step stays a bijection.
    """

    increment: Predicate
    decrement: Predicate
    n_random_checks: int = field(default=2000, compare=False)

    def __post_init__(self):
        inc, dec = self.increment, self.decrement
        if inc.p_plus is None or dec.p_plus is None:
            raise RuleNotBijective(
                "both predicates must pin P+(x); a free P+ lets a site match "
                "before and after its own action"
            )
        if inc.q_constraints != dec.q_constraints:
            raise RuleNotBijective(
                "increment and decrement must constrain the same Q values, "
                f"got {inc.q_constraints} vs {dec.q_constraints}"
            )
        if dec.p_plus != inc.p_plus + 1:
            raise RuleNotBijective(
                f"decrement must match P+ = {inc.p_plus + 1} (post-increment), "
                f"got {dec.p_plus}"
            )
        self._random_check()

    def _random_check(self):
        rng = np.random.default_rng(0)
        inc, dec = self.increment, self.decrement
        centre = [inc.q_left, inc.q, inc.q_right, inc.p_plus]
        centre = np.array([0 if c is None else c for c in centre])
        samples = centre + rng.integers(-2, 3, size=(self.n_random_checks, 4))
        for qL, q, qR, p in samples:
            Q = np.array([qL, q, qR])
            Pm = np.array([0, p, 0])
            a = bool(inc.matches(Q, Pm)[1])
            b = bool(dec.matches(Q, Pm)[1])
            if a and b:
                raise RuleNotBijective(f"double match at {(qL, q, qR, p)}")
            new_p = p + 1 if a else p - 1 if b else p
            Pn = np.array([0, new_p, 0])
            a2 = bool(inc.matches(Q, Pn)[1])
            b2 = bool(dec.matches(Q, Pn)[1])
            back = new_p + 1 if a2 else new_p - 1 if b2 else new_p
            if back != p:
                raise RuleNotBijective(f"update is not an involution at {(qL, q, qR, p)}")

    @classmethod
    def paired(cls, q_left=None, q=None, q_right=None, p_plus=0, **kw):
        """Increment at ``P+ = p_plus`` paired with decrement at ``p_plus + 1``."""
        inc = Predicate(q_left, q, q_right, p_plus)
        dec = Predicate(q_left, q, q_right, p_plus + 1)
        return cls(inc, dec, **kw)

    def apply(self, state: AutomatonState) -> AutomatonState:
        """The match phase alone (its own inverse)."""
        inc = self.increment.matches(state.Q, state.P_plus)
        dec = self.decrement.matches(state.Q, state.P_plus)
        P = state.P_plus + inc.astype(np.int64) - dec.astype(np.int64)
        return AutomatonState(state.Q, P, state.t)


def interaction_step(state: AutomatonState, rule: InteractionRule) -> AutomatonState:
    return rule.apply(step_forward(state))


def interaction_step_backward(state: AutomatonState, rule: InteractionRule) -> AutomatonState:
    return step_backward(rule.apply(state))


def evolve_interacting(state, rule, n):
    step = interaction_step if n >= 0 else interaction_step_backward
    for _ in range(abs(int(n))):
        state = step(state, rule)
    return state


def transfer_matrix(kappa: float) -> np.ndarray:
    """One free step acting on the plane-wave amplitudes ``(q, p+)``.

    With ``s = 4 sin^2(pi kappa)``: ``q' = q + p``, ``p' = p - s q'``.
    """
    s = 4.0 * np.sin(np.pi * kappa) ** 2
    return np.array([[1.0, 1.0], [-s, 1.0 - s]], dtype=complex)


def transfer_eigenvalues(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a unimodular 2x2 matrix, accurate at the double root.

    Writes them as ``c +/- i sqrt(1 - c^2)`` with ``c = tr/2``, factoring
    ``1 - c^2`` so the square root does not lose half the digits.
    """
    det = np.linalg.det(M)
    c = np.trace(M) / 2.0
    disc = (np.sqrt(det) - c) * (np.sqrt(det) + c)
    root = np.sqrt(disc.astype(complex))
    return np.array([c + 1j * root, c - 1j * root])


def dispersion_phases(kappa: float) -> np.ndarray:
    """Eigenphases of :func:`transfer_matrix` in radians, sorted descending."""
    mu = transfer_eigenvalues(transfer_matrix(kappa))
    return np.sort(np.angle(mu))[::-1]


def expected_phase(kappa: float) -> float:
    return TWO_PI * kappa


def dump_state(state: AutomatonState) -> str:
    lines = [f"# automaton-state L={state.L} t={state.t}"]
    lines += [f"{x} {int(q)} {int(p)}" for x, (q, p) in enumerate(zip(state.Q, state.P_plus))]
    return "\n".join(lines) + "\n"


def load_state(text: str) -> AutomatonState:
    L = t = None
    rows = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("L="):
                    L = int(tok[2:])
                elif tok.startswith("t="):
                    t = int(tok[2:])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'x Q P_plus', got {raw!r}")
        x, q, p = (int(v) for v in parts)
        rows[x] = (q, p)
    if L is None or t is None:
        raise ValueError("missing header with L and t")
    if sorted(rows) != list(range(L)):
        raise ValueError(f"expected sites 0..{L - 1}, got {sorted(rows)}")
    big = any(abs(v) >= _SAFE_BOUND for qp in rows.values() for v in qp)
    dtype = object if big else np.int64
    Q = np.array([rows[x][0] for x in range(L)], dtype=dtype)
    P = np.array([rows[x][1] for x in range(L)], dtype=dtype)
    return AutomatonState(Q, P, t)
