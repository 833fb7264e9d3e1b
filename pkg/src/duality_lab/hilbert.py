"""Truncated integer bases and the operators living on them.

A basis holds every configuration ``{A(s) in [-K, K]}`` over a list of
sites in lexicographic order.  Operators are dense complex matrices.
Shifts that would leave ``[-K, K]`` are dropped rather than wrapped, so
identities hold exactly only on interior rows and columns.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._units import TWO_PI
from .errors import BasisMismatch, DimensionTooLarge

MAX_DIMENSION = 10**7
DEFAULT_MARGIN = 2


@dataclass(frozen=True, eq=False)
class TruncatedBasis:
    sites: tuple
    K: int
    configs: np.ndarray = field(repr=False)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def width(self) -> int:
        return 2 * self.K + 1

    @property
    def dimension(self) -> int:
        return self.configs.shape[0]

    def position(self, site) -> int:
        """Column of ``site`` in :attr:`configs`."""
        try:
            return self.sites.index(site)
        except ValueError:
            raise KeyError(f"site {site!r} not in basis {self.sites}") from None

    def index_of(self, config) -> np.ndarray:
        """Row index of each configuration (last axis runs over sites)."""
        c = np.asarray(config) + self.K
        if np.any((c < 0) | (c >= self.width)):
            raise ValueError("configuration outside [-K, K]")
        weights = self.width ** np.arange(self.n_sites - 1, -1, -1)
        return c @ weights

    def config_of(self, index) -> np.ndarray:
        return self.configs[index]

    def interior_mask(self, margin: int = DEFAULT_MARGIN) -> np.ndarray:
        """Rows whose every value satisfies ``|A| <= K - margin``."""
        return np.all(np.abs(self.configs) <= self.K - margin, axis=1)

    def window_mask(self, radius: int) -> np.ndarray:
        """Rows whose every value satisfies ``|A| <= radius``."""
        return np.all(np.abs(self.configs) <= radius, axis=1)

    def same_as(self, other) -> bool:
        return self is other or (self.sites == other.sites and self.K == other.K)

    def header(self) -> str:
        return f"# basis sites={','.join(map(str, self.sites))} K={self.K} dim={self.dimension}"


def enumerate_basis(sites, K: int) -> TruncatedBasis:
    if isinstance(sites, int):
        sites = range(sites)
    sites = tuple(sites)
    if len(set(sites)) != len(sites):
        raise ValueError("duplicate site labels")
    if K < 0:
        raise ValueError("K must be non-negative")
    dim = (2 * K + 1) ** len(sites)
    if dim > MAX_DIMENSION:
        raise DimensionTooLarge(f"(2K+1)^n = {dim} exceeds {MAX_DIMENSION}")
    values = np.arange(-K, K + 1)
    grids = np.meshgrid(*([values] * len(sites)), indexing="ij")
    configs = np.stack([g.ravel() for g in grids], axis=1) if sites else np.zeros((1, 0), int)
    configs.setflags(write=False)
    return TruncatedBasis(sites, K, configs)


@dataclass(eq=False)
class OperatorMatrix:
    basis: TruncatedBasis
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        d = self.basis.dimension
        if self.entries.shape != (d, d):
            raise ValueError(f"expected shape {(d, d)}, got {self.entries.shape}")

    def _check(self, other):
        if not self.basis.same_as(other.basis):
            raise BasisMismatch(f"{self.basis.header()} vs {other.basis.header()}")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.basis, self.entries @ other.entries)
        return self.entries @ np.asarray(other)

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.entries - other.entries)

    def __mul__(self, scalar):
        return OperatorMatrix(self.basis, self.entries * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(self.basis, -self.entries)

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.entries.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max(initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_defect() <= tol

    def is_unitary_on(self, mask, tol: float = 1e-12) -> bool:
        """``U^dag U = 1`` restricted to the columns selected by ``mask``."""
        U = self.entries[:, mask]
        return bool(np.abs(U.conj().T @ U - np.eye(U.shape[1])).max(initial=0.0) <= tol)

    def interior(self, margin: int = DEFAULT_MARGIN) -> np.ndarray:
        m = self.basis.interior_mask(margin)
        return self.entries[np.ix_(m, m)]

    def element(self, bra, ket) -> complex:
        i, j = self.basis.index_of(bra), self.basis.index_of(ket)
        return complex(self.entries[i, j])


def embed_local(basis: TruncatedBasis, sites: Sequence, local: np.ndarray) -> np.ndarray:
    """Dense matrix of ``local`` (acting on ``sites``) tensored with identity."""
    pos = [basis.position(s) for s in sites]
    n, w = basis.n_sites, basis.width
    k = len(pos)
    local = np.asarray(local, dtype=complex).reshape((w,) * (2 * k))
    rest = [p for p in range(n) if p not in pos]
    ident = np.eye(w ** len(rest)).reshape((w,) * (2 * len(rest)))
    full = np.tensordot(local, ident, axes=0)
    # axes of `full`: out(pos), in(pos), out(rest), in(rest); label each
    # axis by its target slot (out site p -> p, in site p -> n + p)
    labels = pos + [n + p for p in pos] + rest + [n + r for r in rest]
    perm = np.argsort(labels)
    full = np.transpose(full, perm)
    d = basis.dimension
    return full.reshape(d, d)


def _local_values(K):
    return np.arange(-K, K + 1)


def shift_op(basis: TruncatedBasis, site, N: int) -> OperatorMatrix:
    """``E^{i N eta}`` at ``site``: ``|A> -> |A + N>``, zero when pushed out."""
    w = basis.width
    local = np.eye(w, k=-N) if abs(N) < w else np.zeros((w, w))
    return OperatorMatrix(basis, embed_local(basis, [site], local), f"shift[{site}]^{N}")


def number_op(basis: TruncatedBasis, site) -> OperatorMatrix:
    col = basis.configs[:, basis.position(site)]
    return OperatorMatrix(basis, np.diag(col.astype(complex)), f"A[{site}]")


def eta_elements(delta) -> np.ndarray:
    """``<Q1|eta|Q2>`` as a function of ``delta = Q2 - Q1``."""
    delta = np.asarray(delta)
    safe = np.where(delta == 0, 1, delta)
    sign = np.where(delta % 2 == 0, 1.0, -1.0)
    return np.where(delta == 0, 0.0, -1j * sign / (TWO_PI * safe))


def eta_op(basis: TruncatedBasis, site) -> OperatorMatrix:
    v = _local_values(basis.K)
    local = eta_elements(v[None, :] - v[:, None])
    return OperatorMatrix(basis, embed_local(basis, [site], local), f"eta[{site}]")


def eta_from_series(basis: TruncatedBasis, site, N_max: int) -> OperatorMatrix:
    """Partial sum ``sum_{0<|N|<=N_max} (i / 2 pi N) (-1)^N E^{i N eta}``.

    Shift ``N`` fills the diagonal ``row - col = N``, so the sum is built
    directly from the offset of each entry.
    """
    v = _local_values(basis.K)
    d = v[:, None] - v[None, :]
    safe = np.where(d == 0, 1, d)
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    local = np.where((d != 0) & (np.abs(d) <= N_max), 1j * sign / (TWO_PI * safe), 0.0)
    return OperatorMatrix(basis, embed_local(basis, [site], local), f"eta_series[{site}]")


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    A._check(B)
    return OperatorMatrix(A.basis, A.entries @ B.entries - B.entries @ A.entries)


@dataclass(eq=False)
class EdgeStateVector:
    """Alternating-sign vector ``(-1)^{sum of A over sites}``."""

    basis: TruncatedBasis
    sites: tuple
    components: np.ndarray

    @property
    def normalization(self) -> float:
        return 1.0 / np.sqrt(self.basis.dimension)

    @property
    def vector(self) -> np.ndarray:
        return self.components * self.normalization


def edge_state(basis: TruncatedBasis, site_pair) -> EdgeStateVector:
    if not isinstance(site_pair, (tuple, list)):
        site_pair = (site_pair,)
    cols = [basis.position(s) for s in site_pair]
    total = basis.configs[:, cols].sum(axis=1)
    comps = np.where(total % 2 == 0, 1.0, -1.0)
    return EdgeStateVector(basis, tuple(site_pair), comps)


def pair_edge_projector(basis: TruncatedBasis, x, y) -> np.ndarray:
    """``|psi_xy><psi_xy|`` on the pair, identity on the other sites.

    Unnormalized: its entries are ``(-1)^{sum of Delta A}`` between
    configurations that agree away from ``{x, y}``.
    """
    pos = [basis.position(s) for s in (x, y)]
    rest = [p for p in range(basis.n_sites) if p not in pos]
    C = basis.configs
    same_rest = np.ones((C.shape[0], C.shape[0]), dtype=bool)
    for r in rest:
        same_rest &= C[:, None, r] == C[None, :, r]
    sign = np.where(C[:, pos].sum(axis=1) % 2 == 0, 1.0, -1.0)
    return np.where(same_rest, np.outer(sign, sign), 0.0)


def edge_alignment(defect: np.ndarray, edge: EdgeStateVector) -> float:
    """``|<psi|D|psi>| / ||D||_F`` for unit ``psi``: 1 when ``D`` is rank one along it."""
    v = edge.vector
    num = abs(v.conj() @ defect @ v)
    den = np.linalg.norm(defect)
    return float(num / den) if den else 0.0


def dump_operator(op: OperatorMatrix, tol: float = 0.0) -> str:
    """Plain-text triplets ``row col re im`` below a basis header."""
    buf = io.StringIO()
    buf.write(op.basis.header() + "\n")
    rows, cols = np.nonzero(np.abs(op.entries) > tol)
    for r, c in zip(rows, cols):
        z = op.entries[r, c]
        buf.write(f"{r} {c} {z.real:.17g} {z.imag:.17g}\n")
    return buf.getvalue()


def load_operator(text: str) -> OperatorMatrix:
    lines = text.splitlines()
    head = lines[0].lstrip("#").split()
    meta = dict(tok.split("=", 1) for tok in head[1:])
    sites = tuple(int(s) if s.lstrip("-").isdigit() else s for s in meta["sites"].split(",") if s)
    basis = enumerate_basis(sites, int(meta["K"]))
    M = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for line in lines[1:]:
        if not line.strip():
            continue
        r, c, re, im = line.split()
        M[int(r), int(c)] = complex(float(re), float(im))
    return OperatorMatrix(basis, M)
