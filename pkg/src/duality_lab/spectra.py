"""Hamiltonians on truncated mover spaces and the sawtooth hamiltonian of a permutation."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ._units import TWO_PI
from .ca_engine import Chirality
from .errors import BasisMismatch, NotPermutation, TableTooShort
from .hilbert import OperatorMatrix, TruncatedBasis
from .phase_map import a_mover_matrix, edge_orthogonal_projector
from .qft_kernels import KernelTable, divergent_part_coefficient


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    hermiticity_defect: float
    shift_commutator_norm: float
    multiplicities: list = field(default_factory=list)
    ground_vacuum_overlap: float = float("nan")
    ground_edge_weight: float = float("nan")
    label: str = ""

    @classmethod
    def from_operator(cls, H: OperatorMatrix, shift=None, projector=None, label="", tol=1e-9):
        E = H.entries
        herm = H.hermiticity_defect()
        w, V = np.linalg.eigh((E + E.conj().T) / 2)
        comm = float(np.abs(E @ shift - shift @ E).max()) if shift is not None else float("nan")
        mult = _multiplicities(w, tol)
        basis = H.basis
        vac = np.zeros(basis.dimension)
        vac[basis.index_of(np.zeros(basis.n_sites, dtype=int))] = 1.0
        g = V[:, 0]
        edge_w = float("nan")
        if projector is not None:
            edge_w = float(np.linalg.norm(g - projector.entries @ g) ** 2)
        return cls(w, herm, comm, mult, float(abs(vac @ g) ** 2), edge_w, label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,eigenvalue\n")
        for i, e in enumerate(self.eigenvalues):
            buf.write(f"{i},{e:.17g}\n")
        return buf.getvalue()

    def summary(self) -> str:
        lines = [
            f"# spectrum {self.label}".rstrip(),
            f"dimension = {len(self.eigenvalues)}",
            f"hermiticity_defect = {self.hermiticity_defect:.3e}",
            f"shift_commutator_norm = {self.shift_commutator_norm:.3e}",
            f"lowest = {self.eigenvalues[0]:.12g}",
            f"highest = {self.eigenvalues[-1]:.12g}",
            f"distinct_levels = {len(self.multiplicities)}",
            f"ground_vacuum_overlap = {self.ground_vacuum_overlap:.6g}",
            f"ground_edge_weight = {self.ground_edge_weight:.6g}",
        ]
        return "\n".join(lines) + "\n"


def _multiplicities(w, tol):
    out = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[start] > tol:
            out.append((float(w[start]), i - start))
            start = i
    return out


def site_shift_operator(basis: TruncatedBasis, n: int = 1) -> np.ndarray:
    """Permutation ``|A(0), ..., A(L-1)> -> |A(n), ..., A(n+L-1)>`` (indices mod L)."""
    rolled = np.roll(basis.configs, -n, axis=1)
    idx = basis.index_of(rolled)
    T = np.zeros((basis.dimension, basis.dimension))
    T[idx, np.arange(basis.dimension)] = 1.0
    return T


def ring_weights(L: int, table: KernelTable) -> np.ndarray:
    """``W[x, y] = sum of M_|s|`` over images ``s = y - x + nL`` with ``|s| <= s_max``."""
    if table.s_max < L // 2:
        raise TableTooShort(f"ring of {L} sites needs s_max >= {L // 2}, table has {table.s_max}")
    W = np.zeros((L, L))
    for x in range(L):
        for s in range(-table.s_max, table.s_max + 1):
            W[x, (x + s) % L] += table[s]
    return W


def mover_matrices(basis: TruncatedBasis, chirality=Chirality.LEFT):
    return [a_mover_matrix(basis, x, chirality) for x in basis.sites]


def build_hamiltonian(basis: TruncatedBasis, table: KernelTable, chirality=Chirality.LEFT,
                      movers=None) -> OperatorMatrix:
    """``H = sum_{x,s} M_|s| a(x) a(x+s)`` for one chirality on a ring basis."""
    a = movers if movers is not None else mover_matrices(basis, chirality)
    for m in a:
        if not m.basis.same_as(basis):
            raise BasisMismatch("mover matrices were built on another basis")
    L = basis.n_sites
    W = ring_weights(L, table)
    mats = [m.entries for m in a]
    H = np.zeros((basis.dimension,) * 2, dtype=complex)
    for x in range(L):
        inner = sum(W[x, y] * mats[y] for y in range(L) if W[x, y] != 0.0)
        if not np.isscalar(inner):
            H += mats[x] @ inner
    return OperatorMatrix(basis, H, f"H{Chirality(chirality).value}")


def divergent_operator(basis: TruncatedBasis, config, chirality=Chirality.LEFT, movers=None) -> OperatorMatrix:
    """``c(lam) * (sum_x (-1)^x a(x))^2`` for one chirality."""
    if basis.n_sites % 2:
        raise ValueError("alternating sum needs an even ring")
    a = movers if movers is not None else mover_matrices(basis, chirality)
    S = sum(((-1) ** x) * m.entries for x, m in enumerate(a))
    return OperatorMatrix(basis, divergent_part_coefficient(config) * (S @ S), "H_div")


def operator_rank(op: OperatorMatrix, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(op.entries, compute_uv=False)
    return int((s > rtol * max(s[0], 1e-300)).sum()) if s.size else 0


# --- sawtooth hamiltonian --------------------------------------------------

def permutation_of(U) -> np.ndarray:
    """Index array ``p`` with ``U[p[j], j] = 1``; raises :class:`NotPermutation`."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NotPermutation("matrix is not square")
    ones = np.isclose(U, 1.0, atol=1e-12)
    zeros = np.isclose(U, 0.0, atol=1e-12)
    if not np.all(ones | zeros) or not np.all(ones.sum(0) == 1) or not np.all(ones.sum(1) == 1):
        raise NotPermutation("matrix is not a 0/1 permutation matrix")
    return np.argmax(ones, axis=0)


def sawtooth_hamiltonian(U, N_terms: int) -> np.ndarray:
    """``H = sum_{n=1}^N ((-1)^{n-1} i / 2 pi n) (U^n - U^{-n})``.

    For an eigenvector of ``U`` with eigenvalue ``E^{i alpha}``,
    ``|alpha| < 1/2``, the eigenvalue of ``H`` tends to ``-alpha`` so that
    ``E^{-iH} = U``.
    """
    if N_terms < 1:
        raise ValueError("N_terms must be at least 1")
    perm = permutation_of(U)
    d = perm.size
    cols = np.arange(d)
    fwd = cols.copy()
    # (U^n)[fwd[j], j] = 1 ; U^{-n} is its transpose
    coef = np.zeros((d, d), dtype=complex)
    for n in range(1, N_terms + 1):
        fwd = perm[fwd]
        c = (-1) ** (n - 1) * 1j / (TWO_PI * n)
        np.add.at(coef, (fwd, cols), c)
        np.add.at(coef, (cols, fwd), -c)
    return coef


def cyclic_shift_matrix(m: int) -> np.ndarray:
    return np.roll(np.eye(m), 1, axis=0)


@dataclass
class BoundReport:
    spectral_radius: float
    hermiticity_defect: float
    within_bound: bool
    nonextensive_defect: float = float("nan")


def hamiltonian_bound_check(H, eps: float = 1e-6, U1=None, U2=None, N_terms: int = 1000) -> BoundReport:
    """Spectral radius against 1/2, and optionally the product-system defect.

    With ``U1`` and ``U2`` given, compares the sawtooth hamiltonian of
    ``U1 (x) U2`` with ``H1 (x) 1 + 1 (x) H2`` in operator norm.
    """
    H = np.asarray(H)
    herm = float(np.abs(H - H.conj().T).max(initial=0.0))
    w = np.linalg.eigvalsh((H + H.conj().T) / 2)
    rad = float(np.abs(w).max(initial=0.0))
    rep = BoundReport(rad, herm, rad <= 0.5 + eps)
    if U1 is not None and U2 is not None:
        H1 = sawtooth_hamiltonian(U1, N_terms)
        H2 = sawtooth_hamiltonian(U2, N_terms)
        Hp = sawtooth_hamiltonian(np.kron(U1, U2), N_terms)
        Hs = np.kron(H1, np.eye(len(H2))) + np.kron(np.eye(len(H1)), H2)
        rep.nonextensive_defect = float(np.linalg.norm(Hp - Hs, 2))
    return rep


# --- evolution probe -------------------------------------------------------

@dataclass
class ProbeReport:
    K: int
    chirality: str
    fidelity: float
    baseline: float
    n_probe: int
    block_defect: float
    per_state: np.ndarray = field(repr=False, default=None)


def evolution_consistency_probe(basis: TruncatedBasis, H, chirality=Chirality.LEFT,
                                max_occupation: int = 1, projector=None) -> ProbeReport:
    """Fidelity of ``E^{-iH}`` against one step of mover transport.

    Probe states are basis states with ``sum |A| <= max_occupation`` pushed
    through the edge-orthogonal projector.  Mean ``|<S psi| E^{-iH} psi>|^2``
    is reported alongside the ``H = 0`` baseline.
    """
    chir = Chirality(chirality)
    Hm = H.entries if isinstance(H, OperatorMatrix) else np.asarray(H)
    w, V = np.linalg.eigh((Hm + Hm.conj().T) / 2)
    U = (V * np.exp(-1j * TWO_PI * w)) @ V.conj().T
    S = site_shift_operator(basis, chir.direction)
    P = (projector or edge_orthogonal_projector(basis)).entries
    low = np.flatnonzero(np.abs(basis.configs).sum(axis=1) <= max_occupation)
    fids, base = [], []
    for i in low:
        psi = P[:, i]
        nrm = np.linalg.norm(psi)
        if nrm < 1e-8:
            continue
        psi = psi / nrm
        target = S @ psi
        fids.append(abs(np.vdot(target, U @ psi)) ** 2)
        base.append(abs(np.vdot(target, psi)) ** 2)
    T = site_shift_operator(basis, 1)
    block = float(np.abs(U @ T - T @ U).max())
    fids = np.array(fids)
    return ProbeReport(basis.K, chir.value, float(fids.mean()), float(np.mean(base)),
                       len(fids), block, fids)
