"""The phase function on the fractional torus and the mover matrices built from it.

``phi(eta, xi)`` is minus the argument, in turns, of the Gaussian sum::

    theta(eta, xi) = sum_K exp(-pi (K - xi)^2 - 2 pi i K eta)

With this sign ``phi(eta, xi) + phi(xi, eta) = eta * xi`` and
``phi(eta, xi + 1) = phi(eta, xi) + eta`` (both mod 1).  The same function is
given by a product expansion; :func:`phi_pair` evaluates either.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._units import TWO_PI, turns, wrap_half
from .ca_engine import Chirality
from .errors import BasisMismatch, VortexPoint
from .hilbert import (
    DEFAULT_MARGIN,
    OperatorMatrix,
    TruncatedBasis,
    edge_state,
    enumerate_basis,
)

K_CUT = 8
ARG_SERIES_TOL = 1e-15
VORTEX_RADIUS = 1e-6


def _in_range(v):
    v = np.asarray(v, dtype=float)
    return bool(np.all((v > -0.5) & (v <= 0.5)))


@dataclass(frozen=True)
class PhasePoint:
    eta: float
    xi: float

    def __post_init__(self):
        if not _in_range([self.eta, self.xi]):
            raise ValueError(f"({self.eta}, {self.xi}) outside (-1/2, 1/2]^2")

    @property
    def is_vortex(self) -> bool:
        return bool(_vortex_mask(self.eta, self.xi))


@dataclass(frozen=True)
class EtaVector:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not _in_range(vals):
            raise ValueError("every entry must lie in (-1/2, 1/2]")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


def _vortex_mask(eta, xi):
    de = np.abs(wrap_half(np.asarray(eta) - 0.5))
    dx = np.abs(wrap_half(np.asarray(xi) - 0.5))
    return np.hypot(de, dx) < VORTEX_RADIUS


def theta(eta, xi, K_cut: int = K_CUT):
    """Gaussian sum over integers ``K`` with ``|K - xi| <= K_cut + 1``.

    Accepts scalars or broadcastable arrays and any real arguments.
    """
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    center = np.rint(xi)
    ks = np.arange(-K_cut - 1, K_cut + 2)
    K = center[..., None] + ks
    terms = np.exp(-np.pi * (K - xi[..., None]) ** 2 - 1j * TWO_PI * K * eta[..., None])
    out = terms.sum(axis=-1)
    return out if out.ndim else complex(out)


def theta_dxi(eta, xi, K_cut: int = K_CUT):
    """Partial derivative of :func:`theta` in ``xi``."""
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    center = np.rint(xi)
    K = center[..., None] + np.arange(-K_cut - 1, K_cut + 2)
    u = K - xi[..., None]
    terms = TWO_PI * u * np.exp(-np.pi * u**2 - 1j * TWO_PI * K * eta[..., None])
    return terms.sum(axis=-1)


def _phi_theta(eta, xi):
    return wrap_half(-turns(theta(eta, xi)))


def _phi_arg(eta, xi):
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    # |term| <= exp(2 pi (|xi| - K - 1/2)); stop once that is below tolerance
    top = np.max(np.abs(xi), initial=0.0) - 0.5 - np.log(ARG_SERIES_TOL) / TWO_PI
    total = np.zeros(np.broadcast(eta, xi).shape)
    for K in range(int(np.ceil(top)) + 1):
        up = np.exp(TWO_PI * (xi - K - 0.5) + 1j * TWO_PI * eta)
        down = np.exp(TWO_PI * (-xi - K - 0.5) - 1j * TWO_PI * eta)
        total = total + np.angle(1 + up) + np.angle(1 + down)
    return wrap_half(total / TWO_PI)


def phi_pair(eta, xi=None, method: str = "theta"):
    """Phase ``phi(eta, xi)`` in turns, reduced into ``(-1/2, 1/2]``.

    ``method`` is ``"theta"`` (argument of the Gaussian sum) or ``"arg"``
    (product expansion).  Raises :class:`VortexPoint` near the corners.
    """
    if isinstance(eta, PhasePoint):
        eta, xi = eta.eta, eta.xi
    if np.any(_vortex_mask(eta, xi)):
        raise VortexPoint(f"phase undefined at corner ({eta}, {xi})")
    if method == "theta":
        out = _phi_theta(eta, xi)
    elif method == "arg":
        out = _phi_arg(eta, xi)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


def phi_multisite(v, method: str = "theta") -> float:
    """Cyclic sum ``sum_x phi(eta(x+1), eta(x))`` mod 1."""
    vals = np.asarray(v.values if isinstance(v, EtaVector) else v, dtype=float)
    total = np.sum(phi_pair(np.roll(vals, -1), vals, method=method))
    return float(wrap_half(total))


def winding_number(center=(0.5, 0.5), radius: float = 0.05, n: int = 720) -> int:
    """Net turns of ``theta`` around a small circle (summed phase increments)."""
    s = np.linspace(0.0, 1.0, n + 1)
    eta = center[0] + radius * np.cos(TWO_PI * s)
    xi = center[1] + radius * np.sin(TWO_PI * s)
    ph = np.angle(theta(eta, xi)) / TWO_PI
    steps = wrap_half(np.diff(ph))
    return int(np.rint(steps.sum()))


def phase_grid_csv(n: int = 101, method: str = "theta") -> str:
    """CSV ``eta,xi,r,phi`` on an ``n x n`` interior grid."""
    g = interior_grid(n)
    E, X = np.meshgrid(g, g, indexing="ij")
    r = np.abs(theta(E, X))
    ph = phi_pair(E, X, method=method)
    buf = io.StringIO()
    buf.write("eta,xi,r,phi\n")
    for e, x, rr, p in zip(E.ravel(), X.ravel(), r.ravel(), ph.ravel()):
        buf.write(f"{e:.12g},{x:.12g},{rr:.17g},{p:.17g}\n")
    return buf.getvalue()


def interior_grid(n: int) -> np.ndarray:
    """``n`` cell-centred points strictly inside ``(-1/2, 1/2)``."""
    return (np.arange(n) + 0.5) / n - 0.5


# --- mover matrices -------------------------------------------------------

def pair_kernel(u, v):
    """Off-diagonal element for a pair change ``(u, v)`` at ``(x, neighbour)``.

    ``(1/2pi) (-1)^{u+v+1} i v / (u^2 + v^2)``, zero at ``u = v = 0``.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    d = u * u + v * v
    safe = np.where(d == 0, 1, d)
    sign = np.where((u + v) % 2 == 0, -1.0, 1.0)
    return np.where(d == 0, 0.0, sign * 1j * v / safe) / TWO_PI


def _orientation(chirality) -> int:
    return Chirality(chirality).direction


def _neighbours(basis: TruncatedBasis, x, chirality):
    sites = basis.sites
    L = len(sites)
    if L < 3:
        raise ValueError("mover matrices need a ring of at least 3 sites")
    i = basis.position(x)
    o = _orientation(chirality)
    return sites[(i + o) % L], sites[(i - o) % L]


def _pair_family(basis, x, y, kern_of):
    """Matrix supported on changes confined to ``{x, y}``."""
    C = basis.configs
    px, py = basis.position(x), basis.position(y)
    rest = [p for p in range(basis.n_sites) if p not in (px, py)]
    same = np.ones((C.shape[0],) * 2, dtype=bool)
    for r in rest:
        same &= C[:, None, r] == C[None, :, r]
    dx = C[None, :, px] - C[:, None, px]
    dy = C[None, :, py] - C[:, None, py]
    return np.where(same, kern_of(dx, dy), 0.0)


def a_mover_matrix(basis: TruncatedBasis, x, chirality=Chirality.LEFT, kernel=pair_kernel) -> OperatorMatrix:
    """Mover operator ``a(x)`` between integer configurations.

    ``kernel(dA(x), dA(neighbour))`` gives the pair elements; the forward
    neighbour enters with ``+``, the backward one with ``-``.
    """
    fwd, bwd = _neighbours(basis, x, chirality)
    M = np.diag(basis.configs[:, basis.position(x)].astype(complex))
    M = M + _pair_family(basis, x, fwd, kernel) - _pair_family(basis, x, bwd, kernel)
    return OperatorMatrix(basis, M, f"a{Chirality(chirality).value}[{x}]")


def pair_edge_sign(basis: TruncatedBasis, x, y) -> np.ndarray:
    """``(-1)^{dA(x) + dA(y)}`` masked to changes confined to ``{x, y}``."""
    return _pair_family(basis, x, y, lambda u, v: np.where((u + v) % 2 == 0, 1.0, -1.0))


def expected_commutator(basis: TruncatedBasis, x, y, chirality=Chirality.LEFT) -> np.ndarray:
    """Limit value of ``[a(x), a(y)]``: ``+-(i/2pi)(delta - edge)`` for neighbours, else 0."""
    fwd, bwd = _neighbours(basis, x, chirality)
    d = basis.dimension
    if y == x:
        return np.zeros((d, d), complex)
    if y == fwd:
        sign = 1.0
    elif y == bwd:
        sign = -1.0
    else:
        return np.zeros((d, d), complex)
    return sign * (1j / TWO_PI) * (np.eye(d) - pair_edge_sign(basis, x, y))


@dataclass
class DefectSummary:
    interior_max: float
    overall_max: float
    margin: int
    K: int
    n_interior: int


def mover_commutator_defect(a_x: OperatorMatrix, a_y: OperatorMatrix, x, y,
                            chirality=Chirality.LEFT, margin: int = DEFAULT_MARGIN):
    """``[a(x), a(y)] - expected`` and its entrywise maxima."""
    if not a_x.basis.same_as(a_y.basis):
        raise BasisMismatch("mover matrices on different bases")
    basis = a_x.basis
    A, B = a_x.entries, a_y.entries
    C = A @ B - B @ A - expected_commutator(basis, x, y, chirality)
    mask = basis.interior_mask(margin)
    inner = np.abs(C[np.ix_(mask, mask)])
    summary = DefectSummary(
        interior_max=float(inner.max(initial=0.0)),
        overall_max=float(np.abs(C).max(initial=0.0)),
        margin=margin,
        K=basis.K,
        n_interior=int(mask.sum()),
    )
    return C, summary


# Structured evaluation.  With a(x) = A(x) + P_fwd(x) - P_bwd(x) the
# diagonal parts reproduce the limit commutator exactly; what is left are
# pair-pair products whose intermediate state leaves [-K, K] on a shared
# site.  Those only need the values at the shared site, so the residual can
# be computed at K far beyond what a dense ring basis allows.

def _shared_site_residual(f1, f2, K, margin):
    """Max over interior entries of ``[F1, F2]`` sharing one site.

    ``f1(dp, ds)`` acts on ``(p, s)`` and ``f2(ds, dq)`` on ``(s, q)``.
    """
    R = K - margin
    if R < 0:
        return 0.0
    dp = np.arange(-2 * R, 2 * R + 1)[:, None, None, None, None]
    dq = np.arange(-2 * R, 2 * R + 1)[None, :, None, None, None]
    a1 = np.arange(-R, R + 1)[None, None, :, None, None]
    a2 = np.arange(-R, R + 1)[None, None, None, :, None]
    c = np.arange(-K, K + 1)[None, None, None, None, :]
    s = (f1(dp, c - a1) * f2(a2 - c, dq) - f2(c - a1, dq) * f1(dp, a2 - c)).sum(-1)
    return float(np.abs(s).max())


def _same_pair_residual(f1, f2, K, margin):
    basis = enumerate_basis(2, K)
    D = basis.configs[None, :, :] - basis.configs[:, None, :]
    M1 = f1(D[..., 0], D[..., 1])
    M2 = f2(D[..., 0], D[..., 1])
    C = M1 @ M2 - M2 @ M1
    m = basis.interior_mask(margin)
    return float(np.abs(C[np.ix_(m, m)]).max(initial=0.0))


def structured_commutator_defect(K: int, margin: int = DEFAULT_MARGIN, distance: int = 1) -> float:
    """Interior max of the commutator defect on a ring of 4 sites.

    Mirror symmetry makes the value identical for both chiralities.
    """
    k = pair_kernel
    if distance == 1:
        t1 = _shared_site_residual(lambda p, s: k(p, s), lambda s, q: k(s, q), K, margin)
        t2 = _same_pair_residual(lambda a, b: k(a, b), lambda a, b: k(b, a), K, margin)
        t3 = _shared_site_residual(lambda p, s: k(s, p), lambda s, q: k(q, s), K, margin)
        return max(t1, t2, t3)
    if distance == 2:
        return _shared_site_residual(lambda p, s: k(p, s), lambda s, q: k(q, s), K, margin)
    raise ValueError("a 4-site ring only has distances 1 and 2")


# --- torus oracle -----------------------------------------------------------

def dphi_dxi(eta, xi):
    """``d phi / d xi`` from the logarithmic derivative of ``theta``."""
    return -np.imag(theta_dxi(eta, xi) / theta(eta, xi)) / TWO_PI


def torus_pair_coefficients(G: int) -> np.ndarray:
    """``c[n, m] = int int dphi/dxi(eta, xi) exp(2 pi i (n eta + m xi))``.

    Midpoint rule on a ``G x G`` cell-centred grid, so no node sits on the
    corner singularity.  Indices wrap modulo ``G``.
    """
    g = interior_grid(G)
    E, X = np.meshgrid(g, g, indexing="ij")
    f = dphi_dxi(E, X)
    # exp(2 pi i n eta) with eta = (j + 1/2)/G - 1/2 : inverse DFT times a phase
    coeff = np.fft.ifft2(f)
    n = np.fft.fftfreq(G, 1.0 / G)
    phase = np.exp(1j * TWO_PI * n * (0.5 / G - 0.5))
    return coeff * phase[:, None] * phase[None, :]


def a_mover_via_torus(basis: TruncatedBasis, x, G: int = 64, chirality=Chirality.LEFT) -> OperatorMatrix:
    """Mover matrix from Fourier coefficients of the phase derivative on the torus.

    ``a(x) = -(i/2pi) d/d eta(x) + d/d eta(x) [phi(eta_fwd, eta_x) - phi(eta_bwd, eta_x)]``
    with plane waves ``exp(2 pi i A . eta)`` as the integer basis.
    """
    if G < 32:
        raise ValueError("torus grid needs G >= 32")
    c = torus_pair_coefficients(G)

    def kern(u, v):
        return c[np.mod(v, G), np.mod(u, G)]

    return a_mover_matrix(basis, x, chirality, kernel=kern)


def derivative_only_via_torus(G: int, K: int) -> np.ndarray:
    """``-(i/2pi) d/d eta`` on a ``G``-point grid, projected on plane waves ``|A| <= K``."""
    g = interior_grid(G)
    A = np.arange(-K, K + 1)
    W = np.exp(1j * TWO_PI * np.outer(g, A))  # grid x modes
    k = np.fft.fftfreq(G, 1.0 / G)
    D = np.fft.ifft(np.fft.fft(W, axis=0) * k[:, None], axis=0)  # -(i/2pi) d/deta
    return (W.conj().T @ D) / G


# --- edge constraint --------------------------------------------------------

def edge_constraint_vectors(basis: TruncatedBasis, site_pairs: Iterable) -> np.ndarray:
    """Columns ``psi_xy (x) e_rest`` for every pair and every rest configuration."""
    cols = []
    C = basis.configs
    for x, y in site_pairs:
        px, py = basis.position(x), basis.position(y)
        rest = [p for p in range(basis.n_sites) if p not in (px, py)]
        sign = np.where((C[:, px] + C[:, py]) % 2 == 0, 1.0, -1.0)
        if rest:
            key = np.ravel_multi_index((C[:, rest] + basis.K).T, (basis.width,) * len(rest))
        else:
            key = np.zeros(C.shape[0], dtype=int)
        n_groups = basis.width ** len(rest)
        block = np.zeros((C.shape[0], n_groups))
        block[np.arange(C.shape[0]), key] = sign
        cols.append(block / basis.width)
    return np.hstack(cols) if cols else np.zeros((basis.dimension, 0))


def ring_pairs(basis: TruncatedBasis):
    s = basis.sites
    return [(s[i], s[(i + 1) % len(s)]) for i in range(len(s))]


def edge_orthogonal_projector(basis: TruncatedBasis, site_pairs=None, rtol: float = 1e-10) -> OperatorMatrix:
    """Orthogonal projector onto the complement of all pair edge states."""
    if site_pairs is None:
        site_pairs = ring_pairs(basis)
    V = edge_constraint_vectors(basis, site_pairs)
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    Qb = U[:, s > rtol * max(s.max(initial=0.0), 1.0)]
    P = np.eye(basis.dimension) - Qb @ Qb.conj().T
    return OperatorMatrix(basis, P, "edge-orthogonal")


def vacuum_edge_overlap(basis: TruncatedBasis, projector: OperatorMatrix) -> float:
    """Norm of the part of ``|0, 0, ...>`` lying in the edge-state span."""
    vac = np.zeros(basis.dimension)
    vac[basis.index_of(np.zeros(basis.n_sites, dtype=int))] = 1.0
    return float(np.linalg.norm(vac - projector.entries @ vac))


def pair_edge_vector(basis: TruncatedBasis, x, y) -> np.ndarray:
    return edge_state(basis, (x, y)).vector
