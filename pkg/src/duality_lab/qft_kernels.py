"""Momentum-space kernels of the lattice hamiltonian.

The position-space kernel is the Fourier coefficient

    M_s = int_{-1/2+lam}^{1/2-lam} kappa cos(2 pi s kappa) / sin(2 pi kappa) d kappa

which diverges like ``(-1)^s log(1/lam) / 2pi`` as the cutoff ``lam`` goes to
zero.  Both a quadrature and the closed form are provided.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from ._units import TWO_PI, epow
from .ca_engine import Chirality
from .errors import PoleAt, QuadratureFailure

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class KernelConfig:
    lam: float = 1e-3
    Lam: float = 10.0
    s_max: int = 8
    tol: float = QUAD_TOL

    def __post_init__(self):
        if not 0 < self.lam < 0.1:
            raise ValueError(f"lambda must be in (0, 0.1), got {self.lam}")
        if not self.Lam > 1:
            raise ValueError(f"Lambda must exceed 1, got {self.Lam}")
        if int(self.s_max) != self.s_max or self.s_max < 0:
            raise ValueError(f"s_max must be a non-negative integer, got {self.s_max}")


@dataclass(frozen=True)
class KernelTable:
    values: tuple
    config: KernelConfig
    method: str

    def __post_init__(self):
        if self.method not in ("quadrature", "closed-form", "custom"):
            raise ValueError(f"unknown method tag {self.method!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def s_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, s):
        return self.values[abs(s)]

    @classmethod
    def build(cls, config: KernelConfig, method: str = "closed-form") -> "KernelTable":
        fn = kernel_Ms_closed if method == "closed-form" else kernel_Ms_quadrature
        return cls([fn(s, config) for s in range(config.s_max + 1)], config, method)

    @classmethod
    def custom(cls, values, config: KernelConfig | None = None) -> "KernelTable":
        values = list(values)
        cfg = config or KernelConfig(s_max=len(values) - 1)
        return cls(values, cfg, "custom")


def _integrand(kappa, s):
    return kappa * np.cos(TWO_PI * s * kappa) / np.sin(TWO_PI * kappa)


def _even_integrand(kappa, s):
    if kappa == 0.0:
        return 1.0 / TWO_PI
    return _integrand(kappa, s)


def kernel_Ms_quadrature(s: int, config: KernelConfig) -> float:
    """Adaptive quadrature over ``[0, 1/2 - lam]``, doubled (even integrand).

    The interval is split so the last panel hugs the log-growing endpoint.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    top = 0.5 - config.lam
    edges = [0.0, 0.25, 0.5 - 10 * config.lam, 0.5 - 2 * config.lam, top]
    edges = sorted(set(e for e in edges if 0.0 <= e <= top))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(
                    _even_integrand, lo, hi, args=(s,),
                    epsabs=config.tol * 1e-2, epsrel=config.tol, limit=400,
                )
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(f"s={s}, panel [{lo}, {hi}]: {exc}") from None
        if err > config.tol * max(1.0, abs(val)):
            raise QuadratureFailure(f"s={s}: error estimate {err:.3g} over tolerance")
        total += val
    return 2.0 * total


def kernel_Ms_closed(s: int, config: KernelConfig) -> float:
    s = abs(int(s))
    lam = config.lam
    if s % 2 == 0:
        harm = sum(1.0 / (k + 0.5) for k in range(s // 2))
        return (np.log(2.0 / lam) - harm) / TWO_PI
    harm = sum(1.0 / k for k in range(1, (s - 1) // 2 + 1))
    return (np.log(2.0 * lam) + harm) / TWO_PI


def divergent_part_coefficient(config_or_lam) -> float:
    lam = config_or_lam.lam if isinstance(config_or_lam, KernelConfig) else float(config_or_lam)
    return float(np.log(1.0 / lam) / TWO_PI)


def smooth_cutoff_factor(kappa, Lam: float):
    """``1 - exp(-Lam^2 (1/2 - |kappa|)^2)``: zero at the zone edge, near one inside."""
    d = 0.5 - np.abs(np.asarray(kappa, dtype=float))
    return 1.0 - np.exp(-(Lam**2) * d**2)


def hampf_kernels(kappa):
    """``(kappa / tan(pi kappa), 4 kappa tan(pi kappa))``; the second has a pole at 1/2."""
    k = np.asarray(kappa, dtype=float)
    if np.any(np.isclose(np.abs(k), 0.5, rtol=0, atol=1e-15)):
        raise PoleAt("4 kappa tan(pi kappa) has a pole at |kappa| = 1/2")
    t = np.tan(np.pi * k)
    safe = np.where(k == 0, 1.0, t)
    kp = np.where(k == 0, 1.0 / np.pi, k / safe)
    kq = 4.0 * k * t
    if kp.ndim == 0:
        return float(kp), float(kq)
    return kp, kq


def hamiltonian_kernel(kappa):
    """``pi kappa / sin(2 pi kappa)`` with its limit 1/2 at zero."""
    k = np.asarray(kappa, dtype=float)
    if np.any(np.isclose(np.abs(k), 0.5, rtol=0, atol=1e-15)):
        raise PoleAt("pi kappa / sin(2 pi kappa) has a pole at |kappa| = 1/2")
    s = np.sin(TWO_PI * k)
    out = np.where(k == 0, 0.5, np.pi * k / np.where(k == 0, 1.0, s))
    return float(out) if out.ndim == 0 else out


def mover_quadratic_form(kappa) -> np.ndarray:
    """``|a^L(k)|^2 + |a^R(k)|^2`` as a hermitian form on ``(p+, q)``.

    Uses ``a^L = p+ + (1 - E^{-ik}) q`` and ``a^R = p+ + (1 - E^{ik}) q``.
    """
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    vL = np.stack([np.ones_like(k, dtype=complex), 1 - epow(-k)], axis=-1)
    vR = np.stack([np.ones_like(k, dtype=complex), 1 - epow(k)], axis=-1)
    return sum(np.einsum("ka,kb->kab", v.conj(), v) for v in (vL, vR))


def hampf_consistency(kappa) -> float:
    """Max gap between the two momentum-space forms of the hamiltonian density."""
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    kp, kq = hampf_kernels(k)
    kp, kq = np.atleast_1d(kp), np.atleast_1d(kq)
    lhs = np.atleast_1d(hamiltonian_kernel(k))[:, None, None] * mover_quadratic_form(k)
    rhs = np.pi * np.stack(
        [np.stack([kp + kq / 4, kq / 2], -1), np.stack([kq / 2, kq], -1)], -2
    )
    return float(np.abs(lhs - rhs).max())


def kernel_table_csv(config: KernelConfig) -> str:
    buf = io.StringIO()
    buf.write("s,M_quadrature,M_closed,lambda\n")
    for s in range(config.s_max + 1):
        q = kernel_Ms_quadrature(s, config)
        c = kernel_Ms_closed(s, config)
        buf.write(f"{s},{q:.17g},{c:.17g},{config.lam:.17g}\n")
    return buf.getvalue()


# --- momentum-space commutators -------------------------------------------

@dataclass
class MomentumCommutatorReport:
    L: int
    K: int
    chirality: str
    kappas: np.ndarray
    expected: np.ndarray
    measured: np.ndarray
    measured_raw: np.ndarray
    max_error: float


def momentum_commutator_check(L_ring: int = 4, K: int = 3,
                              chirality=Chirality.LEFT) -> MomentumCommutatorReport:
    """Diagonal of ``[a(k), a(-k)]`` on a small ring against ``-/+ sin(2 pi k) / pi``.

    ``a(k) = L^{-1/2} sum_x E^{-ikx} a(x)``, so the momentum delta becomes a
    Kronecker delta.  Position commutators are read off on the vacuum
    diagonal.  There the edge projector cancels the identity exactly, so the
    edge piece is added back before transforming; ``measured_raw`` keeps
    the uncorrected values.
    """
    from .hilbert import enumerate_basis
    from .phase_map import a_mover_matrix, pair_edge_sign

    chir = Chirality(chirality)
    basis = enumerate_basis(L_ring, K)
    a = [a_mover_matrix(basis, x, chir).entries for x in range(L_ring)]
    vac = basis.index_of(np.zeros(L_ring, dtype=int))
    # c[x, y] = <0|[a(x), a(y)]|0> with and without the edge term restored
    c_raw = np.zeros((L_ring, L_ring), complex)
    c_fix = np.zeros((L_ring, L_ring), complex)
    for x in range(L_ring):
        for y in range(L_ring):
            cxy = a[x][vac] @ a[y][:, vac] - a[y][vac] @ a[x][:, vac]
            c_raw[x, y] = cxy
            fwd = (x + chir.direction) % L_ring
            bwd = (x - chir.direction) % L_ring
            if y in (fwd, bwd):
                sgn = 1.0 if y == fwd else -1.0
                edge = pair_edge_sign(basis, x, y)[vac, vac]
                c_fix[x, y] = cxy + sgn * (1j / TWO_PI) * edge
            else:
                c_fix[x, y] = cxy
    ks = np.arange(L_ring) / L_ring
    ks = np.where(ks > 0.5, ks - 1.0, ks)
    xs = np.arange(L_ring)
    F = epow(-np.outer(ks, xs)) / np.sqrt(L_ring)  # a(k) = sum_x F[k, x] a(x)
    Fm = epow(np.outer(ks, xs)) / np.sqrt(L_ring)  # a(-k)
    meas = np.einsum("kx,ky,xy->k", F, Fm, c_fix)
    raw = np.einsum("kx,ky,xy->k", F, Fm, c_raw)
    sign = -1.0 if chir is Chirality.LEFT else 1.0
    expected = sign * np.sin(TWO_PI * ks) / np.pi
    err = float(np.abs(meas - expected).max())
    return MomentumCommutatorReport(L_ring, K, chir.value, ks, expected, meas, raw, err)


# --- exact position-space algebra ------------------------------------------

def canonical_mover_commutators(L: int = 6, chirality=Chirality.LEFT):
    """Exact ``[a(x), a(y)]`` in units of ``i/2pi`` on a periodic chain.

    Lattice movers are ``a^L(x) = p(x) + q(x) - q(x-1)`` and
    ``a^R(x) = p(x) + q(x) - q(x+1)`` (``p`` the conjugate momentum), with
    ``[q(x), p(y)] = (i/2pi) delta_xy``.  Coefficients are ``Fraction`` so the
    result is exact; returns an ``L x L`` nested list.
    """
    chir = Chirality(chirality)
    d = chir.direction

    def vec(x):
        # (q coefficients, p coefficients)
        q = [Fraction(0)] * L
        p = [Fraction(0)] * L
        p[x % L] += 1
        q[x % L] += 1
        q[(x - d) % L] -= 1
        return q, p

    def bracket(u, v):
        # [sum qu q + pu p, sum qv q + pv p] / (i/2pi) = qu.pv - pu.qv
        (qu, pu), (qv, pv) = u, v
        return sum(a * b for a, b in zip(qu, pv)) - sum(a * b for a, b in zip(pu, qv))

    vs = [vec(x) for x in range(L)]
    return [[bracket(vs[x], vs[y]) for y in range(L)] for x in range(L)]
