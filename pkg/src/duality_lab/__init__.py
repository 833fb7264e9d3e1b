"""Numerical laboratory for the integer cellular automaton and its lattice boson dual."""
from .ca_engine import (
    AutomatonState,
    Chirality,
    InteractionRule,
    MoverField,
    Predicate,
    RingLattice,
    closed_form,
    evolve,
    movers,
    reconstruct_state,
    step_backward,
    step_forward,
    transfer_matrix,
)
from .hilbert import (
    OperatorMatrix,
    TruncatedBasis,
    commutator,
    edge_state,
    enumerate_basis,
    eta_from_series,
    eta_op,
    number_op,
    shift_op,
)
from .phase_map import (
    EtaVector,
    PhasePoint,
    a_mover_matrix,
    a_mover_via_torus,
    edge_orthogonal_projector,
    mover_commutator_defect,
    phi_multisite,
    phi_pair,
    theta,
)
from .qft_kernels import (
    KernelConfig,
    KernelTable,
    divergent_part_coefficient,
    hampf_kernels,
    kernel_Ms_closed,
    kernel_Ms_quadrature,
    momentum_commutator_check,
    smooth_cutoff_factor,
)
from .spectra import (
    SpectralReport,
    build_hamiltonian,
    evolution_consistency_probe,
    hamiltonian_bound_check,
    sawtooth_hamiltonian,
)

__version__ = "0.1.0"
