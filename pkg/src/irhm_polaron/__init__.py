"""Polaron-frame effective Hamiltonians and Markovian coherence dynamics for the
infinite-range Heisenberg model coupled to local optical phonons."""
from ._kernels import BACKEND
from .analysis import (
    CoherenceSeries,
    EigenLabel,
    coherence_profile,
    irhm_eigenbasis,
    phase_residual,
    two_qubit_polaron_element,
)
from .dynamics import (
    BathSpec,
    TimeGrid,
    Trajectory,
    evolve_exact,
    evolve_markovian,
    finite_eta_integrals,
    first_order_term_check,
    markovian_generator,
    partial_trace_phonons,
)
from .hilbert import (
    BasisIndex,
    CompositeSpace,
    commutator_norm,
    embed_product,
    hcb_lowering,
    phonon_lowering,
)
from .models import (
    HamiltonianSplit,
    ModelParams,
    build_irhm,
    build_split,
    build_total_hamiltonian,
    hcb_excitation_spectrum,
    lf_generator,
    lf_transform,
)
from .perturbation import (
    EffectiveCouplings,
    IdentityReport,
    appendix_a_identity,
    build_h2_closed,
    build_h2_sw,
    build_h3_sw,
    coefficient_scales,
    f1_series,
    f2_series,
    second_order_couplings,
)

__version__ = "0.1.0"
