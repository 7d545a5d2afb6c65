"""Quantum state transfer through spin chains in the single-excitation subspace."""

from .chains import (
    EngineeredChainSpec,
    ParabolicChainSpec,
    TridiagonalOperator,
    build_engineered_couplings,
    build_engineered_hamiltonian,
    build_parabolic_field,
    build_parabolic_hamiltonian,
    engineered_spectrum_formula,
    is_mirror_symmetric,
    uniform_chain,
)
from .dynamics import (
    FidelityCurve,
    evolve,
    fidelity,
    fidelity_curve,
    mirror_reflect,
    site_state,
    verify_parity_evolution,
)
from .spectral import (
    EigenSystem,
    SpectralError,
    SpmcReport,
    approximate_gap_gcd,
    certify,
    check_spmc,
    classify_parities,
    diagonalize,
    eigenvector_by_recursion,
)
from .transfer import (
    GaussianSpec,
    SweepConfig,
    SweepResult,
    analytic_fidelity,
    gaussian_state,
    optimize_lambda,
    transfer_report,
)

__version__ = "0.1.0"
