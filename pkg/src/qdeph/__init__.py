"""Pure-dephasing dynamics of a qubit coupled to a bosonic bath.

Library layout:

- spectral: spectral density and oscillatory quadrature over [0, inf)
- kernels: memory kernels and decoherence transforms of the spectral density
- model: qubit-bath parameters, closed-form coherence and its exponents
- solver: product-integration solver for the full kinetic equation
- cli: config-driven command line runner (trace / figure / sweep / compare)
"""

from .spectral import (
    QuadratureConfig,
    QuadratureError,
    SpectralDensity,
    integrate_oscillatory,
)
from .kernels import (
    KernelTable,
    build_kernel_table,
    big_f,
    decoherence_rate,
    drive,
    gamma_th,
    gamma_vac,
    kernel_cos_th,
    kernel_sin,
    phi,
)
from .model import (
    DecoherenceBreakdown,
    QubitBathParams,
    a_init,
    breakdown,
    breakdown_grid,
    exact_correlational_decoherence,
    gamma_cor,
    gamma_cor_exact,
    ma_coherence,
    phase_shift,
    renorm_chi,
    renorm_gamma,
    renorm_gamma_cor,
)
from .solver import (
    CoherenceTrajectory,
    SolverConfig,
    SolverError,
    TrajectoryDeviation,
    compare_trajectories,
    history_difference_term,
    solve_full_equation,
    solve_generic_volterra,
)

__version__ = "0.1.0"

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "SpectralDensity",
    "integrate_oscillatory",
    "KernelTable",
    "build_kernel_table",
    "big_f",
    "decoherence_rate",
    "drive",
    "gamma_th",
    "gamma_vac",
    "kernel_cos_th",
    "kernel_sin",
    "phi",
    "DecoherenceBreakdown",
    "QubitBathParams",
    "a_init",
    "breakdown",
    "breakdown_grid",
    "exact_correlational_decoherence",
    "gamma_cor",
    "gamma_cor_exact",
    "ma_coherence",
    "phase_shift",
    "renorm_chi",
    "renorm_gamma",
    "renorm_gamma_cor",
    "CoherenceTrajectory",
    "SolverConfig",
    "SolverError",
    "TrajectoryDeviation",
    "compare_trajectories",
    "history_difference_term",
    "solve_full_equation",
    "solve_generic_volterra",
    "__version__",
]
