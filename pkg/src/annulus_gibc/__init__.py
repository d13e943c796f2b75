"""Electrostatic imaging of a coated circular inclusion.

The package covers the full chain: series solution of the annulus problem
with a second-order impedance condition on the inner circle, assembly of the
boundary gap operator, factorization-style sampling indicators for recovering
the inclusion, and a linear least-squares step recovering the impedance
coefficients from Cauchy data.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND, HAS_NUMBA
from .forward import (
    AnnulusConfig,
    HarmonicCoefficients,
    ImpedancePair,
    energy_identity_residual,
    evaluate_potential,
    fd_solve,
    gap_kernel,
    kernel_weight,
    sigma_0,
    sigma_n,
    solve_defective,
    trace_current_defective,
    trace_current_healthy,
)
from .fourier import (
    FourierCoefficients,
    PeriodicGridFunction,
    analyze,
    boundary_l2_norm,
    grid_angles,
    single_mode,
    synthesize,
)
from .gap_operator import (
    GapMatrix,
    NoiseSpec,
    apply_noise,
    assemble_gap_matrix,
    export_gap_matrix_csv,
    hermitian_imag,
    load_gap_matrix,
    psd_sqrt,
    save_gap_matrix,
)
from .impedance import (
    BasisSet,
    CauchyPair,
    add_current_noise,
    assemble_impedance_system,
    complete_data,
    constant_basis,
    read_cauchy_csv,
    recover_constants,
    recover_varying,
    synthesize_cauchy_pair,
    trace_on_gamma0,
    write_cauchy_csv,
)
from .sampling import (
    IndicatorGrid,
    SamplingGrid,
    extract_level_set,
    indicator_P,
    indicator_W,
    make_lattice_grid,
    morozov_alpha,
    poisson_rhs,
    solve_cutoff,
    tikhonov_solve,
)

__all__ = [
    "__version__",
    "BACKEND",
    "HAS_NUMBA",
    "AnnulusConfig",
    "HarmonicCoefficients",
    "ImpedancePair",
    "energy_identity_residual",
    "evaluate_potential",
    "fd_solve",
    "gap_kernel",
    "kernel_weight",
    "sigma_0",
    "sigma_n",
    "solve_defective",
    "trace_current_defective",
    "trace_current_healthy",
    "FourierCoefficients",
    "PeriodicGridFunction",
    "analyze",
    "boundary_l2_norm",
    "grid_angles",
    "single_mode",
    "synthesize",
    "GapMatrix",
    "NoiseSpec",
    "apply_noise",
    "assemble_gap_matrix",
    "export_gap_matrix_csv",
    "hermitian_imag",
    "load_gap_matrix",
    "psd_sqrt",
    "save_gap_matrix",
    "BasisSet",
    "CauchyPair",
    "add_current_noise",
    "assemble_impedance_system",
    "complete_data",
    "constant_basis",
    "read_cauchy_csv",
    "recover_constants",
    "recover_varying",
    "synthesize_cauchy_pair",
    "trace_on_gamma0",
    "write_cauchy_csv",
    "IndicatorGrid",
    "SamplingGrid",
    "extract_level_set",
    "indicator_P",
    "indicator_W",
    "make_lattice_grid",
    "morozov_alpha",
    "poisson_rhs",
    "solve_cutoff",
    "tikhonov_solve",
]
