"""Talbot-effect toolkit: dispersive quantization and fractalization for
two-component systems on the torus."""

__version__ = "0.1.0"

from .dispersion import (
    DispersionQuartet,
    IntegralPolynomial,
    QuantizationVerdict,
    branches,
    delta,
    eval_poly,
    quantization_check,
)
from .fourier import FourierData, RationalTime, riemann_coefficient
from .linear_solver import (
    LinearSolutionSample,
    manakov_linear_part,
    solve_linear_bv,
    solve_riemann_case1,
    solve_riemann_case2,
)
from .spectral_solver import (
    ConservedTriple,
    GridField,
    ManakovState,
    SolverConfig,
    conserved,
    rhs,
    rk4_step,
    simulate,
)
from .analysis import (
    DimensionEstimate,
    QuantizationReport,
    WeylGrowth,
    detect_quantization,
    fourier_tail_exponent,
    minkowski_dimension,
    smoothing_diagnostic,
    weyl_sum_growth,
)
