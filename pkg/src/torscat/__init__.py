"""Spectral and moment statistics of point scatterers on irrational rectangular tori."""

from .errors import (
    CapExceededError,
    ConfigError,
    InsufficientSampleError,
    NonBracketingError,
    NormCollisionError,
    PreconditionError,
    SingularEigenvalue,
    TorscatError,
    ValidationError,
    WindowCapExceeded,
    WindowError,
)
from .lattice import (
    ClassTable,
    LatticeVector,
    NormClass,
    TorusGeometry,
    class_table,
    count_in_unit_window,
    enumerate_window,
    inner,
    norm_classes,
    norm_sq,
    window_arrays,
)
from .spectrum import (
    InterlacingSequence,
    distinct_eigenvalues,
    load_interlacing_csv,
    midpoint_interlacing,
    secular_interlacing,
    verify_interlacing,
)
from .sieve import (
    Classification,
    SieveParams,
    bad_count_per_zeta,
    bad_density,
    classify,
    classify_sweep,
    half_width,
    in_S_zeta,
    trivial_solutions_check,
    trivial_solutions_only,
    verify_spacing,
    zeta_candidates,
)
from .greens import (
    CoefficientMap,
    cauchy_l4_rate,
    coefficients_annulus,
    coefficients_disk,
    custom_map,
    evaluate_grid,
    exact_grid_size,
    grid_mean_power,
    grid_size_for_power,
    l2_norm_sq,
    l2_tail,
    tail_exponent_43,
)
from .moments import (
    MomentReport,
    ValueDistribution,
    l4_bruteforce,
    l4_closed_form,
    l4_quadrature,
    moment_stability,
    near_spectrum_stats,
    normalized_fourth_moment,
    report_from_map,
    subsequence_filter,
    value_distribution,
)
from .dirichlet import (
    DirichletCoefficientMap,
    ScattererPosition,
    bad_positions,
    coefficients_dirichlet,
    default_position,
    dirichlet_moment_report,
    dirichlet_value_distribution,
    evaluate_rect,
    evaluate_rect_exponential,
    psi,
    r_weighted,
)
from .config import RunConfig, load_config
from .sweep import run_sweep

__version__ = "0.1.0"
