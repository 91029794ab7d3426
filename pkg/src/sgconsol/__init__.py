"""Spectral pencil solver for one-dimensional second-gradient
poroelastic consolidation."""

from .errors import (
    ConfigError,
    CriticalPrestress,
    DegenerateBasis,
    InsufficientBracket,
    MismatchedParams,
    NoSignChange,
    NotAnEigenvalue,
    PositivityViolation,
    SolverError,
    SpectrumExhausted,
    StabilityError,
    UndeterminedConstant,
    WeightsUnresolvable,
)
from .expansion import (
    BilinearWeights,
    GramReport,
    fourier_coefficients,
    gram_report,
    inner,
    pair_integral,
    resolve_weights,
    truncation_order,
)
from .fields import (
    CriticalReport,
    ProfileTable,
    SolutionField,
    boundary_residuals,
    initial_value,
    reconstruct_mf,
    reconstruct_strain,
    solve,
    solve_critical,
    stationary_solution,
)
from .material import (
    DimensionlessGroups,
    MaterialParams,
    PencilCoefficients,
    Regime,
    classify_regime,
    coefficients_for,
    compute_coefficients,
    derive_dimensionless,
)
from .pencil import (
    BoundaryMatrix,
    CharRoots,
    Eigenpair,
    SearchWindow,
    boundary_matrix,
    characteristic_roots,
    determinant,
    eigenfunction,
    eval_eigenfunction,
    find_eigenvalues,
)
from .sweep import SweepResult, first_rate, sweep, threshold
from .terzaghi import (
    CompareRecord,
    TerzaghiParams,
    compare,
    terzaghi_fd_oracle,
    terzaghi_series,
)

__version__ = "0.1.0"
