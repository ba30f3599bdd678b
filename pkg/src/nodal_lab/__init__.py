"""Numerical laboratory for nodal sets of model Laplace eigenfunctions.

Exact eigenfunctions on the model manifolds (circle, flat tori, round sphere);
level-set extraction with gradient-weighted surface integrals; residual
checks for the integral identities relating nodal data to volume
integrals; and norm scans that reproduce the expected growth exponents.
"""

from .asymptotics import (
    FAMILIES,
    BoundCheck,
    BoundReport,
    ExponentFit,
    NormRecord,
    fit_exponent,
    grad_sup,
    lp_norm,
    scan_family,
    verify_bounds,
)
from .geometry import (
    TWO_PI,
    ManifoldDescriptor,
    QuadratureGrid,
    build_grid,
    circle,
    flat_torus,
    integrate,
    manifold_from_name,
    pairwise_sum,
    sphere,
)
from .identities import (
    ConvergenceReport,
    IdentityReport,
    check_abs_pair_symmetry,
    check_coarea,
    check_level_corollary,
    check_level_identity,
    check_localized_identity,
    check_multiplicity_orthogonality,
    check_nodal_identity,
    check_pair_identity,
    check_weighted_identity,
    convergence_study,
)
from .levelset import (
    ExtractionConfig,
    LevelSetMesh,
    extract,
    hausdorff_measure,
    surface_integral,
    weighted_gradient_integral,
)
from .spectra import (
    EigenMode,
    ModeExpansion,
    TestFunction,
    apply_helmholtz,
    bump_test_function,
    circle_mode,
    constant_test_function,
    mode_expansion,
    sectoral_harmonic,
    test_function_from_mode,
    torus_mode,
    zonal_harmonic,
)

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "TWO_PI",
    "BoundCheck",
    "BoundReport",
    "ConvergenceReport",
    "EigenMode",
    "ExponentFit",
    "ExtractionConfig",
    "IdentityReport",
    "LevelSetMesh",
    "ManifoldDescriptor",
    "ModeExpansion",
    "NormRecord",
    "QuadratureGrid",
    "TestFunction",
    "apply_helmholtz",
    "build_grid",
    "bump_test_function",
    "check_abs_pair_symmetry",
    "check_coarea",
    "check_level_corollary",
    "check_level_identity",
    "check_localized_identity",
    "check_multiplicity_orthogonality",
    "check_nodal_identity",
    "check_pair_identity",
    "check_weighted_identity",
    "circle",
    "circle_mode",
    "constant_test_function",
    "convergence_study",
    "extract",
    "fit_exponent",
    "flat_torus",
    "grad_sup",
    "hausdorff_measure",
    "integrate",
    "lp_norm",
    "manifold_from_name",
    "mode_expansion",
    "pairwise_sum",
    "scan_family",
    "sectoral_harmonic",
    "sphere",
    "surface_integral",
    "test_function_from_mode",
    "torus_mode",
    "verify_bounds",
    "weighted_gradient_integral",
    "zonal_harmonic",
]
