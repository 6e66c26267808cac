"""Stability analysis of a double triple-junction partition in the plane."""
from .errors import ConfigError, ConstraintError, DomainError, NumericalError, ShapeError, TJStabError
from .geometry import (
    Leaf,
    PartitionConfig,
    SpineTrace,
    alpha_beta,
    build_config,
    build_dimensionless,
    emit_geometry_svg,
    spine_transform,
    young_residual,
)
from .oracle import DiscretizedProblem, discretize, min_eigenvalue, richardson
from .spectral import StabilityReport, scan_and_verdict
from .variation import VariationSample, constant_variation_screen, constraint_residuals, eval_J

__version__ = "0.1.0"
