"""Dyadic digit-set fractals with box/Assouad/capacity dimension estimators
and orthogonal projection experiments."""

from .core import PointCloud, ScaleSchedule, SlopeFit, Subspace, fit_slope
from .digitsets import (
    DigitSet,
    DensityReport,
    analytic_dims,
    densities,
    enumerate_cloud,
    exact_count,
    explicit_set,
    log2_exact_count,
    periodic_set,
    sharpness_set,
)
from .covering import (
    assouad_estimate,
    assouad_spectrum_estimate,
    box_count,
    box_dim_estimate,
    local_count,
    quasi_assouad_estimate,
    separated_set,
)
from .capacity import (
    DiscreteMeasure,
    bound_formulas,
    capacity,
    energy,
    kernel_phi,
    min_energy,
    profile_estimate,
    proof_measure_bound,
    region_curve,
)
from .projection import (
    project,
    project_count,
    projection_experiment,
    sample_subspace,
)
from .errors import InvalidInputError, SizeLimitError

__version__ = "0.1.0"
