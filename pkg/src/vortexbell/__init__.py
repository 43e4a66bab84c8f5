"""Wigner-function CHSH tests for Laguerre-Gauss vortex beams."""

__version__ = "0.1.0"

from .bell import (
    EXPERIMENT_SETTINGS,
    BellSettings,
    OptimizationResult,
    bell_kernel,
    bell_sum,
    bell_sum_lg10_closed,
    optimize_settings,
    violation_curve,
)
from .errors import VortexBellError
from .interferometer import (
    BellExperimentReport,
    CCDFrame,
    NoiseModel,
    RegionOfInterest,
    displace,
    integrate_roi,
    interfere,
    invert,
    measure_parity,
    run_bell_experiment,
)
from .modes import (
    DEFAULT_GRID,
    BeamSpec,
    Family,
    FieldGrid,
    GridSpec,
    ModeIndex,
    eval_beam,
    eval_hg,
    eval_lg,
    hermite_poly,
    hg,
    laguerre_poly,
    lg,
    sample_grid,
)
from .schmidt import SchmidtDecomposition, decompose_lg, schmidt_coeff, schmidt_decomposition, schmidt_entropy
from .wigner import (
    PhaseSpacePoint,
    marginal_p,
    marginal_x,
    wigner_lg,
    wigner_lg10_closed,
    wigner_numeric,
)
