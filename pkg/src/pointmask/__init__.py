"""Point-annotation to pixel-mask recovery for infrared small targets.

The core algorithm grows a candidate region outward from a single seed
pixel, scoring every prefix of the growth path with an energy that rewards
bright, internally uniform regions and penalizes spatial spread, then
backtracks to the best-scoring prefix. Around that engine the package
provides mask geometry/serialization, evaluation metrics, a synthetic scene
generator with exact ground truth, the theoretical detectability boundary
and its empirical validation, a CLI for batch generation and experiment
sweeps, and an HTTP service backing an interactive annotation UI.
"""

from .raster import Raster, load_raster, local_background_median, unify_polarity
from .mask import Mask, MaskGeometry, mask_geometry
from .growth import (
    GrowthConfig,
    GrowthTrace,
    RegionStats,
    EnergyTerms,
    NoEnergyPeakError,
    energy,
    grow,
    backtrack_mask,
    generate_mask,
    guided_mask,
)
from .metrics import (
    DetectionTally,
    MetricsReport,
    PixelConfusion,
    evaluate_dataset,
    iou,
    match_components,
    miou,
    pd_fa,
)
from .synth import (
    BackgroundSpec,
    EdgeSpec,
    SceneSpec,
    SceneTruth,
    SuiteConfig,
    TargetSpec,
    measure_scr_gamma,
    render,
    suite,
)
from .boundary import (
    BoundaryReport,
    IncrementModel,
    boundary_b,
    bucketed_validation,
    increment_terms,
    proposition1_scan,
    satisfaction_ratio,
)

__all__ = [
    "Raster",
    "load_raster",
    "local_background_median",
    "unify_polarity",
    "Mask",
    "MaskGeometry",
    "mask_geometry",
    "GrowthConfig",
    "GrowthTrace",
    "RegionStats",
    "EnergyTerms",
    "NoEnergyPeakError",
    "energy",
    "grow",
    "backtrack_mask",
    "generate_mask",
    "guided_mask",
    "DetectionTally",
    "MetricsReport",
    "PixelConfusion",
    "evaluate_dataset",
    "iou",
    "match_components",
    "miou",
    "pd_fa",
    "BackgroundSpec",
    "EdgeSpec",
    "SceneSpec",
    "SceneTruth",
    "SuiteConfig",
    "TargetSpec",
    "measure_scr_gamma",
    "render",
    "suite",
    "BoundaryReport",
    "IncrementModel",
    "boundary_b",
    "bucketed_validation",
    "increment_terms",
    "proposition1_scan",
    "satisfaction_ratio",
]

__version__ = "0.1.0"
