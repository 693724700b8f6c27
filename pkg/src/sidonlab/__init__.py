"""Exact-arithmetic laboratory for rank-one cutting-and-stacking systems.

The package builds tower constructions symbolically (heights, spacers and
offsets as big integers, widths as rationals), verifies the spacer
disjointness property with an independent brute-force cross-check,
classifies tensor powers by exact threshold arithmetic, traces single
orbits, and computes exact autocorrelation tables with smoothed density
diagnostics.  ``sidonlab.service`` wraps everything in a JSON HTTP API and
``sidonlab.cli`` is a thin client over it.
"""

from ._version import __version__
from .cache import StageCache, cache_from_env
from .classify import (
    AlphaInference,
    BlockFamily,
    ClassificationReport,
    SeriesEvidence,
    block_collapsed_sums,
    classify_power,
    classify_range,
    infer_alpha,
    series_partial_sums,
)
from .construction import (
    Construction,
    ConstructionSpec,
    ExplicitStages,
    StageGeometry,
    StageParams,
    StageRule,
    expand_stage,
    levels_of_base,
    stage_measure,
    tower_heights,
)
from .errors import (
    CacheCorruptionError,
    CapExceededError,
    ClassifyError,
    DigitsExhaustedError,
    LeftMaterializedSpaceError,
    SidonLabError,
    SpecError,
    StageUnavailableError,
    UnstableTableError,
)
from .experiment import (
    ExperimentConfig,
    RunResult,
    TaskSpec,
    mapping_to_config,
    parse_config,
    run_experiment,
)
from .families import (
    OdometerRule,
    SidonBlockRule,
    builtin_spec,
    family_names,
    floor_power,
)
from .orbits import (
    ConstantDigits,
    LevelSet,
    ListDigits,
    OrbitPoint,
    ReturnStatistics,
    SeededDigits,
    ascend,
    digit_rule_from_config,
    inverse_step,
    iterate,
    level_set_measure,
    orbit_count_correlation,
    product_iterate,
    readdress,
    return_statistics,
    same_point,
    step,
)
from .sidon import (
    SidonVerdict,
    brute_force_overlap,
    check_construction,
    check_stage,
    first_failure,
)
from .specfile import (
    canonical_spec_text,
    mapping_to_spec,
    parse_spec,
    spec_sha256,
    spec_to_mapping,
)
from .spectral import (
    CorrelationTable,
    FejerDensity,
    PowerSumTrend,
    SpectralDiagnostics,
    autocorrelation,
    fejer_density,
    level_set_correlation,
    power_sum_trend,
    product_correlations,
    spectral_diagnostics,
)

__all__ = [
    "__version__",
    "AlphaInference",
    "BlockFamily",
    "CacheCorruptionError",
    "CapExceededError",
    "ClassificationReport",
    "ClassifyError",
    "ConstantDigits",
    "Construction",
    "ConstructionSpec",
    "CorrelationTable",
    "DigitsExhaustedError",
    "ExperimentConfig",
    "ExplicitStages",
    "FejerDensity",
    "LeftMaterializedSpaceError",
    "LevelSet",
    "ListDigits",
    "OdometerRule",
    "OrbitPoint",
    "PowerSumTrend",
    "ReturnStatistics",
    "RunResult",
    "SeededDigits",
    "SeriesEvidence",
    "SidonBlockRule",
    "SidonLabError",
    "SidonVerdict",
    "SpecError",
    "SpectralDiagnostics",
    "StageCache",
    "StageGeometry",
    "StageParams",
    "StageRule",
    "StageUnavailableError",
    "TaskSpec",
    "UnstableTableError",
    "ascend",
    "autocorrelation",
    "block_collapsed_sums",
    "brute_force_overlap",
    "builtin_spec",
    "cache_from_env",
    "canonical_spec_text",
    "check_construction",
    "check_stage",
    "classify_power",
    "classify_range",
    "digit_rule_from_config",
    "expand_stage",
    "family_names",
    "fejer_density",
    "first_failure",
    "floor_power",
    "infer_alpha",
    "inverse_step",
    "iterate",
    "level_set_correlation",
    "level_set_measure",
    "levels_of_base",
    "mapping_to_config",
    "mapping_to_spec",
    "orbit_count_correlation",
    "parse_config",
    "parse_spec",
    "power_sum_trend",
    "product_correlations",
    "product_iterate",
    "readdress",
    "return_statistics",
    "run_experiment",
    "same_point",
    "series_partial_sums",
    "spec_sha256",
    "spec_to_mapping",
    "spectral_diagnostics",
    "stage_measure",
    "step",
    "tower_heights",
]
