"""Finite-scale equicontinuity laboratory for symbolic and circle dynamics.

The package measures how much of a ball around a point stays traced together
by the dynamics up to a time horizon, certifies eventual periodicity of
symbol traces, builds Koopman eigenfunctions from periodic base points, and
estimates sensitivity, all against explicit product or Markov measures with
reproducible seeded sampling.
"""

from .core import (
    DEFAULT_ENUMERATION_CAP,
    DISTANCE_ORIGIN_MISMATCH,
    DISTANCE_WINDOW_ONE_MISMATCH,
    ONE_SIDED,
    TWO_SIDED,
    Alphabet,
    CirclePoint,
    Configuration,
    Cylinder,
    agreement_level,
    ball_cylinder,
    cantor_distance,
    circle_distance,
    compare_cylinders,
    count_words,
    iter_words,
    restrict,
    window_cells,
    window_size,
    word_from_str,
    word_to_str,
)
from .errors import (
    AlphabetMismatch,
    ConfigInvalid,
    EnumerationTooLarge,
    EquidynError,
    IncompatibleConfigurations,
    InsufficientRadius,
    NullBall,
    NullCylinder,
    OverlappingBalls,
    UnsupportedSystem,
)
from .measures import (
    BallFamily,
    BernoulliMeasure,
    LebesgueMeasure,
    MarkovMeasure,
    ProductMeasure,
    lebesgue_density_ratio,
    maximal_cylinders,
    measure_from_dict,
    measure_to_dict,
    union_probability,
    vitali_cover,
)
from .orbit import (
    EquicontinuityReport,
    OrbitBallEvent,
    RatioEstimate,
    density_ratio_estimate,
    density_ratio_exact,
    equicontinuity_point_test,
    mu_equicontinuity_report,
    orbit_ball_event,
    orbit_ball_member,
)
from .periodicity import (
    LepClassification,
    LepStatistics,
    PeriodCertificate,
    certificate_holds,
    detect_eventual_period,
    lep_certificate,
    lep_statistics,
    mu_lep_classify,
)
from .rng import derive_seed, pmap, substream
from .sensitivity import (
    DichotomyReport,
    SensitivityEstimate,
    dichotomy_report,
    mu_sensitivity_estimate,
    sensitive_pair_test,
    separation_window,
)
from .spectral import (
    EigenfunctionSpec,
    build_eigenfunction,
    eigenfunction_eval,
    inner_product,
    koopman_residual,
    root_of_unity,
)
from .systems import (
    CARule,
    Odometer,
    Rotation,
    Shift,
    column_trace,
    dependence_radius,
    eca_rule,
    identity_rule,
    shift_as_ca,
    step,
    step_cost,
    system_from_dict,
    system_sided,
    system_to_dict,
    wolfram_number,
)

__version__ = "0.1.0"
