"""Coherence of signal spaces, identifiability from random coordinate
samples, and Monte Carlo verification of sampling-rate bounds."""

from ._version import __version__
from .flats import (
    Flat,
    coherence_of_flat,
    leverage_scores,
    make_flat,
    max_incoherent_flat,
    read_flat,
    write_flat,
)
from .linalg import grassmann_distance, orthonormal_columns, principal_angles
from .sampling import (
    RNG_NAME,
    LinearMeasurement,
    SampleMask,
    draw_mask,
    generic_linear_map,
    philox,
    project,
)
from .varieties import (
    CayleyMenger,
    CoherenceEstimate,
    FormulaValue,
    Linear,
    LowRank,
    MinkowskiSum,
    Point,
    RankDeficientTangent,
    SymLowRank,
    UnitDiagGram,
    coherence_at,
    coherence_formula,
    dimension,
    embed,
    estimate_coherence,
    matrix_coherence,
    nu_h,
    parse_model,
    point_on,
    sample_generic_point,
    tangent_leverage,
    tangent_limit_probe,
    tangent_space,
    tight_frame_point,
)
from .identify import (
    DEFAULT_TOL,
    IdentifyVerdict,
    contraction_norm,
    identifiable_linear,
    identifiable_mask,
    restricted_rank,
)
from .experiment import (
    RudelsonRow,
    SweepConfig,
    SweepRecord,
    ThresholdEstimate,
    coupon_reference,
    estimate_threshold,
    laman_brute_oracle,
    read_csv,
    rudelson_probe,
    run_sweep,
    theoretical_rate,
    wilson_interval,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
