"""Subspace and DOA estimation from coarsely quantized snapshots.

A numerical library plus a CLI experiment harness: dithered one-bit and
multi-bit quantizers, covariance estimators built on them, leading-eigenspace
extraction, multi-snapshot ESPRIT, and five reproducible Monte-Carlo studies.
"""

from ._version import __version__
from .covariance import (
    CovarianceEstimate,
    OuterProductAccumulator,
    rect_covariance,
    sample_covariance,
    tri_covariance,
)
from .doa import (
    AngleSet,
    DOAResult,
    esprit,
    esprit_from_quantized,
    gen_snapshots,
    matching_distance,
    min_separation,
    vandermonde,
    wrap_dist,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    ResultTable,
    fit_loglog_slope,
    preset,
    run_adversarial,
    run_eigendep_rect,
    run_eigendep_tri,
    run_experiment,
    run_phase_transition,
    run_wellsep_doa,
)
from .linalg import HermitianEig, SVDResult, Tolerances, hermitian_eig, pinv, small_eig, svd
from .quantizers import (
    QuantizedPair,
    QuantizerSpec,
    SnapshotBatch,
    bbit_resolution,
    bits_used,
    direct_round,
    quantize_batch,
    rect_quantize_pair,
    sign_complex,
    sign_real,
    tri_quantize,
    uniform_quantize,
)
from .rng import (
    RngStream,
    haar_orthonormal,
    sample_complex_gaussian,
    sample_complex_uniform,
    sample_triangular,
    sample_uniform,
    setup_stream,
    trial_stream,
)
from .subspace import SubspaceEstimate, leading_eigenspace, sin_theta_dist, subspace_from_quantized

__all__ = [
    "__version__",
    "AngleSet",
    "CovarianceEstimate",
    "DOAResult",
    "ExperimentConfig",
    "HermitianEig",
    "OuterProductAccumulator",
    "QuantizedPair",
    "QuantizerSpec",
    "ResultRow",
    "ResultTable",
    "RngStream",
    "SVDResult",
    "SnapshotBatch",
    "SubspaceEstimate",
    "Tolerances",
    "bbit_resolution",
    "bits_used",
    "direct_round",
    "esprit",
    "esprit_from_quantized",
    "fit_loglog_slope",
    "gen_snapshots",
    "haar_orthonormal",
    "hermitian_eig",
    "leading_eigenspace",
    "matching_distance",
    "min_separation",
    "pinv",
    "preset",
    "quantize_batch",
    "rect_covariance",
    "rect_quantize_pair",
    "run_adversarial",
    "run_eigendep_rect",
    "run_eigendep_tri",
    "run_experiment",
    "run_phase_transition",
    "run_wellsep_doa",
    "sample_complex_gaussian",
    "sample_complex_uniform",
    "sample_covariance",
    "sample_triangular",
    "sample_uniform",
    "setup_stream",
    "sign_complex",
    "sign_real",
    "sin_theta_dist",
    "small_eig",
    "subspace_from_quantized",
    "svd",
    "tri_covariance",
    "tri_quantize",
    "trial_stream",
    "uniform_quantize",
    "vandermonde",
    "wrap_dist",
]
