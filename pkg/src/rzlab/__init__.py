"""Expected real zeros of random algebraic polynomials with dependent,
growing-variance Gaussian coefficients: exact Kac-Rice style quadrature,
Monte Carlo root counting, and growth-law comparison."""

from .asymptotics import CLAIMS, InsufficientPoints, SlopeFit, fit_slope, predict
from .integrator import (DEFAULT_TOL, ExpectedZeroReport, IntervalResult,
                         PartitionDegenerate, PartitionScheme, breakpoints,
                         epsilon_of, eta_of, expected_zeros, integrate_interval)
from .model import (KINDS, CovarianceMatrix, FactorizationFailure, ModelSpec,
                    UnsupportedKind, ValidityReport, build_covariance, cholesky,
                    reverse_model, validate)
from .moments import (DIAGNOSTIC_POINTS, MomentPoint, NearPole, OverflowRisk,
                      closedform_a2, closedform_c, discrepancy_report,
                      integrand_approx, moments_direct, moments_fast)
from .simulator import (DEFAULT_INTERVALS, DegenerateInput, SampleConfig,
                        ZeroCountEstimate, count_real_roots, real_roots,
                        run_simulation, sample_coefficients, stream_rng)

__version__ = "0.1.0"

__all__ = [
    "CLAIMS", "DEFAULT_INTERVALS", "DEFAULT_TOL", "DIAGNOSTIC_POINTS", "KINDS",
    "CovarianceMatrix", "DegenerateInput", "ExpectedZeroReport",
    "FactorizationFailure", "InsufficientPoints", "IntervalResult",
    "ModelSpec", "MomentPoint", "NearPole", "OverflowRisk",
    "PartitionDegenerate", "PartitionScheme", "SampleConfig", "SlopeFit",
    "UnsupportedKind", "ValidityReport", "ZeroCountEstimate",
    "breakpoints", "build_covariance", "cholesky", "closedform_a2",
    "closedform_c", "count_real_roots", "discrepancy_report", "epsilon_of",
    "eta_of", "expected_zeros", "fit_slope", "integrand_approx",
    "integrate_interval", "moments_direct", "moments_fast", "predict",
    "real_roots", "reverse_model", "run_simulation", "sample_coefficients",
    "stream_rng", "validate",
]
