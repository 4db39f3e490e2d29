"""Coefficient-dependence models and their covariance algebra.

A model is a mean-zero Gaussian coefficient vector (a_0, ..., a_{n-1})
with Var(a_i) = sigma^(2i) and a lag-dependent correlation r(|i-j|):

    independent      r(d) = 0
    constant_corr    r(d) = rho
    geometric_pos    r(d) = rho^d
    geometric_neg    r(d) = -rho^d     (every cross-correlation negative)

Positive definiteness is never assumed from a rho range: `validate`
checks an actual factorization and reports the verdict, so the usual
parameter restrictions (e.g. rho < 1/3 for geometric_neg) are
observable rather than baked in.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_solve, toeplitz

KINDS = ("independent", "constant_corr", "geometric_pos", "geometric_neg")

# Exact dense eigensolve below this dimension; estimates above.
_EXACT_EIG_DIM = 2048


class FactorizationFailure(Exception):
    """Cholesky factorization hit a nonpositive pivot."""


class UnsupportedKind(Exception):
    """Model kind not recognized by this operation."""


@dataclass(frozen=True)
class ModelSpec:
    """Ensemble definition: dependence kind, size n, growth base sigma, correlation rho."""

    kind: str
    n: int
    sigma: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")
        if not (math.isfinite(self.rho) and self.rho >= 0):
            raise ValueError(f"rho must be finite and >= 0, got {self.rho!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": int(self.n), "sigma": float(self.sigma),
                "rho": float(self.rho)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(kind=d["kind"], n=int(d["n"]), sigma=float(d.get("sigma", 1.0)),
                   rho=float(d.get("rho", 0.0)))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Dense symmetric coefficient covariance, optionally Cholesky-factored."""

    dim: int
    entries: np.ndarray
    chol: Optional[np.ndarray] = None
    min_eigenvalue_estimate: Optional[float] = None


@dataclass(frozen=True)
class ValidityReport:
    is_positive_definite: bool
    min_eigenvalue_estimate: float

    def to_dict(self) -> dict:
        return {"is_positive_definite": bool(self.is_positive_definite),
                "min_eigenvalue_estimate": float(self.min_eigenvalue_estimate)}


def lag_correlations(spec: ModelSpec, n_lags: Optional[int] = None) -> np.ndarray:
    """Correlation r(d) for lags d = 0..n_lags-1, with r(0) = 1."""
    m = spec.n if n_lags is None else n_lags
    d = np.arange(m)
    if spec.kind == "independent":
        r = np.zeros(m)
    elif spec.kind == "constant_corr":
        r = np.full(m, spec.rho)
    elif spec.kind == "geometric_pos":
        r = spec.rho ** d.astype(float)
    elif spec.kind == "geometric_neg":
        r = -(spec.rho ** d.astype(float))
    else:  # unreachable for validated specs
        raise UnsupportedKind(spec.kind)
    if m > 0:
        r[0] = 1.0
    return r


def build_covariance(spec: ModelSpec) -> CovarianceMatrix:
    """Dense covariance Cov(a_i, a_j) = r(|i-j|) * sigma^(i+j).

    Entries grow as sigma^(2i); for sigma > 1 and very large n they can
    exceed double range. The moment/integration paths never build this
    matrix (they work in u = sigma*x coordinates) and the sampler uses
    the unit-variance congruent model, so only explicit dense use is
    affected.
    """
    n = spec.n
    r = lag_correlations(spec)
    scale = spec.sigma ** np.arange(n, dtype=float)
    entries = toeplitz(r) * np.outer(scale, scale)
    entries.setflags(write=False)
    return CovarianceMatrix(dim=n, entries=entries)


def _min_eig_estimate_pd(entries: np.ndarray, chol: np.ndarray) -> float:
    # Inverse power iteration through the existing factor; cheap estimate
    # for dimensions where a full eigensolve is too expensive.
    rng = np.random.default_rng(0)
    v = rng.standard_normal(entries.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(30):
        w = cho_solve((chol, True), v)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            break
        v = w / nw
    return float(v @ (entries @ v))


def _gershgorin_min(entries: np.ndarray) -> float:
    diag = np.diag(entries)
    radii = np.abs(entries).sum(axis=1) - np.abs(diag)
    return float(np.min(diag - radii))


def validate(cov: CovarianceMatrix) -> ValidityReport:
    """Positive-definiteness verdict plus a smallest-eigenvalue estimate.

    The verdict is factorization-based: all Cholesky pivots must exceed
    dim * machine_eps * max(diagonal). Diagonal matrices short-circuit
    (pivots are the diagonal itself).
    """
    a = cov.entries
    if not np.all(np.isfinite(a)):
        raise ValueError("covariance has non-finite entries; build the congruent "
                         "sigma=1 model instead (definiteness is preserved)")
    diag = np.diag(a)
    pivot_floor = cov.dim * np.finfo(float).eps * float(np.max(diag))
    if np.count_nonzero(a - np.diag(diag)) == 0:
        min_eig = float(np.min(diag))
        return ValidityReport(min_eig > pivot_floor, min_eig)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        if cov.dim <= _EXACT_EIG_DIM:
            min_eig = float(np.linalg.eigvalsh(a)[0])
        else:
            min_eig = _gershgorin_min(a)
        return ValidityReport(False, min_eig)
    pivots = np.diag(chol) ** 2
    is_pd = bool(np.min(pivots) > pivot_floor)
    if cov.dim <= _EXACT_EIG_DIM:
        min_eig = float(np.linalg.eigvalsh(a)[0])
    else:
        min_eig = _min_eig_estimate_pd(a, chol)
    return ValidityReport(is_pd, min_eig)


def cholesky(cov: CovarianceMatrix) -> CovarianceMatrix:
    """Return a copy of `cov` with the lower-triangular factor attached.

    Raises FactorizationFailure if a pivot <= 0 is encountered (the
    matrix is indefinite or too ill-conditioned to factor).
    """
    try:
        chol = np.linalg.cholesky(cov.entries)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(f"cholesky failed for dim={cov.dim}: {exc}") from exc
    chol.setflags(write=False)
    return dataclasses.replace(cov, chol=chol)


def reverse_model(spec: ModelSpec) -> tuple[ModelSpec, float]:
    """Index-reversal transform a_i -> a_{n-1-i}, as a model.

    The reversed coefficients have variances sigma^(2(n-1-i)) =
    sigma^(2(n-1)) * (1/sigma)^(2i), and |i-j| is reversal-invariant, so
    the reversed covariance equals c * Cov(spec') with spec' = spec at
    sigma' = 1/sigma and c = sigma^(2(n-1)). Every supported correlation
    structure depends on |i-j| only, hence is reversal-invariant.

    The scale c is a plain float and overflows for extreme n*ln(sigma);
    nothing in the integration path consumes it (the expected-zero
    integrand is scale-free).
    """
    if spec.kind not in KINDS:
        raise UnsupportedKind(spec.kind)
    reversed_spec = dataclasses.replace(spec, sigma=1.0 / spec.sigma)
    try:
        scale = spec.sigma ** (2 * (spec.n - 1))
    except OverflowError:
        scale = math.inf
    return reversed_spec, scale
