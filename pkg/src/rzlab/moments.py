"""Pointwise second moments of the random polynomial and its derivative.

For P(x) = sum_i a_i x^i with coefficient covariance Cov(a_i, a_j) =
r(|i-j|) sigma^(i+j), the quantities

    a2 = Var P(x),   b2 = Var P'(x),   c = Cov(P(x), P'(x)),
    delta2 = a2*b2 - c^2,

determine the expected-real-zero density  sqrt(delta2) / (pi * a2).
Everything is evaluated in u = sigma*x coordinates: with Q the
unit-variance companion model, a2(x) = a2_Q(u), b2(x) = sigma^2 b2_Q(u),
c(x) = sigma c_Q(u), which keeps magnitudes bounded for |u| <= 1.

`moments_direct` is the normative evaluator (dense pairwise summation).
`moments_fast` is contract-identical at O(n) per point. The closed-form
and off-peak approximate evaluators are diagnostics: transcriptions of
algebra that is cross-checked against the exact sums, never trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import lfilter

from .model import ModelSpec, lag_correlations

_POLE_TOL = 1e-6


class OverflowRisk(Exception):
    """|sigma*x| too large for safe direct summation; use the reversal path."""


class NearPole(Exception):
    """A closed-form denominator is within 1e-6 of zero."""


@dataclass(frozen=True)
class MomentPoint:
    x: float
    u: float
    a2: float
    b2: float
    c: float
    delta2: float
    integrand: float

    def to_dict(self) -> dict:
        return {"x": self.x, "u": self.u, "a2": self.a2, "b2": self.b2,
                "c": self.c, "delta2": self.delta2, "integrand": self.integrand}


def _guard_overflow(n: int, u: float) -> None:
    # u^(2n) stays below e^128 under this bound; beyond it the caller
    # must integrate the reversed model instead.
    if n > 256 and abs(u) > 1.0 + 64.0 / n:
        raise OverflowRisk(
            f"|sigma*x| = {abs(u):.6g} exceeds 1 + 64/n for n = {n}; "
            "evaluate through the index-reversed model")


def _power_vectors(n: int, u: float) -> tuple[np.ndarray, np.ndarray]:
    # pw[i] = u^i, dv[i] = i*u^(i-1); the i=0 derivative entry is 0 by
    # its coefficient, never an evaluated negative power.
    pw = u ** np.arange(n, dtype=float)
    dv = np.zeros(n)
    if n > 1:
        dv[1:] = np.arange(1, n, dtype=float) * pw[:-1]
    return pw, dv


def _finish(spec: ModelSpec, x: float, u: float,
            a2u: float, b2u: float, cu: float) -> MomentPoint:
    a2 = float(a2u)
    b2 = float(spec.sigma ** 2 * b2u)
    c = float(spec.sigma * cu)
    if not a2 > 0.0:
        raise ValueError(f"nonpositive variance a2={a2:.6g}; model is not a valid "
                         "(positive definite) Gaussian ensemble at this point")
    delta2 = a2 * b2 - c * c
    integrand = math.sqrt(max(delta2, 0.0)) / (math.pi * a2)
    return MomentPoint(x=float(x), u=float(u), a2=a2, b2=b2, c=c,
                       delta2=float(delta2), integrand=integrand)


def moments_direct(spec: ModelSpec, x: float) -> MomentPoint:
    """Reference evaluator: dense pairwise summation over all (i, j).

    a2 = sum_{i,j} r_{ij} u^{i+j},  b2u = sum_{i,j} i j r_{ij} u^{i+j-2},
    cu = sum_{i,j} j r_{ij} u^{i+j-1}, with r_{ii} = 1 and the signed
    off-diagonal correlation of the model; then b2 = sigma^2 b2u and
    c = sigma cu. Cost O(n^2) time and memory per point.
    """
    n = spec.n
    u = spec.sigma * x
    _guard_overflow(n, u)
    pw, dv = _power_vectors(n, u)
    corr = toeplitz(lag_correlations(spec))
    a2u = pw @ corr @ pw
    b2u = dv @ corr @ dv
    cu = pw @ corr @ dv
    return _finish(spec, x, u, a2u, b2u, cu)


def _geometric_cross_sums(n: int, rho: float, u: float,
                          pw: np.ndarray, dv: np.ndarray) -> tuple[float, float, float]:
    # s[i] = sum_{j<i} rho^(i-j) u^j       via s[i] = rho*(s[i-1] + u^(i-1))
    # t[i] = sum_{j<i} j rho^(i-j) u^(j-1) via t[i] = rho*(t[i-1] + (i-1)u^(i-2))
    xs = np.zeros(n)
    xs[1:] = pw[:-1]
    xt = np.zeros(n)
    if n > 2:
        xt[2:] = np.arange(1, n - 1, dtype=float) * pw[:n - 2]
    s = lfilter([rho], [1.0, -rho], xs)
    t = lfilter([rho], [1.0, -rho], xt)
    ta = 2.0 * float(pw @ s)
    tb = 2.0 * float(dv @ t)
    tc = float(pw @ t) + float(dv @ s)
    return ta, tb, tc


def moments_fast(spec: ModelSpec, x: float) -> MomentPoint:
    """O(n) evaluator, contract-identical to `moments_direct`.

    Geometric kinds use first-order prefix recursions over the lag
    kernel; constant correlation uses products of the one-index sums.
    """
    n = spec.n
    u = spec.sigma * x
    _guard_overflow(n, u)
    pw, dv = _power_vectors(n, u)
    da = float(pw @ pw)
    db = float(dv @ dv)
    dc = float(pw @ dv)
    geometric = spec.kind in ("geometric_pos", "geometric_neg")
    if spec.kind == "independent" or (geometric and spec.rho == 0.0):
        return _finish(spec, x, u, da, db, dc)
    if spec.kind == "constant_corr":
        s1 = float(np.sum(pw))
        s2 = float(np.sum(dv))
        a2u = da + spec.rho * (s1 * s1 - da)
        b2u = db + spec.rho * (s2 * s2 - db)
        cu = dc + spec.rho * (s1 * s2 - dc)
        return _finish(spec, x, u, a2u, b2u, cu)
    ta, tb, tc = _geometric_cross_sums(n, spec.rho, u, pw, dv)
    sign = -1.0 if spec.kind == "geometric_neg" else 1.0
    return _finish(spec, x, u, da + sign * ta, db + sign * tb, dc + sign * tc)


def _require_geometric_neg(spec: ModelSpec, name: str) -> None:
    if spec.kind != "geometric_neg":
        raise ValueError(f"{name} is defined for the geometric_neg kind only")


def _check_poles(u: float, rho: float, denoms: dict[str, float]) -> None:
    for label, value in denoms.items():
        if abs(value) < _POLE_TOL:
            raise NearPole(f"denominator {label} = {value:.3e} within {_POLE_TOL:g} "
                           f"of zero at u = {u:.6g}, rho = {rho:.6g}")


def closedform_a2(spec: ModelSpec, x: float) -> float:
    """Transcribed closed form for a2 (geometric_neg). Diagnostic only:
    its deviation from `moments_direct` is reported by
    `discrepancy_report`, not assumed zero."""
    _require_geometric_neg(spec, "closedform_a2")
    n, rho = spec.n, spec.rho
    u = spec.sigma * x
    _check_poles(u, rho, {"rho-u": rho - u, "1-rho*u": 1.0 - rho * u,
                          "1-u^2": 1.0 - u * u})
    ru = rho * u
    t1 = (1.0 - u ** (2 * n)) / (1.0 - u * u)
    t2 = -rho * (ru - ru ** n) / ((rho - u) * (1.0 - ru))
    t3 = rho * (u ** 2 - u ** (2 * n)) / ((rho - u) * (1.0 - u * u))
    t4 = -ru * (1.0 - u ** (2 * n - 2)) / ((1.0 - ru) * (1.0 - u * u))
    t5 = rho ** 2 * u ** n * (rho ** (n - 1) - u ** (n - 1)) / ((rho - u) * (1.0 - ru))
    return float(t1 + t2 + t3 + t4 + t5)


def closedform_c(spec: ModelSpec, x: float) -> float:
    """Transcribed closed form for c (geometric_neg). Diagnostic only."""
    _require_geometric_neg(spec, "closedform_c")
    n, rho, sigma = spec.n, spec.rho, spec.sigma
    u = sigma * x
    _check_poles(u, rho, {"rho-u": rho - u, "1-rho*u": 1.0 - rho * u,
                          "1-u^2": 1.0 - u * u})
    ru = rho * u
    one_u2 = 1.0 - u * u
    # Shared bracket u - u^(2n+1) - n u^(2n-1) + n u^(2n+1).
    br = u - u ** (2 * n + 1) - n * u ** (2 * n - 1) + n * u ** (2 * n + 1)
    c1 = br / one_u2 ** 2
    c2 = -rho * (rho - n * rho ** n * u ** (n - 1)
                 + (n - 1) * rho ** (n + 1) * u ** n) / ((rho - u) * (1.0 - ru) ** 2)
    c3 = rho * br / ((rho - u) * one_u2 ** 2)
    c4 = -ru * (u - u ** (2 * n - 1) + (n - 1) * u ** (2 * n - 1)
                - (n - 1) * u ** (2 * n - 3)) / ((1.0 - ru) * one_u2 ** 2)
    c5 = rho ** 2 * u ** n * (rho ** (n - 1) - u ** (n - 1) + (n - 1) * u ** (n - 1)
                              - (n - 1) * rho * u ** (n - 2)) / ((1.0 - ru) * (rho - u) ** 2)
    return float(sigma * (c1 + c2 + c3 + c4 + c5))


def integrand_approx(spec: ModelSpec, x: float) -> float:
    """Transcribed off-peak approximation of the zero density (geometric_neg,
    0 <= u <= 1 - epsilon regime). Diagnostic only."""
    from .integrator import PartitionDegenerate, epsilon_of

    _require_geometric_neg(spec, "integrand_approx")
    rho, sigma = spec.rho, spec.sigma
    u = sigma * x
    try:
        eps = epsilon_of(spec.n)
    except PartitionDegenerate:
        eps = 0.0
    if not 0.0 <= u <= 1.0 - eps:
        raise ValueError(f"u = {u:.6g} outside the off-peak regime [0, {1.0 - eps:.6g}]")
    _check_poles(u, rho, {"rho-u": rho - u, "1-rho*u": 1.0 - rho * u,
                          "1-u^2": 1.0 - u * u, "1-3*rho*u": 1.0 - 3.0 * rho * u})
    ru = rho * u
    u2 = u * u
    k_num1 = ((1.0 + u2) * (1.0 - ru)
              * (2.0 * rho * sigma ** 2 * (1.0 + u2) - x * sigma ** 2 * (1.0 + 3.0 * rho ** 2))
              - rho * sigma ** 2 * (1.0 - u2) ** 2 * (1.0 + ru))
    k1 = k_num1 / ((1.0 - ru) * (1.0 - 3.0 * ru))
    k_num2 = (rho - u) * (x * sigma ** 2 - 3.0 * rho * x ** 2 * sigma ** 3
                          + 3.0 * rho ** 2 * x ** 3 * sigma ** 4 - rho * sigma)
    k2 = k_num2 / ((1.0 - ru) ** 2 * (1.0 - 3.0 * ru) ** 2)
    k = k1 - k2
    ratio = abs(k) / (abs(rho - u) * (1.0 - u2) ** 2)
    return float(math.sqrt(ratio) / math.pi)


# 20 predefined diagnostic points (n, sigma, rho, u-target); x = u/sigma.
# u targets avoid the rho-u, 1-u^2 and 1-3*rho*u guard bands.
DIAGNOSTIC_POINTS: tuple[tuple[int, float, float, float], ...] = tuple(
    (n, sigma, rho, u / sigma)
    for n in (20, 50, 100, 300, 1000)
    for sigma, rho, u in ((1.0, 0.1, 0.05), (1.2, 0.2, 0.45),
                          (1.5, 0.25, 0.6), (2.0, 0.3, 0.85))
)


def _rel_dev(value: float, reference: float) -> float:
    denom = max(abs(reference), 1e-300)
    return abs(value - reference) / denom


def discrepancy_report(points=DIAGNOSTIC_POINTS) -> list[dict]:
    """Compare the diagnostic evaluators against the exact sums.

    One record per point; deviations are recorded (never gated). Points
    where a diagnostic is undefined (near a pole, or outside the
    off-peak regime) carry a note instead of a value.
    """
    records = []
    for n, sigma, rho, x in points:
        spec = ModelSpec(kind="geometric_neg", n=n, sigma=sigma, rho=rho)
        exact = moments_direct(spec, x)
        rec: dict = {"n": n, "sigma": sigma, "rho": rho, "x": x,
                     "a2_exact": exact.a2, "c_exact": exact.c,
                     "integrand_exact": exact.integrand}
        try:
            a2c = closedform_a2(spec, x)
            rec.update(a2_closed=a2c, a2_rel_dev=_rel_dev(a2c, exact.a2), a2_note="")
        except NearPole as e:
            rec.update(a2_closed=None, a2_rel_dev=None, a2_note=str(e))
        try:
            cc = closedform_c(spec, x)
            rec.update(c_closed=cc, c_rel_dev=_rel_dev(cc, exact.c), c_note="")
        except NearPole as e:
            rec.update(c_closed=None, c_rel_dev=None, c_note=str(e))
        try:
            ia = integrand_approx(spec, x)
            rec.update(integrand_approx=ia,
                       integrand_rel_dev=_rel_dev(ia, exact.integrand),
                       integrand_note="")
        except (NearPole, ValueError) as e:
            rec.update(integrand_approx=None, integrand_rel_dev=None,
                       integrand_note=str(e))
        records.append(rec)
    return records
