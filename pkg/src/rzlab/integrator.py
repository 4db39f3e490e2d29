"""Expected real-zero counts by adaptive quadrature of the zero density.

EN(a, b) = (1/pi) * integral_a^b sqrt(a2*b2 - c^2) / a2 dx is integrated
with an adaptive Gauss-Kronrod 15/7 pair over a breakpoint partition of
the working interval |u| = |sigma*x| <= 1. The tails |u| > 1 are never
evaluated directly: the index-reversed model (see `reverse_model`) turns
x in (1/sigma, inf) into t = 1/x in (0, sigma), which is exactly the
reversed model's own unit-u interval, with the covariance scale factor
dropping out of the integrand. No distributional symmetry is assumed.

Totals are reported in the original x coordinates, split at x = +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .model import ModelSpec, reverse_model
from .moments import moments_fast

MAX_BISECTION_DEPTH = 60
DEFAULT_TOL = 1e-8

# Gauss-Kronrod 15-point nodes/weights with the embedded 7-point Gauss
# rule (standard tabulated values).
_XGK = (0.991455371120813, 0.949107912342759, 0.864864423359769,
        0.741531185599394, 0.586087235467691, 0.405845151377397,
        0.207784955007898, 0.0)
_WGK = (0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715525, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728)
_WG = (0.129484966168870, 0.279705391489277, 0.381830050505119,
       0.417959183673469)


class PartitionDegenerate(Exception):
    """The n-dependent partition exponent left (0, 1); use the fallback."""


@dataclass(frozen=True)
class PartitionScheme:
    n: int
    sigma: float
    rho: float
    epsilon: Optional[float]
    eta: Optional[float]
    breakpoints_pos: tuple[float, ...]
    breakpoints_neg: tuple[float, ...]
    fallback: bool


@dataclass(frozen=True)
class IntervalResult:
    a: float
    b: float
    value: float
    err_est: float
    evals: int
    max_depth: bool = False

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "value": self.value,
                "err_est": self.err_est, "evals": self.evals,
                "max_depth": self.max_depth}

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalResult":
        return cls(a=float(d["a"]), b=float(d["b"]), value=float(d["value"]),
                   err_est=float(d["err_est"]), evals=int(d["evals"]),
                   max_depth=bool(d.get("max_depth", False)))


@dataclass(frozen=True)
class ExpectedZeroReport:
    per_interval: tuple[IntervalResult, ...]
    en_0_1: float
    en_m1_0: float
    en_1_inf: float
    en_minf_m1: float
    en_total: float
    tol: float
    max_depth_hit: bool = False

    def to_dict(self) -> dict:
        return {"per_interval": [r.to_dict() for r in self.per_interval],
                "en_0_1": self.en_0_1, "en_m1_0": self.en_m1_0,
                "en_1_inf": self.en_1_inf, "en_minf_m1": self.en_minf_m1,
                "en_total": self.en_total, "tol": self.tol,
                "max_depth_hit": self.max_depth_hit}

    @classmethod
    def from_dict(cls, d: dict) -> "ExpectedZeroReport":
        return cls(per_interval=tuple(IntervalResult.from_dict(r)
                                      for r in d["per_interval"]),
                   en_0_1=float(d["en_0_1"]), en_m1_0=float(d["en_m1_0"]),
                   en_1_inf=float(d["en_1_inf"]), en_minf_m1=float(d["en_minf_m1"]),
                   en_total=float(d["en_total"]), tol=float(d["tol"]),
                   max_depth_hit=bool(d.get("max_depth_hit", False)))


def epsilon_of(n: int) -> float:
    """Inner peak margin epsilon = n^(-a), a = 1 - ln(ln(n^10))/ln(n).

    Algebraically equal to 10*ln(n)/n. Raises PartitionDegenerate when a
    leaves (0, 1), i.e. when 10*ln(n) >= n (n <= 35).
    """
    if n < 2:
        raise PartitionDegenerate(f"n = {n} < 2")
    ln_n = math.log(n)
    a = 1.0 - math.log(10.0 * ln_n) / ln_n
    if not 0.0 < a < 1.0:
        raise PartitionDegenerate(f"partition exponent a = {a:.4g} outside (0,1) for n = {n}")
    return float(n ** (-a))


def eta_of(n: int) -> float:
    """Outer peak margin eta = exp(-(ln n)^(1/3))."""
    if n < 2:
        raise PartitionDegenerate(f"n = {n} < 2")
    return math.exp(-(math.log(n) ** (1.0 / 3.0)))


def _dedup_sorted(points: list[float], tol: float) -> tuple[float, ...]:
    out: list[float] = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return tuple(out)


def _fallback_positive(n: int, s: float) -> list[float]:
    # Dyadic refinement toward the peak at u = 1 replaces the asymptotic
    # partition when the latter is degenerate or disordered.
    k_max = max(3, math.ceil(math.log2(max(n, 2))) + 1)
    pts = [0.0, 0.5 * s] + [s * (1.0 - 2.0 ** (-k)) for k in range(2, k_max + 1)] + [s]
    return pts


def breakpoints(spec: ModelSpec) -> PartitionScheme:
    """Breakpoint partition of the working interval [-1/sigma, 1/sigma].

    Positive side (when the n-dependent margins are usable):
    {0, rho/sigma -+ 1/(n sigma), 1/(2 sigma), (1-eta)/sigma,
    (1-eps)/sigma, 1/sigma}, clamped into [0, 1/sigma] and deduplicated;
    the pole bracket is dropped when rho <= 1/n (the bracketed point
    u = rho touches the domain edge). Negative side analogously without
    the pole bracket. The outer boundary is u = 1, not x = 1: everything
    beyond is reached through the reversal transform.
    """
    n, sigma, rho = spec.n, spec.sigma, spec.rho
    s = 1.0 / sigma
    eps: Optional[float] = None
    eta: Optional[float] = None
    try:
        eps = epsilon_of(n)
        eta = eta_of(n)
        degenerate = not eps < eta
    except PartitionDegenerate:
        degenerate = True
        try:
            eta = eta_of(n)
        except PartitionDegenerate:
            eta = None
    merge_tol = 1e-12 * s
    if degenerate:
        pos = _fallback_positive(n, s)
        neg = [-p for p in pos]
    else:
        assert eps is not None and eta is not None
        pos = [0.0, 0.5 * s, (1.0 - eta) * s, (1.0 - eps) * s, s]
        if rho > 1.0 / n:
            pos += [(rho - 1.0 / n) * s, (rho + 1.0 / n) * s]
        neg = [-s, -(1.0 - eps) * s, -(1.0 - eta) * s, -0.5 * s, 0.0]
    pos = [min(max(p, 0.0), s) for p in pos]
    neg = [min(max(p, -s), 0.0) for p in neg]
    return PartitionScheme(n=n, sigma=sigma, rho=rho, epsilon=eps, eta=eta,
                           breakpoints_pos=_dedup_sorted(pos, merge_tol),
                           breakpoints_neg=_dedup_sorted(neg, merge_tol),
                           fallback=degenerate)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kron = _WGK[7] * fc
    gauss = _WG[3] * fc
    for i in range(7):
        dx = half * _XGK[i]
        fsum = f(center - dx) + f(center + dx)
        kron += _WGK[i] * fsum
        if i % 2 == 1:  # Kronrod nodes 1, 3, 5 are the Gauss-7 nodes
            gauss += _WG[i // 2] * fsum
    kron *= half
    gauss *= half
    return kron, abs(kron - gauss)


def _adapt(f: Callable[[float], float], a: float, b: float, tol: float,
           depth: int) -> tuple[float, float, int, bool]:
    value, err = _gk15(f, a, b)
    if err <= tol or (b - a) <= 1e-14 * (1.0 + abs(a) + abs(b)):
        return value, err, 15, False
    if depth >= MAX_BISECTION_DEPTH:
        return value, err, 15, True
    mid = 0.5 * (a + b)
    lv, le, ln_, lm = _adapt(f, a, mid, 0.5 * tol, depth + 1)
    rv, re, rn, rm = _adapt(f, mid, b, 0.5 * tol, depth + 1)
    return lv + rv, le + re, ln_ + rn + 15, lm or rm


def integrate_interval(spec: ModelSpec, a: float, b: float,
                       tol: float = DEFAULT_TOL) -> IntervalResult:
    """Adaptive quadrature of the zero density over [a, b] within the
    working interval. A cell of width 1/(n*sigma) is pre-split next to
    |x| = 1/sigma, where the density peaks over a width ~1/n in u."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    s = 1.0 / spec.sigma
    slack = 1e-12 * s
    if a < -s - slack or b > s + slack:
        raise ValueError(f"[{a}, {b}] not inside the working interval [{-s}, {s}]; "
                         "tails go through the reversed model")
    if a == b:
        return IntervalResult(a=a, b=b, value=0.0, err_est=0.0, evals=0)
    f = lambda x: moments_fast(spec, x).integrand
    peak_w = s / spec.n
    cuts = [a, b]
    if b >= s - slack and b - a > peak_w:
        cuts.insert(1, b - peak_w)
    if a <= -s + slack and b - a > peak_w and a + peak_w not in cuts:
        cuts.insert(1, a + peak_w)
    cuts = sorted(set(cuts))
    segments = list(zip(cuts[:-1], cuts[1:]))
    seg_tol = tol / len(segments)
    value = err = 0.0
    evals = 0
    hit = False
    for lo, hi in segments:
        v, e, ne, h = _adapt(f, lo, hi, seg_tol, 0)
        value += v
        err += e
        evals += ne
        hit = hit or h
    return IntervalResult(a=a, b=b, value=value, err_est=err, evals=evals,
                          max_depth=hit)


def _with_split(points: tuple[float, ...], split: float) -> tuple[float, ...]:
    if points[0] < split < points[-1] and all(abs(p - split) > 0 for p in points):
        return tuple(sorted(points + (split,)))
    return points


@dataclass
class _Segment:
    spec: ModelSpec
    lo: float          # integration coordinate (x for direct, t for reversed)
    hi: float
    x_lo: float        # reported interval in original x coordinates
    x_hi: float
    sector: str


def _sector_of(x_lo: float, x_hi: float) -> str:
    if x_lo >= 1.0:
        return "1_inf"
    if 0.0 <= x_lo and x_hi <= 1.0:
        return "0_1"
    if -1.0 <= x_lo and x_hi <= 0.0:
        return "m1_0"
    if x_hi <= -1.0:
        return "minf_m1"
    raise AssertionError(f"segment ({x_lo}, {x_hi}) straddles a sector boundary")


def _inv_interval(lo: float, hi: float) -> tuple[float, float]:
    # x = 1/t maps (lo, hi), a subinterval of one half-line, to an
    # x interval on the same side; t -> 0+ gives +inf, t -> 0- gives -inf.
    x_lo = (-math.inf if lo < 0.0 else math.inf) if hi == 0.0 else 1.0 / hi
    x_hi = (-math.inf if hi < 0.0 else math.inf) if lo == 0.0 else 1.0 / lo
    return x_lo, x_hi


def expected_zeros(spec: ModelSpec, tol: float = DEFAULT_TOL) -> ExpectedZeroReport:
    """Expected number of real zeros over the whole line, by sector.

    Direct integration covers |x| <= 1/sigma; the ranges beyond are the
    reversed model's own working interval under t = 1/x (counts map
    one-to-one; the covariance scale factor cancels in the integrand).
    `tol` is the absolute target per sector; en_total sums the four
    sectors. Requires a positive definite model.
    """
    rev_spec, _ = reverse_model(spec)
    sigma = spec.sigma
    scheme = breakpoints(spec)
    scheme_rev = breakpoints(rev_spec)

    pos = scheme.breakpoints_pos
    neg = scheme.breakpoints_neg
    rev_pos = scheme_rev.breakpoints_pos
    rev_neg = scheme_rev.breakpoints_neg
    if sigma < 1.0:        # x = 1 lies inside the direct interval
        pos = _with_split(pos, 1.0)
        neg = _with_split(neg, -1.0)
    elif sigma > 1.0:      # x = 1 maps to t = 1 inside the reversed interval
        rev_pos = _with_split(rev_pos, 1.0)
        rev_neg = _with_split(rev_neg, -1.0)

    segments: list[_Segment] = []
    for lo, hi in zip(pos[:-1], pos[1:]):
        segments.append(_Segment(spec, lo, hi, lo, hi, _sector_of(lo, hi)))
    for lo, hi in zip(neg[:-1], neg[1:]):
        segments.append(_Segment(spec, lo, hi, lo, hi, _sector_of(lo, hi)))
    for lo, hi in zip(rev_pos[:-1], rev_pos[1:]):
        x_lo, x_hi = _inv_interval(lo, hi)
        segments.append(_Segment(rev_spec, lo, hi, x_lo, x_hi, _sector_of(x_lo, x_hi)))
    for lo, hi in zip(rev_neg[:-1], rev_neg[1:]):
        x_lo, x_hi = _inv_interval(lo, hi)
        segments.append(_Segment(rev_spec, lo, hi, x_lo, x_hi, _sector_of(x_lo, x_hi)))

    sector_counts: dict[str, int] = {}
    for seg in segments:
        sector_counts[seg.sector] = sector_counts.get(seg.sector, 0) + 1

    sector_values = {"0_1": 0.0, "m1_0": 0.0, "1_inf": 0.0, "minf_m1": 0.0}
    results = []
    hit = False
    for seg in segments:
        res = integrate_interval(seg.spec, seg.lo, seg.hi,
                                 tol / sector_counts[seg.sector])
        sector_values[seg.sector] += res.value
        hit = hit or res.max_depth
        results.append(IntervalResult(a=seg.x_lo, b=seg.x_hi, value=res.value,
                                      err_est=res.err_est, evals=res.evals,
                                      max_depth=res.max_depth))
    results.sort(key=lambda r: (r.a, r.b))
    en_total = sum(sector_values.values())
    return ExpectedZeroReport(per_interval=tuple(results),
                              en_0_1=sector_values["0_1"],
                              en_m1_0=sector_values["m1_0"],
                              en_1_inf=sector_values["1_inf"],
                              en_minf_m1=sector_values["minf_m1"],
                              en_total=en_total, tol=tol, max_depth_hit=hit)
