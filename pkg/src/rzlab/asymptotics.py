"""Closed-form growth predictions and empirical slope fits against ln n.

The candidate asymptotes are hypotheses to be compared with measured
expected-zero counts, not assumptions: the comparison report prints the
measured totals next to every prediction and the fitted slope. Note the
exact substitution u = sigma*x makes the full-line total independent of
sigma at every finite n, which is in direct tension with the
sigma-scaled candidate; the report surfaces both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

CLAIMS = ("sigma_scaled", "unit_variance", "constant_corr_half",
          "sector_sigma_scaled")


class InsufficientPoints(Exception):
    """Slope fit needs at least three points with distinct n."""


@dataclass(frozen=True)
class SlopeFit:
    points: tuple[tuple[int, float], ...]
    slope: float
    intercept: float
    slope_stderr: float
    residual_rms: float

    def to_dict(self) -> dict:
        return {"points": [[int(n), float(v)] for n, v in self.points],
                "slope": self.slope, "intercept": self.intercept,
                "slope_stderr": self.slope_stderr,
                "residual_rms": self.residual_rms}

    @classmethod
    def from_dict(cls, d: dict) -> "SlopeFit":
        return cls(points=tuple((int(n), float(v)) for n, v in d["points"]),
                   slope=float(d["slope"]), intercept=float(d["intercept"]),
                   slope_stderr=float(d["slope_stderr"]),
                   residual_rms=float(d["residual_rms"]))


def predict(claim: str, n: int, sigma: float = 1.0) -> float:
    """Candidate growth laws for the expected zero count.

    sigma_scaled:         (2 / (pi sigma)) ln n   (full line)
    unit_variance:        (2 / pi) ln n           (full line)
    constant_corr_half:   (1 / pi) ln n           (full line)
    sector_sigma_scaled:  (1 / (2 pi sigma)) ln n (single sector)
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    ln_n = math.log(n)
    if claim == "sigma_scaled":
        return 2.0 / (math.pi * sigma) * ln_n
    if claim == "unit_variance":
        return 2.0 / math.pi * ln_n
    if claim == "constant_corr_half":
        return 1.0 / math.pi * ln_n
    if claim == "sector_sigma_scaled":
        return 1.0 / (2.0 * math.pi * sigma) * ln_n
    raise ValueError(f"unknown claim {claim!r}; expected one of {CLAIMS}")


def fit_slope(points) -> SlopeFit:
    """Least-squares fit of value against ln n."""
    pts = tuple((int(n), float(v)) for n, v in points)
    if len(pts) < 3 or len({n for n, _ in pts}) < len(pts):
        raise InsufficientPoints("need >= 3 points with distinct n")
    log_n = np.log([n for n, _ in pts])
    values = np.array([v for _, v in pts])
    res = linregress(log_n, values)
    residuals = values - (res.slope * log_n + res.intercept)
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    return SlopeFit(points=pts, slope=float(res.slope),
                    intercept=float(res.intercept),
                    slope_stderr=float(res.stderr), residual_rms=rms)
