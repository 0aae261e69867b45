"""Association statistics between patch scores and repair outcomes.

The headline test is the point-biserial correlation between a
continuous score (for example patch similarity) and a binary outcome
(plausible or not), with a two-tailed p-value from the t distribution.
The t CDF is computed here directly via the regularized incomplete beta
function so the package stays dependency-free; external packages are
used only as cross-checks in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import DegenerateInput

_BETA_MAX_ITER = 300
_BETA_EPS = 1e-15
_BETA_TINY = 1e-300


def _beta_cont_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    # Use the continued fraction on whichever side converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def t_cdf(t: float, df: int) -> float:
    """CDF of Student's t distribution with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def t_sf_two_tailed(t: float, df: int) -> float:
    """Two-tailed p-value for a t statistic."""
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


@dataclass
class PointBiserialResult:
    r: float
    p_value: float
    t_stat: float
    n1: int
    n0: int

    @property
    def n(self) -> int:
        return self.n1 + self.n0

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "p_value": self.p_value,
            "t_stat": self.t_stat,
            "n1": self.n1,
            "n0": self.n0,
        }


def point_biserial(
    scores: Sequence[float], labels: Sequence[int]
) -> PointBiserialResult:
    """Point-biserial correlation between scores and binary labels.

    r = (M1 - M0) / s_n * sqrt(n1 * n0 / n^2) with s_n the population
    standard deviation of all scores.  The p-value is two-tailed against
    Student's t with n - 2 degrees of freedom.  Raises
    ``DegenerateInput`` when n < 3, when only one label value appears,
    or when the scores have zero variance.
    """
    if len(scores) != len(labels):
        raise DegenerateInput("scores and labels differ in length")
    n = len(scores)
    if n < 3:
        raise DegenerateInput("need at least 3 observations")
    for label in labels:
        if label not in (0, 1):
            raise DegenerateInput(f"labels must be 0 or 1, got {label!r}")
    ones = [s for s, y in zip(scores, labels) if y == 1]
    zeros = [s for s, y in zip(scores, labels) if y == 0]
    n1, n0 = len(ones), len(zeros)
    if n1 == 0 or n0 == 0:
        raise DegenerateInput("both label values must appear")
    mean = sum(scores) / n
    var = sum((s - mean) ** 2 for s in scores) / n
    if var == 0.0:
        raise DegenerateInput("scores have zero variance")
    s_n = math.sqrt(var)
    m1 = sum(ones) / n1
    m0 = sum(zeros) / n0
    r = (m1 - m0) / s_n * math.sqrt(n1 * n0 / (n * n))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return PointBiserialResult(r=r, p_value=0.0, t_stat=math.inf, n1=n1, n0=n0)
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = t_sf_two_tailed(t_stat, n - 2)
    return PointBiserialResult(r=r, p_value=p, t_stat=t_stat, n1=n1, n0=n0)
