"""Chi-square test of independence with a self-contained incomplete gamma."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class DegenerateTableError(ValueError):
    pass


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"gamma series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"gamma continued fraction did not converge for a={a}, x={x}")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


def chi2_sf(statistic: float, df: int) -> float:
    if df < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if statistic <= 0:
        return 1.0
    return gammaincc(df / 2.0, statistic / 2.0)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float

    def to_json(self) -> dict:
        return {"statistic": self.statistic, "df": self.degrees_of_freedom, "p_value": self.p_value}


def chi_square(table: Sequence[Sequence[float]], yates: bool = False) -> ChiSquareResult:
    """Pearson chi-square test of independence on an r x c table of counts.

    ``yates`` applies the continuity correction, only meaningful for 2 x 2.
    """
    rows = [list(map(float, r)) for r in table]
    if len(rows) < 2 or len({len(r) for r in rows}) != 1 or len(rows[0]) < 2:
        raise ValueError("contingency table must be rectangular with at least 2 rows and 2 columns")
    if any(x < 0 or math.isnan(x) for r in rows for x in r):
        raise ValueError("contingency table counts must be non-negative")
    row_totals = [math.fsum(r) for r in rows]
    col_totals = [math.fsum(c) for c in zip(*rows)]
    grand = math.fsum(row_totals)
    if grand == 0 or 0 in row_totals or 0 in col_totals:
        raise DegenerateTableError("degenerate contingency table")

    correct = yates and len(rows) == 2 and len(rows[0]) == 2
    terms = []
    for i, r in enumerate(rows):
        for j, observed in enumerate(r):
            expected = row_totals[i] * col_totals[j] / grand
            diff = abs(observed - expected)
            if correct:
                diff = max(0.0, diff - 0.5)
            terms.append(diff * diff / expected)
    stat = math.fsum(terms)
    df = (len(rows) - 1) * (len(rows[0]) - 1)
    return ChiSquareResult(stat, df, chi2_sf(stat, df))
