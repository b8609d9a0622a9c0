"""Small exact-integration helpers shared by the coefficient and assembly code."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial


@lru_cache(maxsize=None)
def gauss_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def int_pow(p: float, lo: float, hi: float) -> float:
    """Integral of y**p over [lo, hi] with 0 <= lo <= hi <= inf.

    Divergent integrals return ``inf``.
    """
    if hi == lo:
        return 0.0
    if math.isinf(hi):
        if p >= -1.0 or lo == 0.0:
            return math.inf
        return -(lo ** (p + 1.0)) / (p + 1.0)
    if p == -1.0:
        if lo == 0.0:
            return math.inf
        return math.log(hi / lo)
    if lo == 0.0 and p < -1.0:
        return math.inf
    if lo == 0.0:
        return hi ** (p + 1.0) / (p + 1.0)
    return (hi ** (p + 1.0) - lo ** (p + 1.0)) / (p + 1.0)


def shift_poly(coeffs, delta: float) -> np.ndarray:
    """Coefficients of t -> p(t + delta), low order first."""
    coeffs = np.asarray(coeffs, dtype=float)
    if delta == 0.0 or coeffs.size <= 1:
        return coeffs.copy()
    out = Polynomial(coeffs)(Polynomial([delta, 1.0])).coef
    return np.pad(out, (0, max(0, coeffs.size - out.size)))[: coeffs.size]


def poly_integral(coeffs, length: float) -> float:
    """Integral over [0, length] of the local polynomial with ``coeffs``."""
    coeffs = np.asarray(coeffs, dtype=float)
    k = np.arange(1, coeffs.size + 1)
    return float(np.sum(coeffs * length**k / k))


def power_terms_integral(terms, weight_y, lo: float, hi: float) -> float:
    """Integral over y in [lo, hi] of sum_i a_i y**e_i times the polynomial ``weight_y``.

    ``terms`` is a sequence of ``(a_i, e_i)``. Exact up to round-off.
    """
    weight_y = np.asarray(weight_y, dtype=float)
    total = 0.0
    for a, e in terms:
        if a == 0.0:
            continue
        for j, qj in enumerate(weight_y):
            if qj == 0.0:
                continue
            total += a * qj * int_pow(e + j, lo, hi)
    return total


def square_terms(terms):
    """Expand (sum_i a_i y**e_i)**2 into a merged term list."""
    out: dict[float, float] = {}
    for a1, e1 in terms:
        for a2, e2 in terms:
            if a1 == 0.0 or a2 == 0.0:
                continue
            out[e1 + e2] = out.get(e1 + e2, 0.0) + a1 * a2
    return [(a, e) for e, a in sorted(out.items())]
