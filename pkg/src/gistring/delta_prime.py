"""Schroedinger operators with delta-prime interactions on the half line.

The Hamiltonian with interactions of strength ``beta_k`` at ``x_k`` shares its
spectrum with the string ``(inf, chi + Lebesgue, 0)``, whose anti-derivative
is ``w(x) = x + q(x)`` with ``q`` the partial sums of the strengths.

For supports generated by ``x_k = a k^gamma`` the two sums

    first(n)  = x_n sum_{k >= n} (x_{k+1} - x_k)^3
    second(n) = x_n sum_{k >= n} (x_{k+1} - x_k) (q_k + x_k - c)^2

have explicit power asymptotics, which decide boundedness and discreteness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .coefficients import AntiDerivative, DomainError, GIString, GrowthTail, MeasureRepr
from .criteria import Classification, classify, inconclusive, no, yes
from .pencil import Spectrum, refine_until, solve_spectrum

INF = math.inf


@dataclass(frozen=True, eq=False)
class ExplicitSupport:
    """Finitely many interactions ``(x_k, beta_k)``, ``0 < x_1 < x_2 < ...``."""

    positions: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float).reshape(-1)
        b = np.asarray(self.strengths, dtype=float).reshape(-1)
        if x.shape != b.shape:
            raise DomainError("positions and strengths must have the same length")
        if x.size and x[0] <= 0:
            raise DomainError("interactions must avoid the origin")
        if np.any(np.diff(x) <= 0):
            raise DomainError("positions must be strictly increasing")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "strengths", b)

    def support(self, truncation=None):
        if truncation is None:
            return self.positions, self.strengths
        keep = self.positions <= truncation
        return self.positions[keep], self.strengths[keep]


@dataclass(frozen=True)
class PowerLawGenerator:
    """``x_k = a k^gamma`` with strengths from a rule.

    ``rule="minus_gap"``: ``beta_k = -(x_k - x_{k-1}) + c0 * k^(-rho)`` (``x_0 = 0``);
    ``rule="constant"``: ``beta_k = b``.
    """

    a: float
    gamma: float
    rule: str = "minus_gap"
    b: float = 0.0
    c0: float = 0.0
    rho: float = 2.0

    def __post_init__(self):
        if self.a <= 0:
            raise DomainError("scale a must be positive")
        if self.gamma <= 0:
            raise DomainError("exponent gamma must be positive")
        if self.rule not in ("minus_gap", "constant"):
            raise DomainError(f"unknown strength rule {self.rule!r}")

    def positions(self, count: int) -> np.ndarray:
        k = np.arange(1, count + 1, dtype=float)
        return self.a * k**self.gamma

    def strengths(self, count: int) -> np.ndarray:
        k = np.arange(1, count + 1, dtype=float)
        if self.rule == "constant":
            return np.full(count, float(self.b))
        x = self.a * np.concatenate([[0.0], k]) ** self.gamma
        out = -np.diff(x)
        if self.c0 != 0.0:
            out = out + self.c0 * k ** (-self.rho)
        return out

    def count_up_to(self, truncation: float) -> int:
        return int(math.floor((truncation / self.a) ** (1.0 / self.gamma) + 1e-12))

    def support(self, truncation):
        if truncation is None:
            raise DomainError("a generator needs a truncation point")
        n = self.count_up_to(truncation)
        return self.positions(n), self.strengths(n)


DeltaPrimeProblem = ExplicitSupport | PowerLawGenerator


def partial_sums(strengths) -> np.ndarray:
    """``q_0 = 0, q_k = beta_1 + ... + beta_k``."""
    return np.concatenate([[0.0], np.cumsum(np.asarray(strengths, dtype=float))])


def dp_string(p: DeltaPrimeProblem, truncation=None, dirichlet_cap: bool = False) -> GIString:
    """String with anti-derivative ``x + q(x)`` and ``upsilon = 0``.

    With ``dirichlet_cap`` the string lives on ``[0, truncation)`` (zero
    condition at the cut; an interaction sitting on the cut is dropped since
    it cannot act there), otherwise the last partial sum is continued by
    ``q_N + x`` on the half line.
    """
    x, beta = p.support(truncation)
    if dirichlet_cap:
        if truncation is None or truncation <= 0:
            raise DomainError("the cap needs a positive truncation point")
        keep = x < truncation
        x, beta = x[keep], beta[keep]
    q = partial_sums(beta)
    if dirichlet_cap:
        L = float(truncation)
        grid = np.concatenate([[0.0], x, [L]])
        segs = tuple((float(xk + qk), 1.0) for xk, qk in zip(grid[:-1], q))
        w = AntiDerivative(L, tuple(grid), segs)
        return GIString(L, w, MeasureRepr.zero(L))
    grid = np.concatenate([[0.0], x])
    segs = tuple((float(xk + qk), 1.0) for xk, qk in zip(grid[:-1], q[:-1]))
    w = AntiDerivative(INF, tuple(grid), segs, GrowthTail(float(q[-1]), 1.0, 1.0, 0.0))
    return GIString(INF, w, MeasureRepr.zero(INF))


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


def _explicit_classification(p: ExplicitSupport, p_list):
    # x/2 + int_[0,x) (1 - t/x) dchi tends to x/2 + sum(beta) for a finite list
    total = float(np.sum(p.strengths))
    msg = f"x/2 + int (1 - t/x) dchi ~ x/2 + {total:g} diverges: no constant c"
    schatten = tuple((q, no(msg)) for q in p_list)
    return Classification("delta_prime", INF, None, "absent", no(msg), no(msg), schatten, no(msg))


@dataclass(frozen=True)
class SumAsymptotics:
    """``limit`` of a sum as ``n -> inf`` and the power ``n^exponent`` it behaves like."""

    limit: float
    exponent: float | None
    note: str


def generator_constant(g: PowerLawGenerator):
    """Mean-value constant for the generated support, or ``None`` when it does not exist."""
    if g.gamma > 1:
        return None
    if g.rule == "constant":
        if g.gamma == 1 and g.b == -g.a:
            return g.a / 2
        return None
    base = g.a / 2 if g.gamma == 1 else 0.0
    if g.c0 == 0.0:
        return base
    if g.rho <= 1:
        return None
    return base + g.c0 * float(zeta(g.rho))


def first_sum_asymptotics(g: PowerLawGenerator) -> SumAsymptotics:
    """``x_n sum_{k>=n} gap_k^3 ~ a^4 gamma^3 / (2 - 3 gamma) n^(4 gamma - 2)``."""
    a, gm = g.a, g.gamma
    if gm >= 2.0 / 3.0:
        return SumAsymptotics(INF, None, f"gaps ~ k^{gm - 1:g}: sum of cubes diverges or decays too slowly")
    k = a**4 * gm**3 / (2 - 3 * gm)
    e = 4 * gm - 2
    if e < 0:
        return SumAsymptotics(0.0, e, f"~ {k:.6g} n^{e:g} -> 0")
    if e == 0:
        return SumAsymptotics(k, 0.0, f"-> a^4 gamma^3/(2 - 3 gamma) = {k:.6g}")
    return SumAsymptotics(INF, e, f"~ {k:.6g} n^{e:g} -> inf")


def second_sum_asymptotics(g: PowerLawGenerator, c) -> SumAsymptotics:
    """``x_n sum_{k>=n} gap_k (q_k + x_k - c)^2`` for the supported rules."""
    if c is None:
        return SumAsymptotics(INF, None, "no constant c")
    if g.rule == "constant":
        # only the gamma = 1, b = -a case has a constant; it coincides with minus_gap
        g = PowerLawGenerator(g.a, 1.0)
    a, gm = g.a, g.gamma
    if gm == 1:
        base = g.a / 2
        if g.c0 == 0.0:
            # q_k + x_k - c = -a/2 on every interval: sum of equal gaps diverges
            return SumAsymptotics(INF, None, f"q_k + x_k - c = {-base:g} on gaps of size {a:g}: divergent")
        return SumAsymptotics(INF, None, "gaps do not shrink: divergent")
    if g.c0 == 0.0:
        return SumAsymptotics(0.0, None, "q_k + x_k = 0 = c for every k")
    r = g.rho
    k = a**2 * gm * g.c0**2 / ((r - 1) ** 2 * (2 * r - gm - 2)) if 2 * r - gm - 2 > 0 else INF
    e = 2 * gm + 2 - 2 * r
    if 2 * r - gm - 2 <= 0:
        return SumAsymptotics(INF, None, "remainder of the perturbation decays too slowly: divergent")
    if e < 0:
        return SumAsymptotics(0.0, e, f"~ {k:.6g} n^{e:g} -> 0")
    if e == 0:
        return SumAsymptotics(k, 0.0, f"-> a^2 c0^2/gamma^2 = {k:.6g}")
    return SumAsymptotics(INF, e, f"~ {k:.6g} n^{e:g} -> inf")


def generator_sums(g: PowerLawGenerator, n: int, terms: int = 200000) -> tuple[float, float]:
    """Direct evaluation of both sums at index ``n`` (finite number of terms plus integral remainder)."""
    c = generator_constant(g)
    count = n + terms + 1
    x = g.positions(count)
    q = partial_sums(g.strengths(count))[1:]
    gaps = np.diff(x)
    idx = slice(n - 1, count - 1)
    first = x[n - 1] * np.sum(gaps[idx] ** 3)
    second = INF if c is None else x[n - 1] * np.sum(gaps[idx] * (q[idx] + x[idx] - c) ** 2)
    # integral remainder of the cube sum, gap ~ a gamma k^(gamma-1)
    K = count - 1
    gm = g.gamma
    if 3 * gm - 3 < -1:
        first += x[n - 1] * (g.a * gm) ** 3 * K ** (3 * gm - 2) / (2 - 3 * gm)
    else:
        first = INF
    return float(first), float(second)


def dp_classify(p: DeltaPrimeProblem, p_list=(2.0,)) -> Classification:
    """Verdicts for the delta-prime Hamiltonian."""
    p_list = tuple(sorted({float(v) for v in p_list}))
    if isinstance(p, ExplicitSupport):
        return _explicit_classification(p, p_list)
    g = p
    if not (0 < g.gamma <= 1):
        msg = "outside the supported generator family (0 < gamma <= 1)"
        return Classification(
            "delta_prime", INF, None, "absent", inconclusive(msg), inconclusive(msg),
            tuple((q, inconclusive(msg)) for q in p_list), inconclusive(msg),
        )
    c = generator_constant(g)
    if c is None:
        msg = "the averaged constant c does not exist (partial sums drift)"
        return Classification(
            "delta_prime", INF, None, "absent", no(msg), no(msg), tuple((q, no(msg)) for q in p_list), no(msg)
        )
    f1 = first_sum_asymptotics(g)
    f2 = second_sum_asymptotics(g, c)
    ev = f"first sum: {f1.note}; second sum: {f2.note}"
    limit = f1.limit + f2.limit
    if math.isinf(limit):
        zero_ok, disc = no(ev), no(ev)
    elif limit > 0:
        zero_ok, disc = yes(ev), no(ev)
    else:
        zero_ok, disc = yes(ev), yes(ev)
    schatten = []
    for q in p_list:
        schatten.append((q, yes(f"power decay; p = {q:g}") if disc.is_yes else no("requires discreteness")))
    tc = inconclusive("only necessary conditions are available at p = 1") if disc.is_yes else no("requires discreteness")
    return Classification("delta_prime", INF, c, "closed_form", zero_ok, disc, tuple(schatten), tc)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------


def dp_spectrum(p: DeltaPrimeProblem, truncation, n: int = 256, tol: float | None = None, k_leading: int = 3) -> Spectrum:
    """Eigenvalues of the string capped with a zero condition at ``truncation``.

    With ``tol`` the grid is refined until the ``k_leading`` smallest
    eigenvalues settle; otherwise a single solve on ``n`` elements.
    """
    s = dp_string(p, truncation, dirichlet_cap=True)
    if tol is None:
        spec = solve_spectrum(s, n=n)
    else:
        spec = refine_until(s, tol, k_leading, n0=n)
    note = f"interactions truncated at x = {float(truncation):g} with a zero condition there"
    return Spectrum(spec.eigenvalues, spec.mu_cut, spec.n, spec.converged, spec.deltas, spec.sizes, spec.method, (note,))
