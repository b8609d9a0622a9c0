"""Camassa-Holm isospectral problem ``-f'' + f/4 = z omega f + z^2 upsilon f``.

``omega = u - u''`` with ``u`` a continuous piecewise polynomial that is
constant beyond its grid.  The substitution ``s = log(1 + t)`` maps the problem
to a string on the half line with anti-derivative

    w(t) = u(0) - (u' + u)(log(1 + t)) / (1 + t),

and weights ``upsilon`` by ``e^{-s}``.  The classification can also be done
directly in the ``s`` variable, which gives an independent route to the same
verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._numerics import gauss_unit
from .coefficients import (
    AntiDerivative,
    ConstantTail,
    DomainError,
    GIString,
    MeasureRepr,
    ModelClassError,
    PowerDensity,
    PowerTail,
    _poly_min_on,
)
from .criteria import (
    Classification,
    _check_p_list,
    _verdicts_from_limit,
    inconclusive,
    no,
    yes,
)

INF = math.inf
TOL_TRANSFORM = 1e-8
_CHECK_POINTS = 41
_MAX_DEPTH = 40


@dataclass(frozen=True)
class ExpDensity:
    """Density ``B * exp(kappa * s)`` for ``s >= start``."""

    B: float
    kappa: float
    start: float


@dataclass(frozen=True, eq=False)
class CHProblem:
    """``u`` (half-line :class:`AntiDerivative` with constant tail), ``upsilon`` and its exponential tail."""

    u: AntiDerivative
    upsilon: MeasureRepr
    upsilon_tail: ExpDensity | None = None

    def __post_init__(self):
        if not math.isinf(self.u.length) or not math.isinf(self.upsilon.length):
            raise DomainError("the Camassa-Holm problem lives on the half line")
        if not isinstance(self.u.tail, ConstantTail):
            raise ModelClassError("u must be constant beyond its grid (compactly supported perturbation)")
        if self.upsilon.tail is not None:
            raise ModelClassError("give the upsilon tail as an ExpDensity")
        vals = [seg for seg in self.u.segments]
        g = self.u.grid
        scale = max(1.0, max((abs(v) for s in vals for v in s), default=0.0))
        for i, seg in enumerate(vals):
            right = npoly.polyval(g[i + 1] - g[i], seg)
            nxt = vals[i + 1][0] if i + 1 < len(vals) else self.u.tail.c
            if abs(right - nxt) > 1e-12 * scale:
                raise DomainError("u must be continuous")
        t = self.upsilon_tail
        if t is not None:
            if t.B < 0:
                raise DomainError("upsilon tail density must be non-negative")
            dg = self.upsilon.density_grid
            if (dg and t.start < dg[-1]) or any(p >= t.start for p, _ in self.upsilon.atoms):
                raise DomainError("upsilon tail must start after the density grid and all atoms")

    @property
    def u0(self) -> float:
        return float(self.u(np.array([0.0]))[0]) if self.u.segments else self.u.tail.c

    @property
    def u_inf(self) -> float:
        return self.u.tail.c

    def slope_plus_value(self):
        """Local coefficient arrays of ``u' + u`` on the grid segments."""
        out = []
        for seg in self.u.segments:
            c = np.asarray(seg, dtype=float)
            d = npoly.polyder(c) if c.size > 1 else np.zeros(1)
            out.append(npoly.polyadd(c, d))
        return out


# --------------------------------------------------------------------------
# transform
# --------------------------------------------------------------------------


def _lobatto(deg):
    k = np.arange(deg + 1)
    return 0.5 * (1.0 - np.cos(np.pi * k / deg))


def _fit_pieces(f, a, b, degree, tol, nonneg=False):
    """Piecewise interpolants of ``f`` on ``[a, b]`` with sampled max error <= tol.

    Returns a list of ``(lo, hi, local_coeffs)``.  With ``nonneg`` each piece is
    checked for positivity and replaced by the linear interpolant if needed.
    """
    check = np.linspace(0.0, 1.0, _CHECK_POINTS)
    out = []
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        h = hi - lo
        coef = None
        for deg in (degree, 1) if nonneg else (degree,):
            xs = _lobatto(deg) * h
            trial = npoly.polyfit(xs, f(lo + xs), deg)
            if nonneg and _poly_min_on(trial, h) < 0:
                continue
            coef = trial
            break
        exact = f(lo + check * h)
        err = np.max(np.abs(npoly.polyval(check * h, coef) - exact))
        if err <= tol * max(1.0, np.max(np.abs(exact))) or depth >= _MAX_DEPTH:
            out.append((lo, hi, coef))
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return out


def _to_t(s):
    return math.expm1(s)


def ch_to_string(p: CHProblem, tol: float = TOL_TRANSFORM) -> GIString:
    """String on the half line with the same spectrum as the problem ``p``."""
    u0 = p.u0
    grid = [0.0]
    segments = []
    for (s_lo, s_hi), v in zip(zip(p.u.grid[:-1], p.u.grid[1:]), p.slope_plus_value()):
        t_lo, t_hi = _to_t(s_lo), _to_t(s_hi)
        if not np.any(v):
            grid.append(t_hi)
            segments.append((u0,))
            continue

        def f(t, v=v, s_lo=s_lo):
            t = np.asarray(t, dtype=float)
            return u0 - npoly.polyval(np.log1p(t) - s_lo, v) / (1.0 + t)

        for lo, hi, coef in _fit_pieces(f, t_lo, t_hi, 3, tol):
            grid.append(hi)
            segments.append(tuple(coef))
    tail = ConstantTail(u0) if p.u_inf == 0.0 else PowerTail(u0, -p.u_inf, 1.0, 1.0)
    w = AntiDerivative(INF, tuple(grid), tuple(segments), tail)
    return GIString(INF, w, transform_upsilon(p, tol))


def transform_upsilon(p: CHProblem, tol: float = TOL_TRANSFORM) -> MeasureRepr:
    """Image of ``upsilon`` under ``s = log(1 + t)`` with weight ``e^{-s}``."""
    ups = p.upsilon
    atoms = tuple((_to_t(s0), wt * math.exp(-s0)) for s0, wt in ups.atoms)
    dgrid, dsegs = [], []
    g = ups.density_grid
    for i, seg in enumerate(ups.density_segments):
        t_lo, t_hi = _to_t(g[i]), _to_t(g[i + 1])
        if not dgrid:
            dgrid.append(t_lo)
        if not any(seg):
            dgrid.append(t_hi)
            dsegs.append((0.0,))
            continue

        def rho(t, seg=seg, s_lo=g[i]):
            t = np.asarray(t, dtype=float)
            return npoly.polyval(np.log1p(t) - s_lo, seg) / (1.0 + t) ** 2

        for lo, hi, coef in _fit_pieces(rho, t_lo, t_hi, 3, tol, nonneg=True):
            dgrid.append(hi)
            dsegs.append(tuple(coef))
    tail = None
    et = p.upsilon_tail
    if et is not None:
        if et.kappa > 2:
            raise ModelClassError("upsilon tail growth exponent above 2 leaves the tail model class")
        start = _to_t(et.start)
        if not dgrid:
            dgrid = [0.0] if start == 0.0 else [0.0, start]
            dsegs = [] if start == 0.0 else [(0.0,)]
        elif dgrid[-1] < start:
            dgrid.append(start)
            dsegs.append((0.0,))
        tail = PowerDensity(et.B, 2.0 - et.kappa, 1.0)
    return MeasureRepr(INF, atoms, tuple(dgrid), tuple(dsegs), tail)


# --------------------------------------------------------------------------
# direct classification
# --------------------------------------------------------------------------


def _tail_limit(p: CHProblem):
    """Limit of the exponentially weighted tail functional (closed form)."""
    parts = []
    lim = p.u_inf**2
    parts.append(f"u' + u -> u_inf = {p.u_inf:g} contributes u_inf^2 = {lim:.6g}")
    et = p.upsilon_tail
    if et is not None and et.B != 0.0:
        k = et.kappa
        if k < 0:
            parts.append(f"int_x e^(x-t) B e^(kappa t) dt = B e^(kappa x)/(1 - kappa) -> 0 (kappa = {k:g})")
        elif k == 0:
            lim += et.B
            parts.append(f"upsilon tail contributes B = {et.B:.6g}")
        else:
            lim = INF
            parts.append(f"upsilon tail e^(kappa x) with kappa = {k:g} >= 0 makes the functional unbounded")
    else:
        parts.append("upsilon has bounded support")
    return lim, "; ".join(parts)


def _gauss_integral(f, a, b, order=24):
    xi, wq = gauss_unit(order)
    return float((b - a) * (f(a + (b - a) * xi) @ wq))


def ch_trace_sum(p: CHProblem) -> float | None:
    """Sum of reciprocal eigenvalues, ``int (u' + u) ds = int u - u(0)`` when ``u_inf = 0``.

    This equals ``int (1 - e^-s) d omega`` (diagonal of the Green's function of
    ``-d^2 + 1/4``) and ``int (c - w) dt`` for the transformed string.
    """
    if p.u_inf != 0.0:
        return None
    return p.u.integral(0.0, INF) - p.u0


def ch_hs_sum(p: CHProblem) -> float | None:
    """``2 int (1 - e^-s)(u' + u)^2 ds + 2 int (1 - e^-s) dupsilon`` (half-line identity in ``s``)."""
    if p.u_inf != 0.0:
        return None
    total = 0.0
    for (lo, hi), v in zip(zip(p.u.grid[:-1], p.u.grid[1:]), p.slope_plus_value()):
        total += _gauss_integral(lambda s, v=v, lo=lo: -np.expm1(-s) * npoly.polyval(s - lo, v) ** 2, lo, hi)
    ups = p.upsilon
    for s0, wt in ups.atoms:
        total += -math.expm1(-s0) * wt
    g = ups.density_grid
    for i, seg in enumerate(ups.density_segments):
        total += _gauss_integral(lambda s, seg=seg, lo=g[i]: -np.expm1(-s) * npoly.polyval(s - lo, seg), g[i], g[i + 1])
    et = p.upsilon_tail
    if et is not None and et.B != 0.0:
        k, s0 = et.kappa, et.start
        if k >= 0:
            return None
        total += et.B * (-math.exp(k * s0) / k + math.exp((k - 1) * s0) / (k - 1))
    return 2.0 * total


def ch_classify(p: CHProblem, p_list=(2.0,)) -> Classification:
    """Verdicts computed in the original variable."""
    p_list = _check_p_list(p_list, 1.0, "Camassa-Holm")
    c = 0.0
    limit, ev = _tail_limit(p)
    zero_ok, discrete = _verdicts_from_limit(limit, ev)
    schatten = []
    for q in p_list:
        if discrete.is_yes:
            schatten.append((q, yes(f"functional decays exponentially or vanishes; integrable for p = {q:g}")))
        else:
            schatten.append((q, no(f"membership requires discreteness ({discrete.evidence})")))
    has_density = p.upsilon.has_density or (p.upsilon_tail is not None and p.upsilon_tail.B != 0.0)
    u_zero = p.u_inf == 0.0 and not any(any(s) for s in p.u.segments)
    warnings = []
    if not discrete.is_yes:
        tc = no("trace class requires a discrete spectrum")
    elif has_density:
        tc = no("upsilon has an absolutely continuous part; trace class forces it to be singular")
    elif u_zero:
        tc = yes("u vanishes and upsilon is a finite sum of point masses: finitely many eigenvalues")
    else:
        tc = inconclusive("only necessary conditions are available at p = 1")
        warnings.append("necessary trace-class conditions hold; trace class is left undecided")
    trace = hs = None
    trace_status = hs_status = None
    if discrete.is_yes:
        hs = ch_hs_sum(p)
        hs_status = "identity" if hs is not None else None
        if not tc.is_no:
            trace = ch_trace_sum(p)
            trace_status = "identity" if tc.is_yes else "conditional"
    return Classification(
        "ch", INF, c, "closed_form", zero_ok, discrete, tuple(schatten), tc, trace, trace_status, hs, hs_status, tuple(warnings)
    )
