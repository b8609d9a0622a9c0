"""Coefficient representations for generalized indefinite strings.

A string is a triple ``(L, omega, upsilon)``.  The real distribution ``omega`` is
stored through its normalized anti-derivative ``w`` (piecewise polynomial on a
finite grid followed by an analytic tail), ``upsilon`` as atoms plus a piecewise
polynomial density plus an analytic tail.  Everything is chosen so that the
limits and integrals needed by the classification criteria have closed forms.

Polynomials are stored low order first in the *local* coordinate ``x - x_i`` of
the segment ``[x_i, x_{i+1})``.  ``L = math.inf`` encodes the half line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly

from ._numerics import (
    power_terms_integral,
    poly_integral,
    shift_poly,
    square_terms,
)

INF = math.inf
MAX_W_DEGREE = 3
MAX_DENSITY_DEGREE = 3


class DomainError(ValueError):
    """Input lies outside the admissible domain (support, sign, ordering)."""


class ModelClassError(ValueError):
    """Input cannot be expressed in the closed-form coefficient class."""


class UsageError(ValueError):
    """Operation called in a regime it does not support."""


def check_length(L) -> float:
    L = float(L)
    if math.isnan(L) or L <= 0.0:
        raise DomainError(f"length must be positive, got {L}")
    return L


def is_finite_length(L: float) -> bool:
    return not math.isinf(L)


# --------------------------------------------------------------------------
# tails of anti-derivatives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantTail:
    """``w(x) = c`` beyond the grid."""

    c: float
    kind = "constant"

    def terms(self, shift: float = 0.0):
        return [(self.c - shift, 0.0)]

    def y_map(self, L):
        return 1.0, 0.0

    def limit_constant(self):
        return self.c


@dataclass(frozen=True)
class PowerTail:
    """``w(x) = c + amplitude * (x + shift)**(-alpha)`` beyond the grid, alpha > 0."""

    c: float
    amplitude: float
    alpha: float
    shift: float = 0.0
    kind = "power"

    def terms(self, shift: float = 0.0):
        return [(self.c - shift, 0.0), (self.amplitude, -self.alpha)]

    def y_map(self, L):
        return 1.0, self.shift

    def limit_constant(self):
        return self.c


@dataclass(frozen=True)
class GrowthTail:
    """``w(x) = c + amplitude * (x + shift)**gamma`` beyond the grid, gamma > 0.

    With a non-zero amplitude the mean value of ``w`` diverges; such tails
    encode e.g. Lebesgue measure on the half line (``w(x) = x``).
    """

    c: float
    amplitude: float
    gamma: float
    shift: float = 0.0
    kind = "growth"

    def terms(self, shift: float = 0.0):
        return [(self.c - shift, 0.0), (self.amplitude, self.gamma)]

    def y_map(self, L):
        return 1.0, self.shift

    def limit_constant(self):
        return self.c if self.amplitude == 0.0 else None


@dataclass(frozen=True)
class EndpointTail:
    """``w(x) = c + amplitude * (L - x)**(-alpha)`` near a finite endpoint ``L``.

    Positive ``alpha`` is a singularity at ``L``; negative ``alpha`` a
    Hoelder-type bounded tail.
    """

    c: float
    amplitude: float
    alpha: float
    kind = "endpoint"

    def terms(self, shift: float = 0.0):
        return [(self.c - shift, 0.0), (self.amplitude, -self.alpha)]

    def y_map(self, L):
        return -1.0, L

    def limit_constant(self):
        return None


Tail = Union[ConstantTail, PowerTail, GrowthTail, EndpointTail]


def _tail_eval(tail, x, L):
    sigma, offset = tail.y_map(L)
    y = sigma * np.asarray(x, dtype=float) + offset
    out = np.zeros_like(y)
    for a, e in tail.terms():
        if a != 0.0:
            out = out + (a if e == 0.0 else a * y**e)
    return out


def _weight_in_y(weight_local, lo, sigma, offset):
    # t = x - lo with x = sigma * (y - offset); coefficients that cancel to
    # round-off are zeroed so that exactly vanishing low orders stay zero
    # (otherwise a divergent y**(-alpha) moment would be switched on).
    shift = -sigma * offset - lo
    out = Polynomial(weight_local)(Polynomial([shift, sigma])).coef
    scale = Polynomial(np.abs(weight_local))(Polynomial([abs(shift), 1.0])).coef
    scale = np.pad(scale, (0, max(0, out.size - scale.size)))[: out.size]
    out[np.abs(out) <= 1e-12 * scale] = 0.0
    return out


def _tail_integral(tail, L, lo, hi, weight_local, power, shift):
    terms = tail.terms(shift)
    if power == 2:
        terms = square_terms(terms)
    elif power != 1:
        raise ValueError("power must be 1 or 2")
    sigma, offset = tail.y_map(L)
    wy = _weight_in_y(weight_local, lo, sigma, offset)
    ya = sigma * lo + offset
    yb = INF if math.isinf(hi) else sigma * hi + offset
    ylo, yhi = (ya, yb) if ya <= yb else (yb, ya)
    return power_terms_integral(terms, wy, max(ylo, 0.0), yhi)


def _as_float_tuple(seq):
    return tuple(float(v) for v in seq)


def _check_grid(grid, what):
    g = np.asarray(grid, dtype=float)
    if g.size and np.any(np.diff(g) <= 0):
        raise DomainError(f"{what} grid must be strictly increasing")
    return g


# --------------------------------------------------------------------------
# anti-derivatives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AntiDerivative:
    """Real locally square integrable function: piecewise polynomial plus tail."""

    length: float
    grid: tuple
    segments: tuple
    tail: Tail | None = None

    def __post_init__(self):
        L = check_length(self.length)
        object.__setattr__(self, "length", L)
        object.__setattr__(self, "grid", _as_float_tuple(self.grid))
        object.__setattr__(self, "segments", tuple(_as_float_tuple(s) or (0.0,) for s in self.segments))
        g = _check_grid(self.grid, "anti-derivative")
        if g.size == 0 or g[0] != 0.0:
            raise DomainError("anti-derivative grid must start at 0")
        if len(self.segments) != g.size - 1:
            raise DomainError("need exactly one segment per grid interval")
        for s in self.segments:
            if len(s) - 1 > MAX_W_DEGREE:
                raise ModelClassError(f"segment degree exceeds {MAX_W_DEGREE}")
            if not all(math.isfinite(v) for v in s):
                raise DomainError("segment coefficients must be finite")
        end, tail = g[-1], self.tail
        if not is_finite_length(L):
            if not isinstance(tail, (ConstantTail, PowerTail, GrowthTail)):
                raise ModelClassError("half-line anti-derivative needs a constant, power or growth tail")
            if isinstance(tail, PowerTail) and (tail.alpha <= 0 or end + tail.shift <= 0):
                raise ModelClassError("power tail needs alpha > 0 and grid end + shift > 0")
            if isinstance(tail, GrowthTail) and (tail.gamma <= 0 or end + tail.shift < 0):
                raise ModelClassError("growth tail needs gamma > 0 and grid end + shift >= 0")
        else:
            if tail is None:
                if end != L:
                    raise DomainError("without a tail the grid must reach L")
            elif isinstance(tail, EndpointTail):
                if end >= L:
                    raise DomainError("endpoint tail needs grid end < L")
                if tail.alpha == 0.0:
                    raise ModelClassError("endpoint tail exponent must be non-zero")
            else:
                raise ModelClassError("finite-length anti-derivatives take no tail or an endpoint tail")

    # construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, L, c=0.0):
        L = check_length(L)
        if is_finite_length(L):
            return cls(L, (0.0, L), ((c,),))
        return cls(L, (0.0,), (), ConstantTail(c))

    @classmethod
    def identity(cls, L):
        """``w(x) = x``, the anti-derivative of Lebesgue measure."""
        L = check_length(L)
        if is_finite_length(L):
            return cls(L, (0.0, L), ((0.0, 1.0),))
        return cls(L, (0.0,), (), GrowthTail(0.0, 1.0, 1.0))

    # evaluation -----------------------------------------------------------

    @cached_property
    def _grid(self):
        return np.asarray(self.grid)

    @cached_property
    def _coef(self):
        out = np.zeros((len(self.segments), MAX_W_DEGREE + 1))
        for i, s in enumerate(self.segments):
            out[i, : len(s)] = s
        return out

    @property
    def end(self) -> float:
        return self.grid[-1]

    def __call__(self, x):
        """Left-continuous pointwise values."""
        x = np.asarray(x, dtype=float)
        g, m = self._grid, len(self.segments)
        out = np.empty_like(x)
        in_grid = x <= g[-1] if m else np.zeros(x.shape, dtype=bool)
        if m:
            xi = x[in_grid]
            idx = np.clip(np.searchsorted(g, xi, side="left") - 1, 0, m - 1)
            t = xi - g[idx]
            c = self._coef[idx]
            out[in_grid] = ((c[:, 3] * t + c[:, 2]) * t + c[:, 1]) * t + c[:, 0]
        if np.any(~in_grid):
            out[~in_grid] = _tail_eval(self.tail, x[~in_grid], self.length)
        return out

    def piece_polys(self):
        """Iterate ``(left, right, local_coefficients)`` over the grid segments."""
        for i, s in enumerate(self.segments):
            yield self.grid[i], self.grid[i + 1], np.asarray(s)

    def integral(self, a, b, weight=(1.0,), power=1, shift=0.0) -> float:
        """Exact ``int_a^b weight(x - a) * (w(x) - shift)**power dx``.

        ``weight`` holds polynomial coefficients in the local coordinate
        ``x - a``; ``power`` is 1 or 2.  ``b`` may be ``inf`` on the half line.
        """
        if b <= a:
            return 0.0
        weight = np.asarray(weight, dtype=float)
        g = self.grid
        total = 0.0
        if a < g[-1]:
            i0 = max(int(np.searchsorted(self._grid, a, side="right")) - 1, 0)
            for i in range(i0, len(g) - 1):
                lo, hi = max(a, g[i]), min(b, g[i + 1])
                if g[i] >= b:
                    break
                if hi <= lo:
                    continue
                seg = shift_poly(self.segments[i], lo - g[i])
                seg[0] -= shift
                if power == 2:
                    seg = npoly.polymul(seg, seg)
                total += poly_integral(npoly.polymul(seg, shift_poly(weight, lo - a)), hi - lo)
        if b > g[-1]:
            lo = max(a, g[-1])
            total += _tail_integral(self.tail, self.length, lo, b, shift_poly(weight, lo - a), power, shift)
        return total

    @property
    def is_piecewise_constant(self) -> bool:
        """True when ``w`` is a step function with a constant tail (finite-rank operator)."""
        if any(any(v != 0.0 for v in s[1:]) for s in self.segments):
            return False
        t = self.tail
        if t is None or isinstance(t, ConstantTail):
            return True
        return t.amplitude == 0.0


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerDensity:
    """Density ``B * (x + shift)**(-beta)`` beyond the density grid (half line)."""

    B: float
    beta: float
    shift: float = 0.0
    kind = "power"

    def terms(self, shift: float = 0.0):
        return [(self.B, -self.beta)]

    def y_map(self, L):
        return 1.0, self.shift


@dataclass(frozen=True)
class EndpointDensity:
    """Density ``B * (L - x)**(-beta)`` between the density grid end and ``L``."""

    B: float
    beta: float
    kind = "endpoint"

    def terms(self, shift: float = 0.0):
        return [(self.B, -self.beta)]

    def y_map(self, L):
        return -1.0, L


DensityTail = Union[PowerDensity, EndpointDensity]


def _poly_min_on(coeffs, length):
    """Minimum over [0, length] of a local polynomial."""
    c = np.asarray(coeffs, dtype=float)
    cands = [0.0, length]
    if c.size > 2:
        for r in npoly.polyroots(npoly.polyder(c)):
            if abs(r.imag) < 1e-12 and 0.0 < r.real < length:
                cands.append(r.real)
    return min(npoly.polyval(t, c) for t in cands)


@dataclass(frozen=True)
class MeasureRepr:
    """Borel measure on ``[0, L)``: atoms + piecewise polynomial density + tail.

    ``atoms`` is a tuple of ``(position, weight)`` pairs with strictly
    increasing positions.  The density tail starts at ``density_grid[-1]``.
    """

    length: float
    atoms: tuple = ()
    density_grid: tuple = ()
    density_segments: tuple = ()
    tail: DensityTail | None = None
    nonnegative: bool = True

    def __post_init__(self):
        L = check_length(self.length)
        object.__setattr__(self, "length", L)
        atoms = tuple((float(p), float(wt)) for p, wt in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density_grid", _as_float_tuple(self.density_grid))
        object.__setattr__(self, "density_segments", tuple(_as_float_tuple(s) or (0.0,) for s in self.density_segments))
        pos = np.array([p for p, _ in atoms])
        if pos.size:
            if np.any(np.diff(pos) <= 0):
                raise DomainError("atom positions must be strictly increasing")
            if pos[0] < 0 or pos[-1] >= L:
                raise DomainError("atoms must lie in [0, L)")
            if pos[0] == 0.0:
                warnings.warn("atom at 0 is invisible to the energy space", stacklevel=3)
        if self.nonnegative and any(wt < 0 for _, wt in atoms):
            raise DomainError("non-negative measure has a negative atom")
        dg = _check_grid(self.density_grid, "density")
        if dg.size == 0:
            if self.density_segments or self.tail is not None:
                raise DomainError("density segments or tail need a density grid")
        else:
            if dg[0] < 0 or dg[-1] > L:
                raise DomainError("density grid must lie in [0, L]")
            if len(self.density_segments) != dg.size - 1:
                raise DomainError("need exactly one density segment per grid interval")
        for i, s in enumerate(self.density_segments):
            if len(s) - 1 > MAX_DENSITY_DEGREE:
                raise ModelClassError(f"density degree exceeds {MAX_DENSITY_DEGREE}")
            if self.nonnegative and _poly_min_on(s, dg[i + 1] - dg[i]) < 0:
                raise DomainError("non-negative measure has a negative density piece")
        t = self.tail
        if t is not None:
            start = dg[-1]
            if pos.size and pos[-1] >= start:
                raise DomainError("atoms must lie before the density tail")
            if self.nonnegative and t.B < 0:
                raise DomainError("non-negative measure has a negative tail density")
            if isinstance(t, PowerDensity):
                if is_finite_length(L):
                    raise ModelClassError("power density tails are for the half line")
                if t.beta < 0 or (t.beta > 0 and start + t.shift <= 0):
                    raise ModelClassError("power density needs beta >= 0 and start + shift > 0")
            elif isinstance(t, EndpointDensity):
                if not is_finite_length(L) or start >= L:
                    raise ModelClassError("endpoint density needs finite L and grid end < L")
            else:
                raise ModelClassError(f"unknown density tail {t!r}")

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, L):
        return cls(L)

    @classmethod
    def point_masses(cls, L, positions, weights, nonnegative=True):
        return cls(L, tuple(zip(positions, weights)), nonnegative=nonnegative)

    @classmethod
    def lebesgue(cls, L, scale=1.0):
        L = check_length(L)
        if is_finite_length(L):
            return cls(L, (), (0.0, L), ((scale,),))
        return cls(L, (), (0.0,), (), PowerDensity(scale, 0.0))

    # queries --------------------------------------------------------------

    @property
    def atom_positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.atoms], dtype=float)

    @property
    def atom_weights(self) -> np.ndarray:
        return np.array([wt for _, wt in self.atoms], dtype=float)

    @property
    def tail_start(self):
        return self.density_grid[-1] if self.tail is not None else None

    @property
    def has_density(self) -> bool:
        if any(any(v != 0.0 for v in s) for s in self.density_segments):
            return True
        return self.tail is not None and self.tail.B != 0.0

    @property
    def is_zero(self) -> bool:
        return not self.has_density and all(wt == 0.0 for _, wt in self.atoms)

    @cached_property
    def _density_coef(self):
        out = np.zeros((len(self.density_segments), MAX_DENSITY_DEGREE + 1))
        for i, s in enumerate(self.density_segments):
            out[i, : len(s)] = s
        return out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        dg = np.asarray(self.density_grid)
        m = len(self.density_segments)
        if m:
            inside = (x >= dg[0]) & (x < dg[-1])
            idx = np.clip(np.searchsorted(dg, x[inside], side="right") - 1, 0, m - 1)
            t = x[inside] - dg[idx]
            c = self._density_coef[idx]
            out[inside] = ((c[:, 3] * t + c[:, 2]) * t + c[:, 1]) * t + c[:, 0]
        if self.tail is not None:
            beyond = x >= dg[-1]
            sigma, offset = self.tail.y_map(self.length)
            out[beyond] = self.tail.B * (sigma * x[beyond] + offset) ** (-self.tail.beta)
        return out

    def density_integral(self, a, b, weight=(1.0,)) -> float:
        """Exact ``int_a^b weight(x - a) * density(x) dx`` (weight local at ``a``)."""
        if b <= a or not self.density_grid:
            return 0.0
        weight = np.asarray(weight, dtype=float)
        g = self.density_grid
        total = 0.0
        for i in range(len(g) - 1):
            lo, hi = max(a, g[i]), min(b, g[i + 1])
            if hi <= lo:
                continue
            seg = shift_poly(self.density_segments[i], lo - g[i])
            total += poly_integral(npoly.polymul(seg, shift_poly(weight, lo - a)), hi - lo)
        if self.tail is not None and b > g[-1]:
            lo = max(a, g[-1])
            total += _tail_integral(self.tail, self.length, lo, b, shift_poly(weight, lo - a), 1, 0.0)
        return total

    def integral(self, a, b, weight=(1.0,)) -> float:
        """``int_[a, b) weight(x - a) dm(x)``, atoms included on the half-open interval."""
        total = self.density_integral(a, b, weight)
        for p, wt in self.atoms:
            if a <= p < b:
                total += wt * npoly.polyval(p - a, weight)
        return total

    def mass(self, a=0.0, b=None) -> float:
        """Measure of ``[a, b)``; ``b`` defaults to ``L``."""
        return self.integral(a, self.length if b is None else b)

    def moment(self, weight_global) -> float:
        """``int_[0, L) P(x) dm(x)`` for a global-coordinate polynomial ``P``."""
        return self.integral(0.0, self.length, weight_global)


# --------------------------------------------------------------------------
# strings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GIString:
    """Generalized indefinite string ``(L, omega, upsilon)``."""

    L: float
    w: AntiDerivative
    upsilon: MeasureRepr

    def __post_init__(self):
        L = check_length(self.L)
        object.__setattr__(self, "L", L)
        if self.w.length != L or self.upsilon.length != L:
            raise DomainError("length mismatch between L, w and upsilon")
        if not self.upsilon.nonnegative:
            raise DomainError("upsilon must be a non-negative measure")

    @property
    def is_finite(self) -> bool:
        return is_finite_length(self.L)

    @classmethod
    def from_measures(cls, omega: MeasureRepr, upsilon: MeasureRepr | None = None):
        L = omega.length
        return cls(L, anti_derivative_of_measure(omega, L), upsilon or MeasureRepr.zero(L))

    @classmethod
    def point_masses(cls, L, positions, omega_weights, upsilon_weights=None):
        L = check_length(L)
        omega = MeasureRepr.point_masses(L, positions, omega_weights, nonnegative=False)
        if upsilon_weights is None:
            ups = MeasureRepr.zero(L)
        else:
            keep = [(p, u) for p, u in zip(positions, upsilon_weights) if u != 0.0]
            ups = MeasureRepr(L, tuple(keep))
        return cls(L, anti_derivative_of_measure(omega, L), ups)

    def breakpoints(self) -> np.ndarray:
        """All positions where the coefficients change form (for node placement)."""
        pts = set(self.w.grid)
        pts.update(self.upsilon.atom_positions.tolist())
        pts.update(self.upsilon.density_grid)
        pts.add(0.0)
        pts.discard(self.L)
        return np.array(sorted(p for p in pts if p < self.L))


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


def anti_derivative_of_measure(m: MeasureRepr, L=None) -> AntiDerivative:
    """Left-continuous distribution function ``q(x) = m([0, x))``."""
    L = m.length if L is None else check_length(L)
    if L != m.length:
        raise DomainError("measure is defined on a different interval")
    finite = is_finite_length(L)
    pts = {0.0}
    pts.update(m.atom_positions.tolist())
    pts.update(m.density_grid)
    if m.tail is not None:
        end = m.tail_start
    elif finite:
        end = L
        pts.add(L)
    else:
        end = max(pts)
    grid = sorted(p for p in pts if p <= end)
    segments = []
    dg = m.density_grid
    for lo, hi in zip(grid[:-1], grid[1:]):
        base = float(m.mass(0.0, lo)) + sum(wt for p, wt in m.atoms if p == lo)
        seg = np.zeros(MAX_W_DEGREE + 1)
        seg[0] = base
        if dg and dg[0] <= lo < dg[-1]:
            j = int(np.searchsorted(dg, lo, side="right")) - 1
            dens = shift_poly(m.density_segments[j], lo - dg[j])
            integ = npoly.polyint(dens)
            seg[: integ.size] += integ
        segments.append(tuple(np.trim_zeros(seg, "b")) or (0.0,))
    total_before_end = float(m.mass(0.0, end) + sum(wt for p, wt in m.atoms if p == end))
    t = m.tail
    if not finite:
        if t is None:
            tail = ConstantTail(total_before_end)
        else:
            B, beta, s = t.B, t.beta, t.shift
            y0 = end + s
            if beta == 1.0:
                raise ModelClassError("logarithmic anti-derivative (tail exponent 1) is outside the model class")
            if beta > 1.0:
                tail = PowerTail(total_before_end + B * y0 ** (1 - beta) / (beta - 1), -B / (beta - 1), beta - 1, s)
            else:
                tail = GrowthTail(total_before_end - B * y0 ** (1 - beta) / (1 - beta), B / (1 - beta), 1 - beta, s)
    elif t is None:
        tail = None
    else:
        B, beta = t.B, t.beta
        if beta == 1.0:
            raise ModelClassError("logarithmic anti-derivative (tail exponent 1) is outside the model class")
        y0 = L - end
        tail = EndpointTail(total_before_end + B * y0 ** (1 - beta) / (1 - beta), -B / (1 - beta), beta - 1)
    return AntiDerivative(L, tuple(grid), tuple(segments), tail)


@dataclass(frozen=True)
class CompactPiecewise:
    """Continuous piecewise polynomial with compact support (zero beyond the grid)."""

    grid: tuple
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "grid", _as_float_tuple(self.grid))
        object.__setattr__(self, "segments", tuple(_as_float_tuple(s) or (0.0,) for s in self.segments))
        g = _check_grid(self.grid, "test function")
        if len(self.segments) != g.size - 1 or g.size < 2:
            raise DomainError("need one segment per grid interval")
        scale = max(1.0, max(abs(v) for s in self.segments for v in s))
        for i in range(len(self.segments) - 1):
            left = npoly.polyval(g[i + 1] - g[i], self.segments[i])
            if abs(left - self.segments[i + 1][0]) > 1e-12 * scale:
                raise DomainError("test function must be continuous")
        if abs(npoly.polyval(g[-1] - g[-2], self.segments[-1])) > 1e-12 * scale:
            raise DomainError("test function must vanish at the end of its support")

    @classmethod
    def tent(cls, a, peak, b, height=1.0):
        """Piecewise linear hat rising from ``a`` to ``height`` at ``peak`` and back to 0 at ``b``."""
        if a == peak:
            return cls((peak, b), ((height, -height / (b - peak)),))
        return cls((a, peak, b), ((0.0, height / (peak - a)), (height, -height / (b - peak))))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g = np.asarray(self.grid)
        out = np.zeros_like(x)
        inside = (x >= g[0]) & (x <= g[-1])
        idx = np.clip(np.searchsorted(g, x[inside], side="right") - 1, 0, len(self.segments) - 1)
        out[inside] = [npoly.polyval(t, self.segments[i]) for t, i in zip(x[inside] - g[idx], idx)]
        return out


def pair_distribution(w: AntiDerivative, h: CompactPiecewise) -> float:
    """``chi(h) = -int w h' dx`` for the distribution with anti-derivative ``w``."""
    if h.grid[0] < 0.0 or h.grid[-1] >= w.length:
        raise DomainError("test function support must be a compact subset of [0, L)")
    total = 0.0
    for lo, hi, seg in zip(h.grid[:-1], h.grid[1:], h.segments):
        total -= w.integral(lo, hi, npoly.polyder(seg) if len(seg) > 1 else (0.0,))
    return total


def kernel_delta(x, t, L):
    """Reproducing kernel ``min(x, t) * (1 - max(x, t) / L)`` of the energy space."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.minimum(x, t) * (1.0 - np.maximum(x, t) / L)


def cesaro_mean_limit(w: AntiDerivative):
    """Closed-form ``lim (1/x) int_0^x w``; ``None`` when the limit is infinite."""
    if is_finite_length(w.length):
        raise UsageError("the mean-value constant is only defined for L = inf")
    return w.tail.limit_constant()
