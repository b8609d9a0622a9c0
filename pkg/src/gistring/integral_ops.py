"""Max-kernel and min-kernel integral operators on step functions.

The derivative map ``f -> f'`` carries the energy space onto ``L^2`` and hat
functions onto step functions.  Under it the pairing operator of a
distribution with anti-derivative ``q`` becomes ``-J`` on the half line
(kernel ``q(max(x, t)) - c``) and ``P J_L P`` on ``[0, L)`` (kernel
``q(min(x, t))`` compressed to mean-zero functions).  Compressing both sides
to matched grids therefore gives the same spectrum up to sign, which is what
:func:`crossvalidate` checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (
    AntiDerivative,
    GIString,
    MeasureRepr,
    UsageError,
    anti_derivative_of_measure,
    cesaro_mean_limit,
    is_finite_length,
)
from .discretization import build_galerkin, default_nodes, whiten

# Maps an eigenvalue of the K-side to the matching J-side eigenvalue.
HALFLINE_SIGN = -1.0
FINITE_SIGN = 1.0


@dataclass(frozen=True)
class DiscretizedJ:
    """Compression of J (half line) or J_L (finite interval) to step functions.

    ``matrix`` is expressed in the orthonormal basis ``1_cell / sqrt(h)``.
    For the finite interval it is ``P J_L P``; ``unprojected`` keeps ``J_L``.
    With ``mean_zero`` set on the half line the matrix is compressed further
    to step functions of zero mean.
    """

    grid: np.ndarray
    matrix: np.ndarray
    finite: bool
    c: float = 0.0
    unprojected: np.ndarray | None = None
    mean_zero: bool = False

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def singular_values(self) -> np.ndarray:
        return np.sort(np.abs(np.linalg.eigvalsh(self.matrix)))[::-1]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def frobenius_sq(self, projected: bool = True) -> float:
        m = self.matrix if projected or self.unprojected is None else self.unprojected
        return float(np.sum(m * m))

    def trace(self, projected: bool = False) -> float:
        m = self.unprojected if (not projected and self.unprojected is not None) else self.matrix
        return float(np.trace(m))


def _cell_grid(grid, end=None) -> np.ndarray:
    g = np.unique(np.asarray(grid, dtype=float))
    if g.size == 0 or g[0] != 0.0:
        g = np.concatenate([[0.0], g[g > 0]])
    if end is not None and g[-1] != end:
        g = np.concatenate([g[g < end], [end]])
    if g.size < 2:
        raise UsageError("grid needs at least one cell")
    return g


def _assemble(h, off, diag, upper_from_right: bool) -> np.ndarray:
    """Symmetric matrix with entries built from cell integrals.

    ``upper_from_right``: entry (i, j), i < j, is ``sqrt(h_i) off_j / sqrt(h_j)``
    (max kernel); otherwise ``off_i sqrt(h_j) / sqrt(h_i)`` (min kernel).
    """
    rh = np.sqrt(h)
    if upper_from_right:
        U = np.outer(rh, off / rh)
    else:
        U = np.outer(off / rh, rh)
    M = np.triu(U, 1)
    M = M + M.T
    M[np.diag_indices_from(M)] = diag
    return M


def _cell_moments(q: AntiDerivative, a, b, weight_kind: str, shift: float = 0.0) -> np.ndarray:
    """Per-cell ``int (q - shift) * weight`` with weight 1, ``x - a`` or ``b - x``.

    Cells lying inside one polynomial piece are integrated in closed form in a
    vectorized way; anything else falls back to :meth:`AntiDerivative.integral`.
    """
    h = b - a
    out = np.empty(a.size)
    qg = np.asarray(q.grid)
    idx = np.searchsorted(qg, a, side="right") - 1
    inside = (idx >= 0) & (idx < len(q.segments)) & (b <= qg[np.minimum(idx + 1, qg.size - 1)])
    if np.any(inside):
        coef = np.zeros((len(q.segments), 4))
        for i, seg in enumerate(q.segments):
            coef[i, : len(seg)] = seg
        ii = idx[inside]
        d = a[inside] - qg[ii]
        hh = h[inside]
        c = coef[ii]
        # re-expand each cubic about the cell's left end, then integrate against the weight
        c0 = c[:, 0] + d * (c[:, 1] + d * (c[:, 2] + d * c[:, 3])) - shift
        c1 = c[:, 1] + d * (2 * c[:, 2] + 3 * d * c[:, 3])
        c2 = c[:, 2] + 3 * d * c[:, 3]
        c3 = c[:, 3]
        m0 = c0 * hh + c1 * hh**2 / 2 + c2 * hh**3 / 3 + c3 * hh**4 / 4
        m1 = c0 * hh**2 / 2 + c1 * hh**3 / 3 + c2 * hh**4 / 4 + c3 * hh**5 / 5
        if weight_kind == "one":
            out[inside] = m0
        elif weight_kind == "left":
            out[inside] = m1
        else:
            out[inside] = hh * m0 - m1
    weights = {"one": lambda lo, hi: (1.0,), "left": lambda lo, hi: (0.0, 1.0), "right": lambda lo, hi: (hi - lo, -1.0)}
    for k in np.nonzero(~inside)[0]:
        out[k] = q.integral(a[k], b[k], weights[weight_kind](a[k], b[k]), shift=shift)
    return out


def _mean_zero_projector(h, total) -> np.ndarray:
    v = np.sqrt(h / total)
    return np.eye(h.size) - np.outer(v, v)


def build_J(q: AntiDerivative, grid, mean_zero: bool = False) -> DiscretizedJ:
    """Half-line max-kernel operator ``int (q(max(x, t)) - c) f(t) dt`` on the cells of ``grid``.

    Entries are exact cell integrals of the piecewise polynomial ``q``; breakpoints
    of ``q`` should be grid points for the compression to be exact on step ``q``.
    """
    if is_finite_length(q.length):
        raise UsageError("build_J needs a half-line anti-derivative; use build_JL")
    c = cesaro_mean_limit(q)
    if c is None:
        raise UsageError("the mean-value constant does not exist; J is unbounded")
    g = _cell_grid(grid)
    a, b = g[:-1], g[1:]
    h = b - a
    cell = _cell_moments(q, a, b, "one", c)
    diag = 2.0 * _cell_moments(q, a, b, "left", c) / h
    M = _assemble(h, cell, diag, upper_from_right=True)
    if mean_zero:
        P = _mean_zero_projector(h, g[-1])
        M = P @ M @ P
    return DiscretizedJ(g, M, False, float(c), None, mean_zero)


def build_JL(qL: AntiDerivative, L=None, grid=None) -> DiscretizedJ:
    """Finite-interval min-kernel operator ``J_L`` compressed to steps, then ``P J_L P``."""
    L = qL.length if L is None else float(L)
    if not is_finite_length(L):
        raise UsageError("build_JL needs a finite length")
    g = _cell_grid(np.linspace(0.0, L, 65) if grid is None else grid, end=L)
    a, b = g[:-1], g[1:]
    h = b - a
    cell = _cell_moments(qL, a, b, "one")
    diag = 2.0 * _cell_moments(qL, a, b, "right") / h
    J = _assemble(h, cell, diag, upper_from_right=False)
    P = _mean_zero_projector(h, L)
    return DiscretizedJ(g, P @ J @ P, True, 0.0, J, True)


def closed_form_hs_sq(q: AntiDerivative, c=None) -> float:
    """``2 int x (q - c)^2`` (half line) or ``2 int (L - x) q^2`` (finite, unprojected)."""
    if is_finite_length(q.length):
        L = q.length
        return 2.0 * q.integral(0.0, L, (L, -1.0), power=2)
    c = cesaro_mean_limit(q) if c is None else c
    if c is None:
        return math.inf
    return 2.0 * q.integral(0.0, math.inf, (0.0, 1.0), power=2, shift=c)


def closed_form_trace(q: AntiDerivative, c=None) -> float:
    """``int (q - c)`` (half line) or ``int q`` (finite, unprojected)."""
    if is_finite_length(q.length):
        return q.integral(0.0, q.length)
    c = cesaro_mean_limit(q) if c is None else c
    if c is None:
        return math.inf
    return q.integral(0.0, math.inf, shift=c)


def _as_anti_derivative(chi) -> AntiDerivative:
    if isinstance(chi, MeasureRepr):
        return anti_derivative_of_measure(chi)
    if isinstance(chi, AntiDerivative):
        return chi
    raise TypeError("expected a MeasureRepr or an AntiDerivative")


def pairing_operator_eigenvalues(q: AntiDerivative, nodes, plateau=None) -> np.ndarray:
    """Eigenvalues of the whitened Galerkin pairing matrix on ``nodes``."""
    s = GIString(q.length, q, MeasureRepr.zero(q.length))
    g = build_galerkin(s, nodes, plateau=plateau)
    return np.linalg.eigvalsh(whiten(g).K_omega)


@dataclass
class CrossvalLevel:
    n: int
    size: int
    top_j: list
    top_k: list
    deviation: float
    signed_deviation: float
    reference_deviation: float | None
    frobenius_sq: float
    trace: float


@dataclass
class CrossvalReport:
    hs_closed_form: float
    trace_closed_form: float
    tol: float
    levels: list = field(default_factory=list)

    @property
    def finest(self) -> CrossvalLevel:
        return self.levels[-1]

    @property
    def hs_rel_error(self) -> float:
        return abs(self.finest.frobenius_sq - self.hs_closed_form) / max(abs(self.hs_closed_form), 1e-300)

    @property
    def passed(self) -> bool:
        f = self.finest
        worst = max(f.deviation, f.reference_deviation or 0.0)
        return worst <= self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "hs_closed_form": self.hs_closed_form,
            "hs_rel_error": self.hs_rel_error,
            "trace_closed_form": self.trace_closed_form,
            "levels": [vars(lv) for lv in self.levels],
        }


def _top(vals, k):
    out = np.sort(np.abs(vals))[::-1][:k]
    return np.pad(out, (0, k - out.size))


def crossvalidate(chi, ladder=(256, 1024), k: int = 10, tol: float = 1e-8, reference=None, extent=None) -> CrossvalReport:
    """Compare J-side singular values with the pairing operator on matched grids.

    ``reference`` (optional) lists exact singular values, largest first.
    Deviations are measured relative to the largest singular value, so that
    the many tiny trailing values do not dominate the comparison.
    """
    q = _as_anti_derivative(chi)
    finite = is_finite_length(q.length)
    s = GIString(q.length, q, MeasureRepr.zero(q.length))
    c = None if finite else cesaro_mean_limit(q)
    report = CrossvalReport(closed_form_hs_sq(q, c), closed_form_trace(q, c), tol)
    for n in ladder:
        nodes = default_nodes(s, n, extent)
        if finite:
            dj = build_JL(q, grid=nodes)
            mu_k = pairing_operator_eigenvalues(q, nodes)
            sign = FINITE_SIGN
        else:
            dj = build_J(q, nodes)
            mu_k = pairing_operator_eigenvalues(q, nodes, plateau=True)
            sign = HALFLINE_SIGN
        mu_j = dj.eigenvalues()
        top_j, top_k = _top(mu_j, k), _top(mu_k, k)
        scale = max(top_j[0], top_k[0], 1e-300)
        dev = float(np.max(np.abs(top_j - top_k)) / scale)
        # signed check: J spectrum is the (sign-flipped) K spectrum padded by zeros
        sj = np.sort(mu_j)
        sk = np.sort(np.concatenate([sign * mu_k, np.zeros(mu_j.size - mu_k.size)]))
        sdev = float(np.max(np.abs(sj - sk)) / scale) if sj.size == sk.size else math.nan
        ref_dev = None
        if reference is not None:
            ref = np.asarray(reference, dtype=float)[:k]
            m = ref.size
            ref_dev = float(np.max(np.abs(top_j[:m] - ref)) / max(ref[0], 1e-300))
        report.levels.append(
            CrossvalLevel(
                int(n), dj.size, top_j.tolist(), top_k.tolist(), dev, sdev, ref_dev,
                dj.frobenius_sq(projected=not finite),
                dj.trace(),
            )
        )
    return report
