"""Galerkin models of the energy space and the whitened block matrix.

The trial space is spanned by piecewise linear hats on a node list.  On the
half line the last node carries a plateau function (ramp on the last element,
identically one beyond it), so that functions need not vanish at infinity.
For that element the pairing with ``omega`` is written against ``w - c``
where ``c`` is the mean-value constant of ``w``; this folds the mass of
``omega`` beyond the last node into the assembly exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from ._numerics import gauss_unit
from .coefficients import (
    DomainError,
    EndpointDensity,
    EndpointTail,
    GIString,
    GrowthTail,
    ModelClassError,
    PowerDensity,
    PowerTail,
    UsageError,
)

CLIP_TOL = 1e-10
SYM_TOL = 1e-13


class MissingNodeError(DomainError):
    """A coefficient breakpoint or atom is not among the nodes."""


class NotPSDError(ArithmeticError):
    """Matrix has an eigenvalue below the negative clipping threshold."""


class AssemblyError(RuntimeError):
    """Stiffness matrix failed to be positive definite."""


@dataclass(frozen=True, eq=False)
class GalerkinModel:
    """Stiffness ``A`` and pairings ``B`` (omega), ``C`` (upsilon) on a hat basis."""

    L: float
    nodes: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    shift: float
    plateau: bool

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def dof_nodes(self) -> np.ndarray:
        return self.nodes[1 : 1 + self.size]


@dataclass(frozen=True, eq=False)
class WhitenedPencil:
    """``M = [[K_omega, S V_r], [V_r^T S, 0]]`` restricted to the range of ``K_upsilon``."""

    K_omega: np.ndarray
    K_upsilon: np.ndarray
    S: np.ndarray
    M: np.ndarray
    upsilon_rank: int
    asymmetry: float = field(default=0.0)


# --------------------------------------------------------------------------
# nodes
# --------------------------------------------------------------------------


def required_points(s: GIString, extent: float | None = None) -> np.ndarray:
    """Breakpoints and atoms that must be nodes (up to ``extent``)."""
    pts = s.breakpoints()
    top = s.L if extent is None else extent
    return pts[(pts > 0) & (pts <= top)]


def default_extent(s: GIString) -> float:
    """Truncation point for half-line models: the last breakpoint, or 1."""
    pts = s.breakpoints()
    return float(max(pts.max(initial=0.0), 1.0))


def default_nodes(s: GIString, n: int = 64, extent: float | None = None) -> np.ndarray:
    """Union of coefficient breakpoints with ``n`` uniform elements."""
    if n < 1:
        raise ValueError("need at least one element")
    if s.is_finite:
        top = s.L
    else:
        top = default_extent(s) if extent is None else float(extent)
    uniform = np.linspace(0.0, top, n + 1)
    must = required_points(s, top)
    if must.size:
        # drop uniform points that would create sliver elements next to a breakpoint
        k = np.clip(np.searchsorted(must, uniform), 1, must.size) - 1
        near = np.minimum(np.abs(uniform - must[k]), np.abs(uniform - must[np.minimum(k + 1, must.size - 1)]))
        keep = (near > 0.05 * top / n) | (uniform == 0.0) | (uniform == top)
        uniform = uniform[keep]
    pts = np.union1d(uniform, must)
    return pts[pts <= top]


def refine_nodes(nodes) -> np.ndarray:
    """Insert all element midpoints."""
    nodes = np.asarray(nodes, dtype=float)
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    return np.sort(np.concatenate([nodes, mids]))


def _prepare_nodes(s: GIString, nodes) -> np.ndarray:
    t = np.unique(np.asarray(nodes, dtype=float))
    if t.size == 0 or t[0] < 0:
        raise DomainError("nodes must be non-negative")
    if t[0] != 0.0:
        t = np.concatenate([[0.0], t])
    if s.is_finite:
        if t[-1] > s.L:
            raise DomainError("nodes must lie in [0, L]")
        if t[-1] != s.L:
            t = np.concatenate([t, [s.L]])
        if t.size < 3:
            raise DomainError("need at least one interior node")
    elif t.size < 2:
        raise DomainError("need at least one positive node")
    must = required_points(s, t[-1])
    missing = np.setdiff1d(must, t)
    if missing.size:
        raise MissingNodeError(f"breakpoints/atoms missing from the nodes: {missing[:5].tolist()}")
    return t


# --------------------------------------------------------------------------
# element integrals
# --------------------------------------------------------------------------

# local weights (in x - a) such that B_loc = int (w - shift) * weight and
# C_loc = int density * weight, entries ordered (00, 01, 11)
_B_WEIGHTS = (
    lambda h: (2.0 / h, -2.0 / h**2),
    lambda h: (-1.0 / h, 2.0 / h**2),
    lambda h: (0.0, -2.0 / h**2),
)
_C_WEIGHTS = (
    lambda h: (1.0, -2.0 / h, 1.0 / h**2),
    lambda h: (0.0, 1.0 / h, -1.0 / h**2),
    lambda h: (0.0, 0.0, 1.0 / h**2),
)


def _gauss_omega(w, shift, a, h, order):
    xi, wq = gauss_unit(order)
    g = w(a[:, None] + h[:, None] * xi[None, :]) - shift
    return np.stack(
        [2.0 * (g * (1 - xi)) @ wq, -(g * (1 - 2 * xi)) @ wq, -2.0 * (g * xi) @ wq], axis=1
    )


def _gauss_upsilon(ups, a, h, order):
    xi, wq = gauss_unit(order)
    r = ups.density(a[:, None] + h[:, None] * xi[None, :])
    return h[:, None] * np.stack(
        [(r * (1 - xi) ** 2) @ wq, (r * xi * (1 - xi)) @ wq, (r * xi**2) @ wq], axis=1
    )


def _singular_distance(tail, L, a, b):
    """Distance from the element to the point where the tail model is singular."""
    if isinstance(tail, (EndpointTail, EndpointDensity)):
        return L - b
    if isinstance(tail, (PowerTail, GrowthTail, PowerDensity)):
        return a + tail.shift
    return math.inf


def _element_modes(a, b, tail_start, tail, L):
    """0 = polynomial part, 1 = smooth tail (16 pt Gauss), 2 = closed form."""
    h = b - a
    mode = np.zeros(a.size, dtype=int)
    if tail is None or tail_start is None:
        return mode
    in_tail = a >= tail_start
    mode[in_tail] = 1
    dist = np.array([_singular_distance(tail, L, x, y) for x, y in zip(a, b)])
    mode[in_tail & (dist < h)] = 2
    return mode


def _omega_locals(s, shift, a, b, last_dirichlet):
    w = s.w
    h = b - a
    out = np.zeros((a.size, 3))
    mode = _element_modes(a, b, w.end, w.tail, s.L)
    for m, order in ((0, 4), (1, 16)):
        sel = mode == m
        if np.any(sel):
            out[sel] = _gauss_omega(w, shift, a[sel], h[sel], order)
    for i in np.flatnonzero(mode == 2):
        wanted = (0,) if (last_dirichlet and i == a.size - 1) else (0, 1, 2)
        for k in wanted:
            out[i, k] = w.integral(a[i], b[i], _B_WEIGHTS[k](h[i]), shift=shift)
    return out


def _upsilon_locals(s, a, b, last_dirichlet):
    ups = s.upsilon
    h = b - a
    out = np.zeros((a.size, 3))
    if not ups.density_grid:
        return out
    mode = _element_modes(a, b, ups.tail_start, ups.tail, s.L)
    for m, order in ((0, 4), (1, 16)):
        sel = mode == m
        if np.any(sel):
            out[sel] = _gauss_upsilon(ups, a[sel], h[sel], order)
    for i in np.flatnonzero(mode == 2):
        wanted = (0,) if (last_dirichlet and i == a.size - 1) else (0, 1, 2)
        for k in wanted:
            out[i, k] = ups.density_integral(a[i], b[i], _C_WEIGHTS[k](h[i]))
    return out


def _scatter(n, dof_left, dof_right, local):
    M = np.zeros((n, n))
    ok_l = dof_left >= 0
    ok_r = dof_right >= 0
    np.add.at(M, (dof_left[ok_l], dof_left[ok_l]), local[ok_l, 0])
    both = ok_l & ok_r
    np.add.at(M, (dof_left[both], dof_right[both]), local[both, 1])
    np.add.at(M, (dof_right[both], dof_left[both]), local[both, 1])
    np.add.at(M, (dof_right[ok_r], dof_right[ok_r]), local[ok_r, 2])
    return M


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------


def build_galerkin(s: GIString, nodes, plateau: bool | None = None) -> GalerkinModel:
    """Assemble ``A``, ``B`` and ``C`` for the hat basis on ``nodes``.

    On the half line ``plateau=None`` picks the plateau element whenever the
    mean-value constant exists and ``upsilon`` has finite mass beyond the last
    node; otherwise the model is truncated with a zero condition at the last
    node (a conforming subspace, but no longer exact for tail mass).
    """
    t = _prepare_nodes(s, nodes)
    a, b = t[:-1], t[1:]
    n_el = a.size
    shift = 0.0
    if s.is_finite:
        use_plateau = False
        n = n_el - 1
    else:
        c = s.w.tail.limit_constant()
        tail_mass = s.upsilon.mass(t[-1], math.inf)
        can = c is not None and math.isfinite(tail_mass)
        if plateau is None:
            use_plateau = can
        elif plateau and not can:
            raise UsageError("plateau element needs a finite mean-value constant and finite tail mass of upsilon")
        else:
            use_plateau = bool(plateau)
        if use_plateau:
            shift = c
            n = n_el
        else:
            n = n_el - 1
        if n < 1:
            raise DomainError("model has no degrees of freedom; add nodes")
    idx = np.arange(n_el)
    dof_left = idx - 1  # node k has dof k - 1
    dof_right = idx.copy()
    dof_right[dof_right >= n] = -1
    last_dirichlet = not use_plateau

    h = b - a
    A_loc = np.stack([1.0 / h, -1.0 / h, 1.0 / h], axis=1)
    A = _scatter(n, dof_left, dof_right, A_loc)
    B = _scatter(n, dof_left, dof_right, _omega_locals(s, shift, a, b, last_dirichlet))
    C = _scatter(n, dof_left, dof_right, _upsilon_locals(s, a, b, last_dirichlet))
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(C))):
        raise ModelClassError("coefficients too singular for the hat basis (non-finite pairing entries)")
    dof_pos = t[1 : n + 1]
    for p, wt in s.upsilon.atoms:
        k = np.searchsorted(dof_pos, p)
        if k < n and dof_pos[k] == p:
            C[k, k] += wt
    if use_plateau:
        C[-1, -1] += s.upsilon.mass(t[-1], math.inf) - sum(wt for p, wt in s.upsilon.atoms if p == t[-1])
    return GalerkinModel(s.L, t, A, B, C, shift, use_plateau)


# --------------------------------------------------------------------------
# whitening
# --------------------------------------------------------------------------


def sqrt_psd(M, clip_tol: float = CLIP_TOL) -> np.ndarray:
    """Spectral square root of a symmetric positive semidefinite matrix."""
    M = np.asarray(M, dtype=float)
    d, V = np.linalg.eigh(0.5 * (M + M.T))
    scale = np.max(np.abs(d), initial=0.0)
    if d.size and d.min() < -clip_tol * scale:
        raise NotPSDError(f"eigenvalue {d.min():.3e} below -{clip_tol:g}*{scale:.3e}")
    return (V * np.sqrt(np.clip(d, 0.0, None))) @ V.T


def _whitening_factor(A):
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise AssemblyError("stiffness matrix is not positive definite") from exc


def _congruence(Lc, X):
    Y = sla.solve_triangular(Lc, X, lower=True)
    return sla.solve_triangular(Lc, Y.T, lower=True).T


def _spectral_norm(X) -> float:
    """Largest |eigenvalue| of the symmetric part (Lanczos for large matrices)."""
    X = 0.5 * (X + X.T)
    if X.shape[0] <= 256:
        return float(np.abs(np.linalg.eigvalsh(X)).max(initial=0.0))
    if not np.any(X):
        return 0.0
    v0 = np.ones(X.shape[0])
    return float(np.abs(spla.eigsh(X, k=1, which="LM", v0=v0, return_eigenvectors=False)).max())


def whiten(g: GalerkinModel, clip_tol: float = CLIP_TOL) -> WhitenedPencil:
    """Cholesky-whiten the pairings and assemble the symmetric block matrix."""
    Lc = _whitening_factor(g.A)
    Kw = _congruence(Lc, g.B)
    Ku = _congruence(Lc, g.C)
    norm = max(_spectral_norm(Kw), _spectral_norm(Ku), np.finfo(float).tiny)
    asym = max(np.abs(Kw - Kw.T).max(initial=0.0), np.abs(Ku - Ku.T).max(initial=0.0)) / norm
    Kw = 0.5 * (Kw + Kw.T)
    Ku = 0.5 * (Ku + Ku.T)
    if not np.any(Ku):
        return WhitenedPencil(Kw, Ku, np.zeros_like(Ku), Kw, 0, asym)
    d, V = np.linalg.eigh(Ku)
    scale = np.max(np.abs(d))
    if d.min() < -clip_tol * scale:
        raise NotPSDError(f"upsilon pairing has eigenvalue {d.min():.3e}")
    keep = d > clip_tol * scale
    S = (V * np.sqrt(np.clip(d, 0.0, None))) @ V.T
    R = V[:, keep] * np.sqrt(d[keep])
    r = R.shape[1]
    n = Kw.shape[0]
    M = np.zeros((n + r, n + r))
    M[:n, :n] = Kw
    M[:n, n:] = R
    M[n:, :n] = R.T
    return WhitenedPencil(Kw, Ku, S, M, r, asym)


def galerkin_hat_values(nodes, dof_count: int, plateau: bool, x) -> np.ndarray:
    """Matrix of basis values ``phi_j(x_i)`` for the model's basis (used in tests)."""
    t = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.size, dof_count))
    for j in range(dof_count):
        k = j + 1
        vals = np.zeros(t.size)
        vals[k] = 1.0
        out[:, j] = np.interp(x, t, vals)
        if plateau and j == dof_count - 1:
            out[x >= t[k], j] = 1.0
    return out
