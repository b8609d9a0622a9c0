"""Exact spectra for strings whose coefficients are finitely many point masses.

Between atoms every solution is linear, so the eigenfunctions are determined
by their values at the atoms.  The energy restricted to such functions is a
tridiagonal matrix; the spectrum follows from a small symmetric-definite
eigenproblem.  This module shares no code with the Galerkin path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .coefficients import DomainError, GIString, check_length


@dataclass(frozen=True, eq=False)
class PointMassProblem:
    """``omega = sum w_k delta_{x_k}``, ``upsilon = sum u_k delta_{x_k}`` on ``[0, L)``."""

    L: float
    positions: np.ndarray
    omega_weights: np.ndarray
    upsilon_weights: np.ndarray | None = None

    def __post_init__(self):
        L = check_length(self.L)
        x = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.omega_weights, dtype=float)
        u = np.zeros_like(x) if self.upsilon_weights is None else np.asarray(self.upsilon_weights, dtype=float)
        if x.ndim != 1 or x.size < 1 or w.shape != x.shape or u.shape != x.shape:
            raise DomainError("need matching non-empty position and weight arrays")
        if x[0] <= 0 or np.any(np.diff(x) <= 0) or x[-1] >= L:
            raise DomainError("positions must be strictly increasing inside (0, L)")
        if np.any(u < 0):
            raise DomainError("upsilon weights must be non-negative")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "omega_weights", w)
        object.__setattr__(self, "upsilon_weights", u)

    @property
    def N(self) -> int:
        return self.positions.size

    def to_string(self) -> GIString:
        return GIString.point_masses(self.L, self.positions, self.omega_weights, self.upsilon_weights)


def atom_stiffness(p: PointMassProblem) -> np.ndarray:
    """Energy ``int f'^2`` of piecewise linear ``f`` in terms of its atom values."""
    x = p.positions
    gaps = np.diff(np.concatenate([[0.0], x]))
    inv = 1.0 / gaps
    diag = inv.copy()
    diag[:-1] += inv[1:]
    if math.isfinite(p.L):
        diag[-1] += 1.0 / (p.L - x[-1])
    K = np.diag(diag)
    off = -inv[1:]
    K[np.arange(p.N - 1), np.arange(1, p.N)] = off
    K[np.arange(1, p.N), np.arange(p.N - 1)] = off
    return K


def reciprocal_eigenvalues(p: PointMassProblem) -> np.ndarray:
    """All non-zero ``mu = 1/lambda`` of ``K v = lambda W v + lambda^2 U v``."""
    K = atom_stiffness(p)
    w, u = p.omega_weights, p.upsilon_weights
    r = np.flatnonzero(u > 0)
    N, m = p.N, r.size
    lhs = np.zeros((N + m, N + m))
    rhs = np.zeros((N + m, N + m))
    lhs[:N, :N] = np.diag(w)
    lhs[r, N + np.arange(m)] = u[r]
    lhs[N + np.arange(m), r] = u[r]
    rhs[:N, :N] = K
    rhs[N + np.arange(m), N + np.arange(m)] = u[r]
    mu = sla.eigh(lhs, rhs, eigvals_only=True)
    cut = 1e3 * np.finfo(float).eps * np.max(np.abs(mu), initial=0.0)
    return mu[np.abs(mu) > cut]


def oracle_spectrum(p: PointMassProblem) -> np.ndarray:
    """Exact eigenvalues, sorted ascending."""
    return np.sort(1.0 / reciprocal_eigenvalues(p))


def oracle_trace_sums(p: PointMassProblem) -> tuple[float, float]:
    """``(sum 1/lambda, sum 1/lambda^2)``."""
    mu = reciprocal_eigenvalues(p)
    return float(mu.sum()), float((mu**2).sum())


def random_problem(rng: np.random.Generator, L: float, n_max: int = 12, with_upsilon: bool = True) -> PointMassProblem:
    """Random instance: mixed-sign omega weights, optional non-negative upsilon weights."""
    N = int(rng.integers(1, n_max + 1))
    top = L if math.isfinite(L) else float(rng.uniform(1.0, 10.0))
    x = np.sort(rng.uniform(0.02 * top, 0.98 * top, N))
    while np.any(np.diff(x) < 1e-3 * top):
        x = np.sort(rng.uniform(0.02 * top, 0.98 * top, N))
    w = rng.uniform(0.2, 2.0, N) * rng.choice([-1.0, 1.0], N)
    u = rng.uniform(0.0, 2.0, N) * (rng.random(N) < 0.5) if with_upsilon else np.zeros(N)
    return PointMassProblem(L, x, w, u)
