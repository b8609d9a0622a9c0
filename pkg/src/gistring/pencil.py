"""Spectra of strings from the whitened block matrix, with a quadratic-pencil cross-check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .coefficients import GIString
from .discretization import GalerkinModel, build_galerkin, default_nodes, refine_nodes, whiten

MU_CUT_FACTOR = 1e3
IMAG_TOL = 1e-8


class PencilError(ArithmeticError):
    """The generalized eigensolver returned genuinely complex eigenvalues."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted real eigenvalues of a discretized string and how they were obtained."""

    eigenvalues: np.ndarray
    mu_cut: float
    n: int
    converged: bool = True
    deltas: tuple = ()
    sizes: tuple = ()
    method: str = "block"
    notes: tuple = field(default=())

    def leading(self, k: int) -> np.ndarray:
        """The ``k`` eigenvalues of smallest modulus, ordered by modulus."""
        lam = self.eigenvalues
        return lam[np.argsort(np.abs(lam), kind="stable")][:k]

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "mu_cut": float(self.mu_cut),
            "model_size": int(self.n),
            "converged": bool(self.converged),
            "refinement": {"sizes": [int(v) for v in self.sizes], "deltas": [float(v) for v in self.deltas]},
            "method": self.method,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d) -> Spectrum:
        ref = d["refinement"]
        return cls(
            np.asarray(d["eigenvalues"], dtype=float),
            float(d["mu_cut"]),
            int(d["model_size"]),
            bool(d["converged"]),
            tuple(float(v) for v in ref["deltas"]),
            tuple(int(v) for v in ref["sizes"]),
            d["method"],
            tuple(d["notes"]),
        )

    def same_as(self, other: Spectrum) -> bool:
        """Field-wise equality (eigenvalues compared exactly)."""
        return self.to_dict() == other.to_dict()


def default_mu_cut(M) -> float:
    """``1e3 * eps * ||M||_2``."""
    if M.size == 0:
        return 0.0
    # M is symmetric, so its 2-norm is the largest eigenvalue modulus
    return MU_CUT_FACTOR * np.finfo(float).eps * float(np.abs(np.linalg.eigvalsh(M)).max())


def eigenvalues_from_block(M, mu_cut=None) -> tuple[np.ndarray, float]:
    mu = np.linalg.eigvalsh(M) if M.size else np.zeros(0)
    if mu_cut is None:
        mu_cut = MU_CUT_FACTOR * np.finfo(float).eps * float(np.max(np.abs(mu), initial=0.0))
    keep = np.abs(mu) > mu_cut
    return np.sort(1.0 / mu[keep]), mu_cut


def solve_model(g: GalerkinModel, mu_cut=None) -> Spectrum:
    """Eigenvalues ``1/mu`` of the block matrix of an assembled model."""
    p = whiten(g)
    lam, cut = eigenvalues_from_block(p.M, mu_cut)
    return Spectrum(lam, cut, g.size)


def solve_spectrum(s: GIString, nodes=None, mu_cut=None, n: int = 64, plateau=None) -> Spectrum:
    """Spectrum of the Galerkin model of ``s`` on ``nodes`` (default: breakpoints + ``n`` elements)."""
    if nodes is None:
        nodes = default_nodes(s, n)
    return solve_model(build_galerkin(s, nodes, plateau=plateau), mu_cut)


def solve_pencil_qep(g: GalerkinModel, mu_cut=None) -> Spectrum:
    """Solve ``A f = z B f + z^2 C f`` through the companion pencil.

    ``z [[B, C], [I, 0]] u = [[A, 0], [0, I]] u``; reciprocal eigenvalues
    ``1/z`` of modulus at most ``mu_cut`` are discarded as in the block path.
    """
    n = g.size
    if mu_cut is None:
        mu_cut = default_mu_cut(whiten(g).M)
    I = np.eye(n)
    Z = np.zeros((n, n))
    lhs = np.block([[g.A, Z], [Z, I]])
    rhs = np.block([[g.B, g.C], [I, Z]])
    alpha, beta = sla.eig(lhs, rhs, right=False, homogeneous_eigvals=True)
    finite = np.abs(alpha) > 0
    mu = np.zeros(alpha.shape, dtype=complex)
    mu[finite] = beta[finite] / alpha[finite]
    # the companion form carries a unit scale on its second block; compare
    # against the scale of the whitened problem through mu directly
    keep = np.abs(mu) > mu_cut
    lam = 1.0 / mu[keep]
    bad = np.abs(lam.imag) > IMAG_TOL * np.abs(lam)
    if np.any(bad):
        raise PencilError(f"complex eigenvalue {lam[bad][0]} from the quadratic pencil")
    return Spectrum(np.sort(lam.real), mu_cut, n, method="qep")


def _relative_deltas(prev: np.ndarray, cur: np.ndarray) -> np.ndarray | None:
    if prev.size != cur.size:
        return None
    if prev.size == 0:
        return np.zeros(0)
    return np.abs(cur - prev) / np.abs(cur)


def refine_until(
    s: GIString,
    target_rel_tol: float = 1e-6,
    k_leading: int = 3,
    n0: int = 16,
    cap: int = 4096,
    nodes=None,
    mu_cut=None,
) -> Spectrum:
    """Double the grid until the ``k_leading`` smallest-modulus eigenvalues settle.

    Stops with ``converged=False`` once the model size would exceed ``cap``.
    """
    if target_rel_tol <= 0:
        raise ValueError("target_rel_tol must be positive")
    t = default_nodes(s, n0) if nodes is None else np.asarray(nodes, dtype=float)
    g = build_galerkin(s, t)
    spec = solve_model(g, mu_cut)
    sizes = [g.size]
    prev = spec.leading(k_leading)
    while True:
        t_next = refine_nodes(g.nodes)
        if t_next.size - 2 > cap:
            return Spectrum(spec.eigenvalues, spec.mu_cut, spec.n, False, (), tuple(sizes))
        g = build_galerkin(s, t_next)
        spec = solve_model(g, mu_cut)
        sizes.append(g.size)
        cur = spec.leading(k_leading)
        d = _relative_deltas(prev, cur)
        if d is not None and (d.size == 0 or d.max() < target_rel_tol):
            return Spectrum(spec.eigenvalues, spec.mu_cut, spec.n, True, tuple(d), tuple(sizes))
        prev = cur
