import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gistring.coefficients import (
    AntiDerivative,
    CompactPiecewise,
    GIString,
    MeasureRepr,
    anti_derivative_of_measure,
    kernel_delta,
    pair_distribution,
)
from gistring.discretization import (
    GalerkinModel,
    MissingNodeError,
    NotPSDError,
    build_galerkin,
    default_nodes,
    galerkin_hat_values,
    sqrt_psd,
    whiten,
)

INF = math.inf


def _unit_string(w=None, ups=None):
    return GIString(1.0, w or AntiDerivative.constant(1.0), ups or MeasureRepr.zero(1.0))


def test_single_hat_stiffness():
    g = build_galerkin(_unit_string(), [0.0, 0.5, 1.0])
    np.testing.assert_allclose(g.A, [[4.0]])


def test_single_hat_lebesgue_pairing():
    g = build_galerkin(_unit_string(AntiDerivative.identity(1.0)), [0.0, 0.5, 1.0])
    np.testing.assert_allclose(g.B, [[1.0 / 3.0]], rtol=1e-14)


def test_single_hat_upsilon_atom():
    g = build_galerkin(_unit_string(ups=MeasureRepr.point_masses(1.0, [0.5], [1.0])), [0.0, 0.5, 1.0])
    np.testing.assert_allclose(g.C, [[1.0]])


def test_missing_atom_node():
    s = _unit_string(ups=MeasureRepr.point_masses(1.0, [0.3], [1.0]))
    with pytest.raises(MissingNodeError):
        build_galerkin(s, [0.0, 0.5, 1.0])


def test_sqrt_identity():
    np.testing.assert_allclose(sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)


def test_sqrt_diagonal():
    np.testing.assert_allclose(sqrt_psd(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]), atol=1e-15)


def test_sqrt_two_by_two():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    R = sqrt_psd(M)
    assert np.abs(R @ R - M).max() <= 1e-12
    np.testing.assert_allclose(R, R.T)


def test_sqrt_rejects_indefinite():
    with pytest.raises(NotPSDError):
        sqrt_psd(np.diag([1.0, -0.5]))


def test_sqrt_clips_roundoff():
    R = sqrt_psd(np.diag([1.0, -1e-14]))
    np.testing.assert_allclose(R, np.diag([1.0, 0.0]))


def _model(A, B, C):
    A, B, C = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C))
    return GalerkinModel(1.0, np.array([0.0, 0.5, 1.0]), A, B, C, 0.0, False)


def test_whiten_scalar():
    p = whiten(_model([[4.0]], [[1 / 3]], [[0.0]]))
    np.testing.assert_allclose(p.M, [[1 / 12]])


def test_whiten_pure_upsilon():
    kappa = 2.5
    p = whiten(_model([[1.0]], [[0.0]], [[kappa]]))
    np.testing.assert_allclose(np.abs(p.M), [[0, math.sqrt(kappa)], [math.sqrt(kappa), 0]], atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(p.M), [-math.sqrt(kappa), math.sqrt(kappa)])


def test_whiten_without_upsilon_is_symmetric_pairing(rng):
    n = 5
    X = rng.normal(size=(n, n))
    A = X @ X.T + n * np.eye(n)
    B = rng.normal(size=(n, n))
    B = B + B.T
    p = whiten(_model(A, B, np.zeros((n, n))))
    assert p.M.shape == (n, n)
    np.testing.assert_array_equal(p.M, p.M.T)
    Lc = np.linalg.cholesky(A)
    np.testing.assert_allclose(p.M, np.linalg.solve(Lc, np.linalg.solve(Lc, B).T), atol=1e-12)


def _random_string(seed, L):
    rng = np.random.default_rng(seed)
    top = L if math.isfinite(L) else 3.0
    k = int(rng.integers(1, 4))
    pos = np.sort(rng.choice(np.arange(1, 20), k, replace=False)) * top / 20
    omega = MeasureRepr(
        L,
        tuple((float(p), float(rng.uniform(-2, 2))) for p in pos),
        (0.0, top / 2, top) if math.isfinite(L) else (0.0, top / 2, top),
        ((float(rng.uniform(-1, 1)),), (float(rng.uniform(-1, 1)),)),
        nonnegative=False,
    )
    ups = MeasureRepr(L, tuple((float(p), float(rng.uniform(0, 2))) for p in pos[:1]))
    return GIString(L, anti_derivative_of_measure(omega), ups), omega


@given(st.integers(0, 10_000), st.sampled_from([2.0, INF]), st.integers(3, 12))
def test_reproducing_kernel_property(seed, L, n):
    s, _ = _random_string(seed, L)
    nodes = default_nodes(s, n)
    g = build_galerkin(s, nodes)
    t = g.nodes
    dofs = g.dof_nodes
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=g.size)
    for k, x in enumerate(dofs):
        kern = kernel_delta(x, dofs, L)
        if g.plateau:
            kern = kernel_delta(x, dofs, INF)
        inner = coeffs @ g.A @ kern
        assert inner == pytest.approx(coeffs[k], abs=1e-12 * max(1.0, np.abs(coeffs).max()) * max(1.0, t[-1]))


@given(st.integers(0, 10_000), st.sampled_from([2.0, INF]))
def test_growth_estimate(seed, L):
    s, _ = _random_string(seed, L)
    g = build_galerkin(s, default_nodes(s, 10))
    rng = np.random.default_rng(seed + 1)
    a = rng.normal(size=g.size)
    energy = a @ g.A @ a
    x = g.dof_nodes
    bound = x * (1 - x / L) * energy
    assert np.all(a**2 <= bound * (1 + 1e-12) + 1e-14)


@given(st.integers(0, 10_000), st.sampled_from([2.0, INF]))
def test_pairing_two_code_paths(seed, L):
    """B from the measure formula equals B from the distribution pairing."""
    s, omega = _random_string(seed, L)
    nodes = default_nodes(s, 6)
    g = build_galerkin(s, nodes)
    t = g.nodes
    n = g.size
    checked = 0
    for i in range(n):
        for j in range(i, min(i + 2, n)):
            last = (j == n - 1) and (g.plateau or math.isfinite(L))
            if last:
                continue  # support reaches L or the plateau; covered by the trace tests
            lo, hi = t[i], t[j + 2]
            mid = [t[k] for k in range(i, j + 3)]
            # product of two hats as a continuous piecewise quadratic
            segs = []
            for a, b in zip(mid[:-1], mid[1:]):
                xs = np.array([a, 0.5 * (a + b), b])
                vals = galerkin_hat_values(t, n, g.plateau, xs)
                prod = vals[:, i] * vals[:, j]
                segs.append(tuple(np.polynomial.polynomial.polyfit(xs - a, prod, 2)))
            h = CompactPiecewise(tuple(mid), tuple(segs))
            via_pairing = pair_distribution(s.w, h)
            # direct measure formula: atoms plus density integral
            direct = sum(wt * h(np.array([p]))[0] for p, wt in omega.atoms)
            xs, ws = np.polynomial.legendre.leggauss(8)
            cuts = np.unique(np.concatenate([mid, [c for c in omega.density_grid if lo < c < hi]]))
            for a, b in zip(cuts[:-1], cuts[1:]):
                q = 0.5 * (b - a) * xs + 0.5 * (a + b)
                direct += 0.5 * (b - a) * np.sum(ws * omega.density(q) * h(q))
            assert g.B[i, j] == pytest.approx(via_pairing, abs=1e-12)
            assert g.B[i, j] == pytest.approx(direct, abs=1e-12)
            checked += 1
    assert checked > 0


@given(st.integers(0, 10_000), st.sampled_from([2.0, INF]))
def test_block_matrix_symmetric(seed, L):
    s, _ = _random_string(seed, L)
    p = whiten(build_galerkin(s, default_nodes(s, 16)))
    np.testing.assert_array_equal(p.M, p.M.T)
    assert p.asymmetry <= 1e-13


def test_matrices_invariants(rng):
    s, _ = _random_string(7, INF)
    g = build_galerkin(s, default_nodes(s, 20))
    np.linalg.cholesky(g.A)
    np.testing.assert_allclose(g.B, g.B.T, atol=1e-14)
    assert np.linalg.eigvalsh(g.C).min() >= -1e-12
