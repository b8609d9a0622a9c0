import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gistring.coefficients import (
    AntiDerivative,
    CompactPiecewise,
    ConstantTail,
    DomainError,
    GrowthTail,
    MeasureRepr,
    ModelClassError,
    PowerDensity,
    PowerTail,
    UsageError,
    anti_derivative_of_measure,
    cesaro_mean_limit,
    kernel_delta,
    pair_distribution,
)

INF = math.inf


# anti_derivative_of_measure ---------------------------------------------------


def test_single_atom_distribution_function():
    q = anti_derivative_of_measure(MeasureRepr.point_masses(INF, [1.0], [2.0]))
    np.testing.assert_allclose(q(np.array([0.0, 0.5, 1.0, 1.0001, 50.0])), [0, 0, 0, 2, 2])
    assert q.tail == ConstantTail(2.0)


def test_lebesgue_distribution_function_on_unit_interval():
    q = anti_derivative_of_measure(MeasureRepr.lebesgue(1.0))
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(q(x), x, atol=1e-15)


def test_atom_plus_lebesgue_is_linear_combination():
    m = MeasureRepr(1.0, ((0.5, 3.0),), (0.0, 1.0), ((1.0,),))
    q = anti_derivative_of_measure(m)
    x = np.array([0.1, 0.5, 0.50001, 0.9])
    np.testing.assert_allclose(q(x), x + 3.0 * (x > 0.5), atol=1e-14)


def test_atom_outside_interval_rejected():
    with pytest.raises(DomainError):
        MeasureRepr.point_masses(1.0, [1.5], [1.0])


def test_atom_at_origin_warns():
    with pytest.warns(UserWarning):
        MeasureRepr.point_masses(INF, [0.0], [1.0])


def test_power_density_tail_folds_into_constant():
    # density (1+x)^-3 on [0, inf): q(x) = (1 - (1+x)^-2) / 2, c = 1/2
    m = MeasureRepr(INF, density_grid=(0.0,), tail=PowerDensity(1.0, 3.0, 1.0))
    q = anti_derivative_of_measure(m)
    x = np.array([0.5, 2.0, 10.0])
    np.testing.assert_allclose(q(x), 0.5 * (1 - (1 + x) ** -2.0), rtol=1e-13)
    assert cesaro_mean_limit(q) == pytest.approx(0.5)


def test_logarithmic_tail_outside_model_class():
    m = MeasureRepr(INF, density_grid=(0.0,), tail=PowerDensity(1.0, 1.0, 1.0))
    with pytest.raises(ModelClassError):
        anti_derivative_of_measure(m)


def _random_measure(seed, L):
    rng = np.random.default_rng(seed)
    k = rng.integers(0, 4)
    pos = np.sort(rng.uniform(0.05, 0.95, k)) * (L if math.isfinite(L) else 5.0)
    atoms = tuple((float(p), float(rng.uniform(-2, 2))) for p in pos)
    top = L if math.isfinite(L) else 4.0
    g = np.sort(np.concatenate([[0.0, top], rng.uniform(0, top, 2)]))
    segs = tuple((float(rng.uniform(-1, 1)),) for _ in range(g.size - 1))
    return MeasureRepr(L, atoms, tuple(g), segs, nonnegative=False)


@given(st.integers(0, 10_000), st.sampled_from([1.0, 3.0, INF]))
def test_anti_derivative_additive(seed, L):
    m = _random_measure(seed, L)
    atoms_only = MeasureRepr(L, m.atoms, nonnegative=False)
    dens_only = MeasureRepr(L, (), m.density_grid, m.density_segments, nonnegative=False)
    x = np.linspace(0, (L if math.isfinite(L) else 6.0) * 0.999, 37)
    total = anti_derivative_of_measure(m)(x)
    parts = anti_derivative_of_measure(atoms_only)(x) + anti_derivative_of_measure(dens_only)(x)
    np.testing.assert_allclose(total, parts, atol=1e-12)


@given(st.integers(0, 10_000), st.sampled_from([2.0, INF]))
def test_integration_by_parts_identity(seed, L):
    rng = np.random.default_rng(seed)
    m = _random_measure(seed, L)
    q = anti_derivative_of_measure(m)
    a = float(rng.uniform(0.0, 0.5))
    b = float(rng.uniform(1.2, 1.9))
    peak = float(rng.uniform(a + 0.1, b - 0.1))
    h = CompactPiecewise.tent(a, peak, b, float(rng.uniform(0.5, 2)))
    lhs = pair_distribution(q, h)
    rhs = sum(wt * h(np.array([p]))[0] for p, wt in m.atoms if a <= p <= b)
    # exact integral of the density against the tent, piece by piece
    pts = np.unique(np.concatenate([[a, peak, b], [g for g in m.density_grid if a < g < b]]))
    xs, ws = np.polynomial.legendre.leggauss(6)
    for lo, hi in zip(pts[:-1], pts[1:]):
        t = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
        rhs += 0.5 * (hi - lo) * np.sum(ws * m.density(t) * h(t))
    assert lhs == pytest.approx(rhs, abs=1e-12)


# pair_distribution ------------------------------------------------------------


def test_pairing_with_delta_is_point_value():
    q = AntiDerivative(INF, (0.0, 1.0), ((0.0,),), ConstantTail(1.0))
    assert pair_distribution(q, CompactPiecewise.tent(0.5, 1.0, 1.5)) == pytest.approx(1.0)


def test_pairing_with_lebesgue_is_tent_area():
    assert pair_distribution(AntiDerivative.identity(INF), CompactPiecewise.tent(0.0, 1.0, 2.0)) == pytest.approx(1.0)


def test_pairing_with_zero():
    q = AntiDerivative.constant(INF, 0.0)
    assert pair_distribution(q, CompactPiecewise.tent(0.2, 0.7, 3.0, 4.0)) == 0.0


def test_pairing_support_must_stay_inside():
    with pytest.raises(DomainError):
        pair_distribution(AntiDerivative.identity(1.0), CompactPiecewise.tent(0.0, 0.5, 1.0))


def test_test_functions_must_be_continuous():
    with pytest.raises(DomainError):
        CompactPiecewise((0.0, 1.0, 2.0), ((0.0, 1.0), (2.0, -2.0)))


# kernel_delta -----------------------------------------------------------------


def test_kernel_diagonal_finite():
    assert kernel_delta(0.3, 0.3, 2.0) == pytest.approx(0.3 * (1 - 0.3 / 2.0))


def test_kernel_half_line():
    assert kernel_delta(2.0, 3.0, INF) == 2.0


def test_kernel_off_diagonal_finite():
    assert kernel_delta(0.5, 0.25, 1.0) == pytest.approx(1 / 8)


@given(
    st.floats(0, 10, allow_nan=False),
    st.floats(0, 10, allow_nan=False),
    st.one_of(st.just(INF), st.floats(10.5, 100)),
)
def test_kernel_symmetric_nonnegative_bounded(x, t, L):
    k = kernel_delta(x, t, L)
    assert k == kernel_delta(t, x, L)
    assert k >= 0
    bound_x = x * (1 - x / L)
    assert kernel_delta(x, x, L) == pytest.approx(bound_x)
    # Cauchy-Schwarz in the energy space
    assert k**2 <= kernel_delta(x, x, L) * kernel_delta(t, t, L) * (1 + 1e-12) + 1e-300


# cesaro_mean_limit ------------------------------------------------------------


def test_mean_of_constant_tail():
    assert cesaro_mean_limit(AntiDerivative.constant(INF, 5.0)) == 5.0


def test_mean_of_power_decay_tail():
    w = AntiDerivative(INF, (0.0, 1.0), ((0.0, 1.0),), PowerTail(2.0, 7.0, 0.5))
    assert cesaro_mean_limit(w) == 2.0


def test_mean_of_identity_absent():
    assert cesaro_mean_limit(AntiDerivative.identity(INF)) is None


def test_mean_needs_half_line():
    with pytest.raises(UsageError):
        cesaro_mean_limit(AntiDerivative.identity(1.0))


# representation checks -------------------------------------------------------


def test_degree_cap_enforced():
    with pytest.raises(ModelClassError):
        AntiDerivative(1.0, (0.0, 1.0), ((0, 0, 0, 0, 1.0),))


def test_finite_grid_must_reach_length():
    with pytest.raises(DomainError):
        AntiDerivative(1.0, (0.0, 0.5), ((1.0,),))


def test_half_line_needs_tail():
    with pytest.raises(ModelClassError):
        AntiDerivative(INF, (0.0, 1.0), ((1.0,),))


def test_negative_density_rejected_for_nonnegative_measure():
    with pytest.raises(DomainError):
        MeasureRepr(1.0, (), (0.0, 1.0), ((1.0, -3.0),))


def test_integral_matches_quadrature_on_tails():
    w = AntiDerivative(INF, (0.0, 1.0), ((1.0, 2.0, -1.0),), PowerTail(0.5, 2.0, 1.5, 1.0))
    from scipy.integrate import quad

    f = lambda x: x * (w(np.array([x]))[0] - 0.5) ** 2  # noqa: E731
    ref = quad(f, 0.0, 1.0)[0] + quad(f, 1.0, INF, limit=200)[0]
    assert w.integral(0.0, INF, (0.0, 1.0), power=2, shift=0.5) == pytest.approx(ref, rel=1e-9)


def test_growth_tail_evaluation():
    w = AntiDerivative(INF, (0.0,), (), GrowthTail(1.0, 2.0, 0.5, 1.0))
    np.testing.assert_allclose(w(np.array([3.0])), [1.0 + 2.0 * 2.0])


def test_measure_moment_and_mass():
    m = MeasureRepr(2.0, ((0.5, 1.0),), (0.0, 2.0), ((3.0,),))
    assert m.mass(0.0, 2.0) == pytest.approx(1.0 + 6.0)
    assert m.moment((0.0, 1.0)) == pytest.approx(0.5 + 3.0 * 2.0)
