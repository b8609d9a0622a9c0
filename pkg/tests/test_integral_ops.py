import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gistring.coefficients import AntiDerivative, MeasureRepr, UsageError, anti_derivative_of_measure
from gistring.discretization import default_nodes
from gistring.coefficients import GIString
from gistring.integral_ops import (
    build_J,
    build_JL,
    closed_form_hs_sq,
    closed_form_trace,
    crossvalidate,
    pairing_operator_eigenvalues,
)

INF = math.inf


def test_constant_anti_derivative_gives_zero_operator():
    q = AntiDerivative.constant(INF, 5.0)
    np.testing.assert_array_equal(build_J(q, np.linspace(0, 3, 7)).matrix, 0.0)


def test_constant_on_interval_is_killed_by_projection():
    q = AntiDerivative.constant(2.0, 1.0)
    np.testing.assert_allclose(build_JL(q).matrix, 0.0, atol=1e-14)


def test_wrong_lengths_rejected():
    with pytest.raises(UsageError):
        build_J(AntiDerivative.identity(1.0), [0.0, 0.5])
    with pytest.raises(UsageError):
        build_JL(AntiDerivative.identity(INF))
    with pytest.raises(UsageError):
        build_J(AntiDerivative.identity(INF), [0.0, 1.0])


def test_single_atom_operator():
    q = anti_derivative_of_measure(MeasureRepr.point_masses(INF, [1.0], [1.0]))
    dj = build_J(q, [0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(np.sort(np.abs(dj.eigenvalues()))[::-1][:2], [1.0, 0.0], atol=1e-14)
    assert dj.trace() == pytest.approx(-1.0)
    assert dj.frobenius_sq() == pytest.approx(closed_form_hs_sq(q))


def _random_atomic(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    pos = np.sort(rng.choice(np.arange(1, 40), n, replace=False) * 0.25)
    wts = rng.uniform(-2, 2, n)
    return pos, MeasureRepr.point_masses(INF, pos, wts, nonnegative=False)


@given(st.integers(0, 10_000))
def test_atomic_trace_and_norm_exact(seed):
    pos, m = _random_atomic(seed)
    q = anti_derivative_of_measure(m)
    grid = np.concatenate([[0.0], pos, [pos[-1] + 1.0]])
    dj = build_J(q, grid)
    assert dj.trace() == pytest.approx(closed_form_trace(q), abs=1e-10)
    assert dj.frobenius_sq() == pytest.approx(closed_form_hs_sq(q), rel=1e-10, abs=1e-12)


@given(st.integers(0, 10_000))
def test_halfline_spectrum_is_negated_pairing_spectrum(seed):
    pos, m = _random_atomic(seed)
    q = anti_derivative_of_measure(m)
    s = GIString(INF, q, MeasureRepr.zero(INF))
    nodes = default_nodes(s, 32)
    j = np.sort(build_J(q, nodes).eigenvalues())
    k = pairing_operator_eigenvalues(q, nodes, plateau=True)
    kk = np.sort(np.concatenate([-k, np.zeros(j.size - k.size)]))
    np.testing.assert_allclose(j, kk, atol=1e-10 * max(1.0, np.abs(j).max()))


def test_lebesgue_interval_identities():
    q = AntiDerivative.identity(1.0)
    n = 400
    dj = build_JL(q, grid=np.linspace(0, 1, n + 1))
    # unprojected trace misses h/6 from the diagonal cells
    assert dj.trace() == pytest.approx(0.5 - 1 / (6 * n), rel=1e-12)
    assert closed_form_trace(q) == pytest.approx(0.5)
    assert closed_form_hs_sq(q) == pytest.approx(1 / 6)
    top = np.sort(np.abs(dj.eigenvalues()))[::-1][:3]
    np.testing.assert_allclose(top, [1 / (k * k * math.pi**2) for k in (1, 2, 3)], rtol=1e-4)


def test_crossvalidate_atomic():
    rep = crossvalidate(MeasureRepr.point_masses(INF, [1.0, 3.0], [2.0, 1.0]), ladder=(64, 256))
    assert rep.passed
    assert rep.finest.deviation < 1e-8
    assert rep.hs_rel_error < 1e-12
    assert rep.trace_closed_form == pytest.approx(-5.0)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_crossvalidate_random_atomic(seed):
    _, m = _random_atomic(seed)
    rep = crossvalidate(m, ladder=(64,))
    assert rep.finest.deviation < 1e-8
    assert rep.finest.signed_deviation < 1e-8


def test_crossvalidate_report_dict():
    d = crossvalidate(MeasureRepr.point_masses(INF, [1.0], [1.0]), ladder=(16,)).to_dict()
    assert d["passed"] and len(d["levels"]) == 1
