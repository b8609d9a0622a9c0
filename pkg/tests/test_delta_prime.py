import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import zeta

from gistring.calibration import dp_calibration, dp_calibration_cases
from gistring.coefficients import DomainError
from gistring.criteria import Answer, check_consistency
from gistring.delta_prime import (
    ExplicitSupport,
    PowerLawGenerator,
    dp_classify,
    dp_spectrum,
    dp_string,
    first_sum_asymptotics,
    generator_constant,
    generator_sums,
    partial_sums,
    second_sum_asymptotics,
)

Y, N = Answer.YES, Answer.NO


def test_explicit_support_string():
    s = dp_string(ExplicitSupport([1.0, 2.0, 3.0], [1.0, -1.0, 3.0]))
    assert s.w.grid == (0.0, 1.0, 2.0, 3.0)
    assert s.w.segments == ((0.0, 1.0), (2.0, 1.0), (2.0, 1.0))
    assert s.w.tail.c == 3.0
    assert s.upsilon.is_zero


def test_string_jumps_by_strengths():
    x, b = [0.5, 1.5, 4.0], [2.0, -0.5, 1.0]
    s = dp_string(ExplicitSupport(x, b))
    for xk, bk in zip(x, b):
        jump = s.w(np.array([xk + 1e-12]))[0] - s.w(np.array([xk]))[0]
        assert jump == pytest.approx(bk, abs=1e-9)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20))
def test_partial_sums_differences(beta):
    q = partial_sums(beta)
    assert q[0] == 0.0
    np.testing.assert_allclose(np.diff(q), beta, atol=1e-12)


def test_invalid_supports():
    with pytest.raises(DomainError):
        ExplicitSupport([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        ExplicitSupport([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        PowerLawGenerator(1.0, 0.5, rule="bogus")


def test_explicit_support_never_has_constant():
    cls = dp_classify(ExplicitSupport([1.0, 2.0, 3.0], [1.0, -1.0, 3.0]))
    assert cls.c is None
    assert cls.zero_not_in_spectrum.value is N


@pytest.mark.parametrize("name,gen,expected", dp_calibration_cases(), ids=[c[0] for c in dp_calibration_cases()])
def test_calibration_trio(name, gen, expected):
    cls = dp_classify(gen)
    assert check_consistency(cls) == []
    for key, want in expected.items():
        assert getattr(cls, key).value.value == want, key


def test_calibration_report_passes():
    assert all(c["passed"] for c in dp_calibration())


@pytest.mark.parametrize(
    "gen,zero_ok,discrete,c",
    [
        (PowerLawGenerator(1, 1, "constant", b=0.5), N, N, None),
        (PowerLawGenerator(1, 0.5), Y, N, 0.0),
        (PowerLawGenerator(1, 1 / 3), Y, Y, 0.0),
        (PowerLawGenerator(1, 1 / 3, c0=1.0, rho=1.2), N, N, float(zeta(1.2))),
        (PowerLawGenerator(1, 1 / 3, c0=1.0, rho=2.0), Y, Y, float(zeta(2.0))),
    ],
)
def test_generator_verdicts(gen, zero_ok, discrete, c):
    cls = dp_classify(gen)
    assert cls.zero_not_in_spectrum.value is zero_ok
    assert cls.discrete.value is discrete
    if c is None:
        assert cls.c is None
    else:
        assert cls.c == pytest.approx(c)


def test_half_power_first_sum_limit():
    g = PowerLawGenerator(1.0, 0.5)
    a = first_sum_asymptotics(g)
    assert a.exponent == 0.0
    assert a.limit == pytest.approx(0.25)
    direct, second = generator_sums(g, 2000)
    assert direct == pytest.approx(0.25, rel=2e-3)
    assert second == pytest.approx(0.0, abs=1e-9)


def test_cube_root_first_sum_decays():
    g = PowerLawGenerator(1.0, 1 / 3)
    a = first_sum_asymptotics(g)
    assert a.limit == 0.0 and a.exponent < 0
    d1, _ = generator_sums(g, 100)
    d2, _ = generator_sums(g, 1000)
    ratio = d2 / d1
    assert ratio == pytest.approx(10 ** a.exponent, rel=0.05)


def test_perturbed_second_sum_rate():
    g = PowerLawGenerator(1.0, 1 / 3, c0=1.0, rho=2.0)
    a = second_sum_asymptotics(g, generator_constant(g))
    _, s1 = generator_sums(g, 200)
    _, s2 = generator_sums(g, 2000)
    assert s2 / s1 == pytest.approx(10 ** a.exponent, rel=0.1)


def test_spectrum_has_both_signs():
    lam = dp_spectrum(PowerLawGenerator(1, 1 / 3), 5.0, n=200).eigenvalues
    assert np.any(lam > 0) and np.any(lam < 0)


def test_no_interactions_positive_spectrum():
    lam = dp_spectrum(ExplicitSupport([], []), 3.0, n=64).eigenvalues
    assert lam.size > 0 and np.all(lam > 0)
    # Dirichlet Laplacian with weight one on [0, 3): (k pi / 3)^2
    assert lam[0] == pytest.approx((math.pi / 3) ** 2, rel=1e-3)


def test_interaction_on_the_cap_is_dropped():
    a = dp_string(ExplicitSupport([1.0, 2.0], [1.0, 1.0]), 2.0, dirichlet_cap=True)
    b = dp_string(ExplicitSupport([1.0], [1.0]), 2.0, dirichlet_cap=True)
    assert a.w.grid == b.w.grid == (0.0, 1.0, 2.0)
    assert a.w.segments == b.w.segments
    with pytest.raises(DomainError):
        dp_string(ExplicitSupport([1.0], [1.0]), None, dirichlet_cap=True)
