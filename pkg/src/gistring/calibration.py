"""Hand-derived calibration cases and random oracle corpora.

Each :class:`CalibrationCase` carries the expected verdicts together with a
one-line derivation.  The corpora feed the trace and Hilbert-Schmidt checks
used by ``gis verify`` and the acceptance tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .camassa_holm import CHProblem, ExpDensity, ch_classify, ch_to_string
from .coefficients import (
    AntiDerivative,
    ConstantTail,
    EndpointDensity,
    EndpointTail,
    GIString,
    MeasureRepr,
    PowerDensity,
    PowerTail,
)
from .criteria import Answer, Classification, classify, classify_krein, consistent_with, singularity_gate
from .delta_prime import PowerLawGenerator, dp_classify
from .oracle import PointMassProblem, oracle_trace_sums, random_problem

INF = math.inf
Y, N, I = Answer.YES, Answer.NO, Answer.INCONCLUSIVE


@dataclass(frozen=True)
class CalibrationCase:
    name: str
    build: Callable[[], Classification]
    expected: dict
    derivation: str
    expected_trace: float | None = None
    subject: Callable[[], object] | None = None  # object handed to the singularity gate

    def run(self) -> tuple[Classification, list[str]]:
        cls = self.build()
        got = cls.verdicts()
        bad = [k for k, v in self.expected.items() if got.get(k) != v]
        if self.expected_trace is not None:
            if cls.trace_sum is None or abs(cls.trace_sum - self.expected_trace) > 1e-10 * max(1.0, abs(self.expected_trace)):
                bad.append("trace_sum")
        return cls, bad


def _gis(L, w, ups=None):
    return GIString(L, w, MeasureRepr.zero(L) if ups is None else ups)


def _zero_w(L):
    return AntiDerivative.constant(L, 0.0)


def _power_w(c, A, alpha):
    # w = c + A (1 + x)^(-alpha) on the whole half line
    return AntiDerivative(INF, (0.0,), (), PowerTail(c, A, alpha, 1.0))


def _power_density(B, beta):
    # density B (1 + x)^(-beta) on [0, inf)
    return MeasureRepr(INF, density_grid=(0.0,), tail=PowerDensity(B, beta, 1.0))


def _endpoint_density(B, beta, L=1.0):
    return MeasureRepr(L, density_grid=(0.0,), tail=EndpointDensity(B, beta))


def _gis_case(name, make_string, expected, derivation, p_list=(2.0,), trace=None):
    return CalibrationCase(
        name, lambda: classify(make_string(), p_list), expected, derivation, trace, make_string
    )


def _krein_case(name, make_omega, expected, derivation, p_list=(0.6, 1.0, 2.0), trace=None):
    return CalibrationCase(
        name, lambda: classify_krein(make_omega(), p_list), expected, derivation, trace, make_omega
    )


def classifier_cases() -> list[CalibrationCase]:
    """Strings with hand-derived verdicts (general and Krein criteria)."""
    return [
        _gis_case(
            "zero string, half line",
            lambda: _gis(INF, _zero_w(INF)),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y, "S_1.5": Y, "trace_class": Y},
            "all functionals vanish; the spectrum is empty",
            p_list=(1.5, 2.0),
            trace=0.0,
        ),
        _gis_case(
            "Lebesgue omega, half line",
            lambda: _gis(INF, AntiDerivative.identity(INF)),
            {"zero_not_in_spectrum": N, "discrete": N, "S_2": N},
            "w = x has Cesaro mean x/2 -> inf, so no constant c exists",
        ),
        _krein_case(
            "Krein density (1+x)^-4",
            lambda: _power_density(1.0, 4.0),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_0.6": Y, "trace_class": Y, "S_2": Y},
            "x omega([x, inf)) = x (1+x)^-3 / 3 -> 0 like x^-2; trace int x (1+x)^-4 dx = 1/6",
            trace=1.0 / 6.0,
        ),
        _gis_case(
            "finite L, w = 1/(1-x)",
            lambda: _gis(1.0, AntiDerivative(1.0, (0.0,), (), EndpointTail(0.0, 1.0, 1.0))),
            {"zero_not_in_spectrum": Y, "discrete": N, "S_2": N},
            "(1-x) int_0^x (1-t)^-2 dt = 1 - (1-x) -> 1: bounded, not discrete",
        ),
        _krein_case(
            "Krein single mass 2 delta_3",
            lambda: MeasureRepr.point_masses(INF, [3.0], [2.0]),
            {"zero_not_in_spectrum": Y, "discrete": Y, "trace_class": Y},
            "tail functional vanishes beyond 3; trace m a = 6",
            trace=6.0,
        ),
        _krein_case(
            "Krein Lebesgue, half line",
            lambda: MeasureRepr.lebesgue(INF),
            {"zero_not_in_spectrum": N, "discrete": N},
            "x omega([x, inf)) = inf",
        ),
        _krein_case(
            "Krein density (1+x)^-2",
            lambda: _power_density(3.0, 2.0),
            {"zero_not_in_spectrum": Y, "discrete": N},
            "x omega([x, inf)) = 3 x / (1+x) -> 3 > 0",
        ),
        _gis_case(
            "upsilon atom, w = 0",
            lambda: _gis(INF, _zero_w(INF), MeasureRepr.point_masses(INF, [1.0], [1.0])),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y, "trace_class": Y},
            "eigenvalues +-1; finite rank",
            trace=0.0,
        ),
        _gis_case(
            "power tail alpha = 1/2",
            lambda: _gis(INF, _power_w(1.0, 1.0, 0.5)),
            {"zero_not_in_spectrum": N, "discrete": N, "S_2": N},
            "(w - c)^2 = (1+x)^-1 is not integrable at infinity",
        ),
        _gis_case(
            "power tail alpha = 1",
            lambda: _gis(INF, _power_w(-2.0, 3.0, 1.0)),
            {"zero_not_in_spectrum": Y, "discrete": N, "S_2": N},
            "x int_x 9 (1+t)^-2 dt = 9 x / (1+x) -> 9",
        ),
        _gis_case(
            "power tail alpha = 2",
            lambda: _gis(INF, _power_w(0.5, 1.0, 2.0)),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y, "S_4": Y, "trace_class": I},
            "x int_x (1+t)^-4 dt ~ x^-2 / 3 -> 0; trace class undecided (only necessary conditions)",
            p_list=(2.0, 4.0),
        ),
        _gis_case(
            "upsilon density (1+x)^-2",
            lambda: _gis(INF, _zero_w(INF), _power_density(2.0, 2.0)),
            {"zero_not_in_spectrum": Y, "discrete": N},
            "x upsilon([x, inf)) = 2 x / (1+x) -> 2",
        ),
        _gis_case(
            "upsilon density (1+x)^-3",
            lambda: _gis(INF, _zero_w(INF), _power_density(1.0, 3.0)),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y, "trace_class": N},
            "x upsilon([x, inf)) ~ x^-1 / 2 -> 0; a density rules out trace class",
        ),
        _gis_case(
            "finite L, w = 1",
            lambda: _gis(1.0, AntiDerivative.constant(1.0, 1.0)),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y, "trace_class": Y},
            "(1-x) x -> 0; w constant: omega = delta_0 is invisible, trace int (2x-1) dx = 0",
            trace=0.0,
        ),
        _gis_case(
            "finite L, upsilon density (1-x)^-2",
            lambda: _gis(1.0, _zero_w(1.0), _endpoint_density(0.5, 2.0)),
            {"zero_not_in_spectrum": Y, "discrete": N},
            "(1-x) upsilon([0, x)) = 0.5 (1 - (1-x)) -> 0.5",
        ),
        _gis_case(
            "finite L, upsilon density (1-x)^-3",
            lambda: _gis(1.0, _zero_w(1.0), _endpoint_density(1.0, 3.0)),
            {"zero_not_in_spectrum": N, "discrete": N},
            "(1-x) upsilon([0, x)) ~ (1-x)^-1 / 2 -> inf",
        ),
        _gis_case(
            "finite L, w = (1-x)^-1/2",
            lambda: _gis(1.0, AntiDerivative(1.0, (0.0,), (), EndpointTail(0.0, 1.0, 0.5))),
            {"zero_not_in_spectrum": Y, "discrete": Y, "S_2": Y},
            "(1-x) int_0^x (1-t)^-1 dt = -(1-x) log(1-x) -> 0",
        ),
    ]


# --------------------------------------------------------------------------
# Camassa-Holm instances
# --------------------------------------------------------------------------


def ch_instances() -> list[tuple[str, CHProblem]]:
    zero = MeasureRepr.zero(INF)
    tent = AntiDerivative(INF, (0.0, 1.0, 2.0), ((0.0, 1.0), (1.0, -1.0)), ConstantTail(0.0))
    ramp = AntiDerivative(INF, (0.0, 1.0), ((0.0, 1.0),), ConstantTail(1.0))
    cubic = AntiDerivative(INF, (0.0, 1.5), ((1.0, 0.0, -4.0 / 3.0, 16.0 / 27.0),), ConstantTail(0.0))
    atoms = MeasureRepr.point_masses(INF, [0.5, 1.5], [1.0, 2.0])
    return [
        ("u = 0, upsilon = 0", CHProblem(AntiDerivative.constant(INF, 0.0), zero)),
        ("u = 1", CHProblem(AntiDerivative.constant(INF, 1.0), zero)),
        ("tent u on [0, 2]", CHProblem(tent, zero)),
        ("ramp to 1", CHProblem(ramp, zero)),
        ("cubic bump with atoms", CHProblem(cubic, atoms)),
        ("upsilon atoms, u = 0", CHProblem(AntiDerivative.constant(INF, 0.0), atoms)),
        (
            "upsilon density e^0 tail",
            CHProblem(AntiDerivative.constant(INF, 0.0), zero, ExpDensity(1.0, 0.0, 1.0)),
        ),
        (
            "upsilon density e^-s tail",
            CHProblem(tent, zero, ExpDensity(2.0, -1.0, 2.0)),
        ),
    ]


def ch_consistency(p_list=(2.0,)) -> list[dict]:
    out = []
    for name, prob in ch_instances():
        direct = ch_classify(prob, p_list)
        via = classify(ch_to_string(prob), p_list)
        diff = consistent_with(direct, via, skip_inconclusive=False)
        out.append({"name": name, "passed": not diff, "disagree": diff, "verdicts": {k: v.value for k, v in direct.verdicts().items()}})
    return out


# --------------------------------------------------------------------------
# delta-prime calibration
# --------------------------------------------------------------------------


def dp_calibration_cases() -> list[tuple[str, PowerLawGenerator, dict]]:
    return [
        ("x_k = k", PowerLawGenerator(1.0, 1.0, "constant", b=0.5), {"zero_not_in_spectrum": N}),
        ("x_k = k^(1/2), beta_k = -gap", PowerLawGenerator(1.0, 0.5), {"zero_not_in_spectrum": Y, "discrete": N}),
        ("x_k = k^(1/3), beta_k = -gap", PowerLawGenerator(1.0, 1.0 / 3.0), {"zero_not_in_spectrum": Y, "discrete": Y}),
    ]


def dp_calibration() -> list[dict]:
    out = []
    for name, gen, expected in dp_calibration_cases():
        got = dp_classify(gen).verdicts()
        bad = [k for k, v in expected.items() if got[k] != v]
        out.append({"name": name, "passed": not bad, "mismatch": bad, "verdicts": {k: got[k].value for k in expected}})
    return out


# --------------------------------------------------------------------------
# oracle corpora
# --------------------------------------------------------------------------


@dataclass
class CorpusResult:
    count: int
    max_rel_error: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def trace_rhs(p: PointMassProblem) -> float:
    """``sum w_k x_k (1 - x_k / L)``: trace of the pairing operator for atomic omega."""
    x, w = p.positions, p.omega_weights
    factor = 1.0 if math.isinf(p.L) else (1.0 - x / p.L)
    return float(np.sum(w * x * factor))


def hs_rhs(p: PointMassProblem) -> float:
    """``2 int x (w - c)^2 + 2 sum u_k x_k`` on the half line, in closed form for atoms."""
    x, w, u = p.positions, p.omega_weights, p.upsilon_weights
    # w - c = -omega([x, inf)) is constant between atoms
    tail = np.cumsum(w[::-1])[::-1]
    left = np.concatenate([[0.0], x[:-1]])
    return float(np.sum(tail**2 * (x**2 - left**2)) + 2.0 * np.sum(u * x))


def _rel(a, b, scale):
    return abs(a - b) / max(scale, 1e-300)


def make_corpus(count: int = 200, seed: int = 20240607, halfline_only: bool = False) -> list[PointMassProblem]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        L = INF if (halfline_only or k % 2 == 0) else float(rng.uniform(2.0, 12.0))
        out.append(random_problem(rng, L))
    return out


def trace_corpus(corpus=None, tol: float = 1e-9) -> CorpusResult:
    """Oracle ``sum 1/lambda`` against both closed-form trace expressions.

    The error is measured relative to ``sum |1/lambda|``, the natural scale of
    a sum with cancelling signs.
    """
    corpus = make_corpus() if corpus is None else corpus
    res = CorpusResult(len(corpus), 0.0)
    for i, p in enumerate(corpus):
        s1, _ = oracle_trace_sums(p)
        scale = float(np.sum(np.abs(p.omega_weights * p.positions))) or 1.0
        krein_form = trace_rhs(p)
        gis_form = classify(p.to_string(), (2.0,)).trace_sum
        err = max(_rel(s1, krein_form, scale), _rel(s1, gis_form, scale))
        res.max_rel_error = max(res.max_rel_error, err)
        if not err <= tol:
            res.failures.append({"index": i, "error": err})
    return res


def hs_corpus(corpus=None, tol: float = 1e-9) -> CorpusResult:
    """Oracle ``sum 1/lambda^2`` against the closed forms (half line)."""
    corpus = make_corpus(halfline_only=True) if corpus is None else [p for p in corpus if math.isinf(p.L)]
    res = CorpusResult(len(corpus), 0.0)
    for i, p in enumerate(corpus):
        _, s2 = oracle_trace_sums(p)
        closed = hs_rhs(p)
        classified = classify(p.to_string(), (2.0,)).hs_sum
        err = max(_rel(s2, closed, abs(closed)), _rel(s2, classified, abs(closed)))
        res.max_rel_error = max(res.max_rel_error, err)
        if not err <= tol:
            res.failures.append({"index": i, "error": err})
    return res


def gate_report(cases=None) -> list[dict]:
    """Singularity gate against every Yes verdict in the classifier suite."""
    cases = classifier_cases() if cases is None else cases
    out = []
    for case in cases:
        cls, _ = case.run()
        subject = case.subject()
        if cls.kind == "krein":
            gate = singularity_gate(subject, "Krein_Shalf", cls)
        else:
            gate = singularity_gate(subject, "GIS_S1", cls)
        out.append({"name": case.name, "gate": gate.value.value, "passed": gate.is_yes})
    return out
