"""Closed-form discreteness and Schatten-class verdicts for strings.

The tail functionals decide everything.  On the half line

    F(x) = x * int_x^inf (w - c)^2 + x * upsilon([x, inf)),

and on a finite interval

    F(x) = (L - x) * (int_0^x w^2 + upsilon([0, x))).

Zero is outside the spectrum iff ``limsup F`` is finite, the spectrum is
discrete iff ``F -> 0``, and for ``p > 1`` the ``p``-summability of the
reciprocal eigenvalues is equivalent to convergence of
``int F^(p/2) dx/x`` (resp. ``dx/(L-x)``).  For the tail models supported
here ``F`` decays like a power whenever it tends to zero, so the integral
test reduces to the limit; the compact part always contributes a finite
amount because ``F(x) <= const * x`` near the regular endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .coefficients import (
    ConstantTail,
    EndpointDensity,
    EndpointTail,
    GIString,
    GrowthTail,
    MeasureRepr,
    PowerDensity,
    PowerTail,
    UsageError,
    cesaro_mean_limit,
)

INF = math.inf


class Answer(str, Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    value: Answer
    evidence: str = ""

    def __post_init__(self):
        object.__setattr__(self, "value", Answer(self.value))

    @property
    def is_yes(self) -> bool:
        return self.value is Answer.YES

    @property
    def is_no(self) -> bool:
        return self.value is Answer.NO

    def to_dict(self):
        return {"value": self.value.value, "evidence": self.evidence}

    @classmethod
    def from_dict(cls, d):
        return cls(Answer(d["value"]), d.get("evidence", ""))


def yes(msg=""):
    return Verdict(Answer.YES, msg)


def no(msg=""):
    return Verdict(Answer.NO, msg)


def inconclusive(msg=""):
    return Verdict(Answer.INCONCLUSIVE, msg)


class ConsistencyError(AssertionError):
    """A classification violates the implication chain between verdicts."""


@dataclass(frozen=True)
class Classification:
    """Tri-state verdicts plus the constant ``c`` and any computable sums.

    ``trace_status``/``hs_status`` say how the sums may be read:
    ``identity`` (membership established), ``conditional`` (identity holds if
    the membership holds, which was not decided), ``upper_bound`` or ``None``.
    """

    kind: str
    L: float
    c: float | None
    c_provenance: str
    zero_not_in_spectrum: Verdict
    discrete: Verdict
    schatten: tuple = ()
    trace_class: Verdict = field(default_factory=lambda: inconclusive())
    trace_sum: float | None = None
    trace_status: str | None = None
    hs_sum: float | None = None
    hs_status: str | None = None
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "schatten", tuple((float(p), v) for p, v in self.schatten))
        problems = check_consistency(self)
        if problems:
            raise ConsistencyError("; ".join(problems))

    def schatten_verdict(self, p) -> Verdict | None:
        for q, v in self.schatten:
            if q == p:
                return v
        return None

    def verdicts(self) -> dict:
        """Flat ``name -> Answer`` map used for agreement checks."""
        out = {
            "zero_not_in_spectrum": self.zero_not_in_spectrum.value,
            "discrete": self.discrete.value,
            "trace_class": self.trace_class.value,
        }
        for p, v in self.schatten:
            out[f"S_{p:g}"] = v.value
        return out

    @property
    def all_inconclusive(self) -> bool:
        return all(v is Answer.INCONCLUSIVE for v in self.verdicts().values())

    def to_dict(self) -> dict:
        """Flat JSON form: verdict strings at top level, derivations under ``evidence``."""
        evidence = {
            "zero_not_in_spectrum": self.zero_not_in_spectrum.evidence,
            "discrete": self.discrete.evidence,
            "trace_class": self.trace_class.evidence,
        }
        for p, v in self.schatten:
            evidence[f"S_{p:g}"] = v.evidence
        return {
            "kind": self.kind,
            "L": "infinite" if math.isinf(self.L) else {"finite": self.L},
            "c": self.c,
            "c_provenance": self.c_provenance,
            "zero_not_in_spectrum": self.zero_not_in_spectrum.value.value,
            "discrete": self.discrete.value.value,
            "schatten": [{"p": p, "verdict": v.value.value} for p, v in self.schatten],
            "trace_class": self.trace_class.value.value,
            "trace": self.trace_sum,
            "trace_status": self.trace_status,
            "hs": self.hs_sum,
            "hs_status": self.hs_status,
            "evidence": evidence,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d) -> Classification:
        L = INF if d["L"] == "infinite" else float(d["L"]["finite"])
        ev = d.get("evidence", {})

        def verdict(name, value):
            return Verdict(Answer(value), ev.get(name, ""))

        return cls(
            d["kind"],
            L,
            d["c"],
            d["c_provenance"],
            verdict("zero_not_in_spectrum", d["zero_not_in_spectrum"]),
            verdict("discrete", d["discrete"]),
            tuple((e["p"], verdict(f"S_{e['p']:g}", e["verdict"])) for e in d["schatten"]),
            verdict("trace_class", d["trace_class"]),
            d["trace"],
            d["trace_status"],
            d["hs"],
            d["hs_status"],
            tuple(d["warnings"]),
        )


def check_consistency(cls: Classification) -> list[str]:
    """Violations of ``S_p => S_p' (p' >= p) => discrete => 0 not in spectrum``."""
    out = []
    ladder = sorted(list(cls.schatten) + [(1.0, cls.trace_class)], key=lambda e: e[0])
    for i, (p, v) in enumerate(ladder):
        if v.is_yes:
            for q, u in ladder[i + 1 :]:
                if q >= p and u.is_no:
                    out.append(f"S_{p:g} is Yes but S_{q:g} is No")
            if not cls.discrete.is_yes:
                out.append(f"S_{p:g} is Yes but discreteness is {cls.discrete.value.value}")
    if cls.discrete.is_yes and not cls.zero_not_in_spectrum.is_yes:
        out.append("discrete spectrum but zero not certified outside the spectrum")
    return out


# --------------------------------------------------------------------------
# tail limits
# --------------------------------------------------------------------------


def _fmt(v):
    return "inf" if math.isinf(v) else f"{v:.6g}"


def _omega_tail_limit_halfline(w, c):
    """``lim x int_x^inf (w - c)^2`` from the tail model (``c`` must exist)."""
    t = w.tail
    if isinstance(t, ConstantTail) or (isinstance(t, (PowerTail, GrowthTail)) and t.amplitude == 0.0):
        return 0.0, "w - c vanishes identically beyond the grid"
    if isinstance(t, PowerTail):
        a, A = t.alpha, t.amplitude
        if a <= 0.5:
            return INF, f"(w - c)^2 ~ x^{-2 * a:g} is not integrable at infinity"
        if a > 1:
            return 0.0, f"x int_x (w - c)^2 ~ {A * A / (2 * a - 1):.6g} x^{2 - 2 * a:g} -> 0"
        if a == 1:
            return A * A, f"x int_x (w - c)^2 -> A^2 = {A * A:.6g}"
        return INF, f"x int_x (w - c)^2 ~ x^{2 - 2 * a:g} -> inf"
    raise UsageError(f"no closed form for tail {t!r}")


def _upsilon_tail_limit_halfline(ups: MeasureRepr):
    """``lim x * upsilon([x, inf))``."""
    t = ups.tail
    if t is None or t.B == 0.0:
        return 0.0, "upsilon has bounded support"
    b = t.beta
    if b <= 1:
        return INF, f"upsilon tail density ~ x^{-b:g} has infinite mass"
    if b > 2:
        return 0.0, f"x upsilon([x, inf)) ~ x^{2 - b:g} -> 0"
    if b == 2:
        return t.B, f"x upsilon([x, inf)) -> B = {t.B:.6g}"
    return INF, f"x upsilon([x, inf)) ~ x^{2 - b:g} -> inf"


def _omega_tail_limit_finite(w):
    """``lim (L - x) int_0^x w^2``."""
    t = w.tail
    if t is None or t.amplitude == 0.0:
        return 0.0, "w bounded up to L"
    a, A = t.alpha, t.amplitude
    if a <= 0.5:
        return 0.0, f"w^2 ~ (L - x)^{-2 * a:g} is integrable up to L (or log-divergent)"
    if a < 1:
        return 0.0, f"(L - x) int_0^x w^2 ~ (L - x)^{2 - 2 * a:g} -> 0"
    if a == 1:
        return A * A, f"(L - x) int_0^x w^2 -> A^2 = {A * A:.6g}"
    return INF, f"(L - x) int_0^x w^2 ~ (L - x)^{2 - 2 * a:g} -> inf"


def _measure_tail_limit_finite(m: MeasureRepr, name):
    """``lim (L - x) * m([0, x))``."""
    t = m.tail
    if t is None or t.B == 0.0:
        return 0.0, f"{name} has finite mass"
    b = t.beta
    if b < 2:
        return 0.0, f"(L - x) {name}([0, x)) -> 0 (density exponent {b:g} < 2)"
    if b == 2:
        return t.B, f"(L - x) {name}([0, x)) -> B = {t.B:.6g}"
    return INF, f"(L - x) {name}([0, x)) ~ (L - x)^{2 - b:g} -> inf"


def _krein_tail_limit_halfline(m: MeasureRepr):
    t = m.tail
    if t is None or t.B == 0.0:
        return 0.0, "omega has bounded support"
    b = t.beta
    if b <= 1:
        return INF, f"omega tail density ~ x^{-b:g} has infinite mass"
    if b > 2:
        return 0.0, f"x omega([x, inf)) ~ x^{2 - b:g} -> 0"
    if b == 2:
        return t.B, f"x omega([x, inf)) -> B = {t.B:.6g}"
    return INF, f"x omega([x, inf)) ~ x^{2 - b:g} -> inf"


def _verdicts_from_limit(limit, evidence):
    """Boundedness and discreteness verdicts from ``lim F``."""
    if math.isinf(limit):
        return no(f"tail functional unbounded: {evidence}"), no(f"tail functional unbounded: {evidence}")
    if limit > 0:
        return yes(f"tail functional -> {_fmt(limit)}: {evidence}"), no(f"tail functional -> {_fmt(limit)} > 0: {evidence}")
    return yes(f"tail functional -> 0: {evidence}"), yes(f"tail functional -> 0: {evidence}")


def _schatten_from_discrete(discrete: Verdict, p_list, decay_note):
    out = []
    for p in p_list:
        if discrete.is_yes:
            out.append((p, yes(f"tail functional decays ({decay_note}); integral converges for p = {p:g}")))
        else:
            out.append((p, no(f"membership requires discreteness ({discrete.evidence})")))
    return tuple(out)


def _check_p_list(p_list, lower, what):
    p_list = sorted({float(p) for p in p_list})
    bad = [p for p in p_list if p <= lower]
    if bad:
        raise UsageError(f"{what} criteria need p > {lower:g}; got {bad}")
    return tuple(p_list)


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------


def tail_functional(s: GIString, x) -> float:
    """Exact value of the tail functional at ``x``; ``inf`` when ``c`` is absent."""
    x = float(x)
    if s.is_finite:
        return (s.L - x) * (s.w.integral(0.0, x, power=2) + s.upsilon.mass(0.0, x))
    c = cesaro_mean_limit(s.w)
    if c is None:
        return INF
    return x * (s.w.integral(x, INF, power=2, shift=c) + s.upsilon.mass(x, INF))


def krein_tail_functional(omega: MeasureRepr, x) -> float:
    x = float(x)
    if math.isinf(omega.length):
        return x * omega.mass(x, INF)
    return (omega.length - x) * omega.mass(0.0, x)


def _finite_sum(v):
    return None if v is None or not math.isfinite(v) else float(v)


def gis_trace_sum(s: GIString, c=None) -> float | None:
    """Right-hand side of the trace identity (requires trace-class membership)."""
    if s.is_finite:
        return _finite_sum(s.w.integral(0.0, s.L, weight=(-1.0, 2.0 / s.L)))
    c = cesaro_mean_limit(s.w) if c is None else c
    if c is None:
        return None
    return _finite_sum(-s.w.integral(0.0, INF, shift=c))


def gis_hs_sum(s: GIString, c=None) -> float | None:
    """``2 int x (w - c)^2 + 2 int x dupsilon`` (half line) or the finite-L upper bound."""
    if s.is_finite:
        L = s.L
        val = 2 * s.w.integral(0.0, L, weight=(L, -1.0), power=2) + 2 * s.upsilon.moment((0.0, 1.0, -1.0 / L))
        return _finite_sum(val)
    c = cesaro_mean_limit(s.w) if c is None else c
    if c is None:
        return None
    return _finite_sum(2 * s.w.integral(0.0, INF, weight=(0.0, 1.0), power=2, shift=c) + 2 * s.upsilon.moment((0.0, 1.0)))


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


def _finite_rank(s: GIString) -> bool:
    return s.w.is_piecewise_constant and not s.upsilon.has_density


def _trace_class_verdict(s: GIString, discrete: Verdict) -> tuple[Verdict, list]:
    warnings = []
    if not discrete.is_yes:
        return no("trace class requires a discrete spectrum"), warnings
    if s.upsilon.has_density:
        return no("upsilon has an absolutely continuous part; trace class forces it to be singular"), warnings
    if _finite_rank(s):
        return yes("omega and upsilon are finite sums of point masses: finitely many eigenvalues"), warnings
    warnings.append(
        "necessary trace-class conditions hold (square-root integral finite, w - c integrable, upsilon singular); "
        "they are not sufficient, so trace class is left undecided"
    )
    return inconclusive("only necessary conditions are available at p = 1"), warnings


def classify(s: GIString, p_list=(2.0,)) -> Classification:
    """Verdicts for a generalized indefinite string from its tail models."""
    p_list = _check_p_list(p_list, 1.0, "generalized indefinite string")
    warnings = []
    if s.is_finite:
        c, prov = None, "not_applicable"
        lw, ew = _omega_tail_limit_finite(s.w)
        lu, eu = _measure_tail_limit_finite(s.upsilon, "upsilon")
    else:
        c = cesaro_mean_limit(s.w)
        if c is None:
            msg = "the mean value (1/x) int_0^x w diverges, so no constant c exists"
            schatten = tuple((p, no(msg)) for p in p_list)
            return Classification("gis", s.L, None, "absent", no(msg), no(msg), schatten, no(msg))
        prov = "closed_form"
        lw, ew = _omega_tail_limit_halfline(s.w, c)
        lu, eu = _upsilon_tail_limit_halfline(s.upsilon)
    limit = lw + lu
    zero_ok, discrete = _verdicts_from_limit(limit, f"{ew}; {eu}")
    schatten = _schatten_from_discrete(discrete, p_list, "power law or eventually zero")
    tc, more = _trace_class_verdict(s, discrete)
    warnings += more
    trace = hs = None
    trace_status = hs_status = None
    if discrete.is_yes:
        hs = gis_hs_sum(s, c)
        hs_status = "upper_bound" if s.is_finite else "identity"
        if not tc.is_no:
            trace = gis_trace_sum(s, c)
            trace_status = "identity" if tc.is_yes else "conditional"
    return Classification(
        "gis", s.L, c, prov, zero_ok, discrete, schatten, tc, trace, trace_status, hs, hs_status, tuple(warnings)
    )


def classify_krein(omega: MeasureRepr, p_list=(1.0,)) -> Classification:
    """Verdicts for a Krein string (non-negative ``omega``, ``upsilon = 0``)."""
    if not omega.nonnegative:
        raise UsageError("signed omega: use classify on the anti-derivative instead")
    p_list = _check_p_list(p_list, 0.5, "Krein string")
    L = omega.length
    if math.isinf(L):
        limit, ev = _krein_tail_limit_halfline(omega)
    else:
        limit, ev = _measure_tail_limit_finite(omega, "omega")
    zero_ok, discrete = _verdicts_from_limit(limit, ev)
    schatten = _schatten_from_discrete(discrete, [p for p in p_list if p != 1.0], "power law or eventually zero")
    tc = _schatten_from_discrete(discrete, [1.0], "power law or eventually zero")[0][1]
    trace = None
    status = None
    if tc.is_yes:
        weight = (0.0, 1.0) if math.isinf(L) else (0.0, 1.0, -1.0 / L)
        trace = _finite_sum(omega.moment(weight))
        status = "identity"
    warnings = ()
    if omega.has_density:
        warnings = ("omega has a density: the spectrum is not 1/2-summable",)
    return Classification(
        "krein", L, None, "not_applicable", zero_ok, discrete, schatten, tc, trace, status, None, None, warnings
    )


def singularity_gate(obj, claim: str, classification: Classification | None = None) -> Verdict:
    """Check the singularity requirement behind a trace-class (resp. 1/2-class) claim.

    ``claim`` is ``"GIS_S1"`` (``obj`` a :class:`GIString`, checks ``upsilon``)
    or ``"Krein_Shalf"`` (``obj`` the Krein ``omega``).  Returns ``No`` when the
    claim is made and the relevant measure has a density component.
    """
    if claim == "GIS_S1":
        measure = obj.upsilon
        claimed = classification is None or classification.trace_class.is_yes
    elif claim == "Krein_Shalf":
        measure = obj
        v = None if classification is None else classification.schatten_verdict(0.5)
        claimed = classification is None or (v is not None and v.is_yes)
    else:
        raise UsageError(f"unknown claim {claim!r}")
    if not claimed:
        return yes("no membership claimed; nothing to check")
    if measure.has_density:
        return no("membership claimed but the measure has an absolutely continuous component")
    return yes("measure is purely atomic")


def consistent_with(a: Classification, b: Classification, skip_inconclusive: bool = True) -> list[str]:
    """Names of verdicts on which two classifications disagree."""
    va, vb = a.verdicts(), b.verdicts()
    out = []
    for k in sorted(set(va) & set(vb)):
        if va[k] != vb[k]:
            if skip_inconclusive and Answer.INCONCLUSIVE in (va[k], vb[k]):
                continue
            out.append(k)
    return out


def evaluate_functional_grid(s: GIString, xs) -> np.ndarray:
    """Tail functional on an array of points (diagnostics and tests)."""
    return np.array([tail_functional(s, x) for x in np.asarray(xs, dtype=float)])
