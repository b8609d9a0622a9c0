"""Command line front end: ``gis classify|spectrum|verify|transform``.

Exit codes: 0 on success, 2 when every verdict of a classification is
Inconclusive, 1 on errors (bad input, unknown suite, failed verification).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import calibration
from .camassa_holm import ch_classify, ch_to_string
from .coefficients import AntiDerivative, GIString, MeasureRepr
from .criteria import classify, classify_krein
from .delta_prime import ExplicitSupport, dp_classify, dp_spectrum, dp_string
from .integral_ops import crossvalidate
from .oracle import PointMassProblem, oracle_spectrum
from .pencil import refine_until, solve_spectrum
from .schema import ProblemDoc, SchemaError, dumps, encode_string, load_problem

SUITES = ("traces", "hs", "crossval", "ch-consistency", "dp-calibration", "calibration")
DEFAULT_P = {"gis": (2.0,), "krein": (1.0, 2.0), "ch": (2.0,), "delta_prime": (2.0,)}


class CliError(Exception):
    """Reported on stderr with exit code 1."""


# --------------------------------------------------------------------------
# pipelines
# --------------------------------------------------------------------------


def _string_of(doc: ProblemDoc) -> GIString:
    if doc.kind == "gis":
        return doc.problem
    if doc.kind == "krein":
        return GIString.from_measures(doc.problem)
    if doc.kind == "ch":
        return ch_to_string(doc.problem)
    # explicit lists may be used untruncated; generators always need a cut
    cut = doc.truncation if isinstance(doc.problem, ExplicitSupport) else _dp_truncation(doc)
    return dp_string(doc.problem, cut)


def _dp_truncation(doc: ProblemDoc) -> float:
    if doc.truncation is not None:
        return doc.truncation
    p = doc.problem
    if isinstance(p, ExplicitSupport):
        return 2.0 * float(p.positions[-1]) if p.positions.size else 1.0
    raise CliError("a delta_prime generator needs a 'truncation'")


def run_classify(doc: ProblemDoc, p_list=None):
    p_list = DEFAULT_P[doc.kind] if p_list is None else p_list
    if doc.kind == "gis":
        return classify(doc.problem, p_list)
    if doc.kind == "krein":
        return classify_krein(doc.problem, p_list)
    if doc.kind == "ch":
        return ch_classify(doc.problem, p_list)
    return dp_classify(doc.problem, p_list)


def run_spectrum(doc: ProblemDoc, grid_n=None, tol=None) -> dict:
    if doc.kind == "delta_prime":
        spec = dp_spectrum(doc.problem, _dp_truncation(doc), n=grid_n or 256, tol=tol)
    else:
        s = _string_of(doc)
        if tol is not None:
            spec = refine_until(s, tol, n0=grid_n or 16)
        else:
            spec = solve_spectrum(s, n=grid_n or 64)
    try:
        disc = run_classify(doc).discrete.is_yes
    except Exception:  # classification failures only affect the caveat
        disc = False
    out = spec.to_dict()
    out["kind"] = doc.kind
    out["discreteness_caveat"] = not disc
    return out


def run_transform(doc: ProblemDoc) -> dict:
    return encode_string(_string_of(doc))


def _crossval_cases():
    inf = math.inf
    one = MeasureRepr.point_masses(inf, [1.0], [1.0])
    two = MeasureRepr.point_masses(inf, [1.0, 3.0], [2.0, 1.0])
    ref_two = np.sort(np.abs(1.0 / oracle_spectrum(PointMassProblem(inf, [1.0, 3.0], [2.0, 1.0]))))[::-1]
    pi2 = [1.0 / (k * k * math.pi**2) for k in range(1, 11)]
    return [
        ("chi = delta_1", one, (64, 256), 1e-8, [1.0]),
        ("chi = 2 delta_1 + delta_3", two, (256, 1024), 1e-8, ref_two),
        ("chi = Lebesgue on [0, 1)", AntiDerivative.identity(1.0), (512, 2048), 1e-4, pi2),
    ]


def run_verify(suite: str) -> dict:
    if suite == "traces":
        r = calibration.trace_corpus()
        return {"suite": suite, "passed": r.passed, "count": r.count, "max_rel_error": r.max_rel_error, "failures": r.failures}
    if suite == "hs":
        r = calibration.hs_corpus()
        return {"suite": suite, "passed": r.passed, "count": r.count, "max_rel_error": r.max_rel_error, "failures": r.failures}
    if suite == "crossval":
        cases = []
        for name, chi, ladder, tol, ref in _crossval_cases():
            rep = crossvalidate(chi, ladder, tol=tol, reference=ref)
            d = rep.to_dict()
            d["hs_passed"] = rep.hs_rel_error <= 1e-3
            d["name"] = name
            d["passed"] = rep.passed and d["hs_passed"]
            cases.append(d)
        return {"suite": suite, "passed": all(c["passed"] for c in cases), "cases": cases}
    if suite == "ch-consistency":
        cases = calibration.ch_consistency()
        return {"suite": suite, "passed": all(c["passed"] for c in cases), "cases": cases}
    if suite == "dp-calibration":
        cases = calibration.dp_calibration()
        return {"suite": suite, "passed": all(c["passed"] for c in cases), "cases": cases}
    if suite == "calibration":
        cases = []
        for case in calibration.classifier_cases():
            cls, bad = case.run()
            cases.append({"name": case.name, "passed": not bad, "mismatch": bad, "derivation": case.derivation})
        gates = calibration.gate_report()
        ok = all(c["passed"] for c in cases) and all(g["passed"] for g in gates)
        return {"suite": suite, "passed": ok, "cases": cases, "gates": gates}
    raise CliError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def _p_list(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad p list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty p list")
    return vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gis", description="Spectral classification of generalized indefinite strings.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_input=True):
        p.add_argument("--input", required=need_input, help="problem JSON file, or - for stdin")
        p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("classify", help="closed-form verdicts")
    common(p)
    p.add_argument("--p", type=_p_list, help="comma-separated Schatten exponents")
    p = sub.add_parser("spectrum", help="numerical eigenvalues")
    common(p)
    p.add_argument("--grid-n", type=_positive_int, help="number of uniform elements")
    p.add_argument("--tol", type=_positive_float, help="refine until leading eigenvalues settle to this tolerance")
    p = sub.add_parser("verify", help="run a verification suite")
    common(p, need_input=False)
    p.add_argument("suite", nargs="?", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--suite", dest="suite_opt", help="alternative to the positional suite name")
    p = sub.add_parser("transform", help="emit the equivalent generalized indefinite string")
    common(p)
    return ap


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = 0
            if args.command == "verify":
                suite = args.suite or args.suite_opt
                if suite is None and args.input:
                    suite = json.loads(_read_input(args.input)).get("suite")
                if suite is None:
                    raise CliError("name a suite")
                result = run_verify(suite)
                code = 0 if result["passed"] else 1
            else:
                doc = load_problem(_read_input(args.input))
                if args.command == "classify":
                    cls = run_classify(doc, args.p)
                    result = cls.to_dict()
                    code = 2 if cls.all_inconclusive else 0
                elif args.command == "spectrum":
                    result = run_spectrum(doc, args.grid_n, args.tol)
                else:
                    result = run_transform(doc)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        _emit(dumps(result), args.out)
        return code
    except (CliError, SchemaError, ValueError, ArithmeticError, RuntimeError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
