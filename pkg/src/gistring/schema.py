"""JSON encoding of problem descriptions and results.

Problem documents look like::

    {"kind": "gis", "L": "infinite" | {"finite": 1.0},
     "w": {"grid": [...], "segments": [[c0, c1, c2, c3], ...], "tail": {...}},
     "upsilon": {"atoms": [[x, weight], ...], "density": {"grid": [...], "segments": [...], "tail": {...}}}}

``krein`` documents carry ``"omega"`` (a measure) instead of ``w``/``upsilon``;
``ch`` documents carry ``"u"``, ``"upsilon"`` and optionally ``"upsilon_tail"``;
``delta_prime`` documents carry ``"support"`` or ``"generator"`` and an
optional ``"truncation"``.  Non-finite numbers in results are written as the
strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .camassa_holm import CHProblem, ExpDensity
from .coefficients import (
    AntiDerivative,
    ConstantTail,
    EndpointDensity,
    EndpointTail,
    GIString,
    GrowthTail,
    MeasureRepr,
    PowerDensity,
    PowerTail,
)
from .delta_prime import ExplicitSupport, PowerLawGenerator

KINDS = ("gis", "krein", "ch", "delta_prime")


class SchemaError(ValueError):
    """A problem document does not match the schema."""


@dataclass(frozen=True, eq=False)
class ProblemDoc:
    kind: str
    problem: Any
    truncation: float | None = None


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{where}: missing field {key!r}")
    return d[key]


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _num_list(v, where: str) -> list:
    if not isinstance(v, list):
        raise SchemaError(f"{where}: expected a list")
    return [_num(x, where) for x in v]


def encode_length(L: float):
    return "infinite" if math.isinf(L) else {"finite": float(L)}


def decode_length(v) -> float:
    if v == "infinite":
        return math.inf
    if isinstance(v, dict) and set(v) == {"finite"}:
        return _num(v["finite"], "L.finite")
    raise SchemaError('L must be "infinite" or {"finite": x}')


def finite_or_tag(x):
    """Replace non-finite floats by string tags, recursively."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {k: finite_or_tag(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [finite_or_tag(v) for v in x]
    return x


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(finite_or_tag(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# tails
# --------------------------------------------------------------------------


def encode_tail(t) -> dict | None:
    if t is None:
        return None
    if isinstance(t, ConstantTail):
        return {"kind": "exact_constant", "c": t.c}
    if isinstance(t, PowerTail):
        return {"kind": "power_decay", "c": t.c, "A": t.amplitude, "alpha": t.alpha, "shift": t.shift}
    if isinstance(t, GrowthTail):
        return {"kind": "growth", "c": t.c, "A": t.amplitude, "gamma": t.gamma, "shift": t.shift}
    if isinstance(t, EndpointTail):
        return {"kind": "endpoint", "c": t.c, "A": t.amplitude, "alpha": t.alpha}
    raise SchemaError(f"cannot encode tail {t!r}")


def decode_tail(d):
    if d is None:
        return None
    kind = _need(d, "kind", "tail")
    g = lambda k, default=None: _num(d[k], f"tail.{k}") if k in d else default  # noqa: E731
    if kind == "exact_constant":
        return ConstantTail(g("c"))
    if kind == "power_decay":
        return PowerTail(g("c"), g("A"), g("alpha"), g("shift", 0.0))
    if kind == "growth":
        return GrowthTail(g("c"), g("A"), g("gamma"), g("shift", 0.0))
    if kind == "endpoint":
        return EndpointTail(g("c"), g("A"), g("alpha"))
    raise SchemaError(f"unknown tail kind {kind!r}")


def encode_density_tail(t) -> dict | None:
    if t is None:
        return None
    if isinstance(t, PowerDensity):
        return {"kind": "power_density", "B": t.B, "beta": t.beta, "shift": t.shift}
    if isinstance(t, EndpointDensity):
        return {"kind": "endpoint_density", "B": t.B, "beta": t.beta}
    raise SchemaError(f"cannot encode density tail {t!r}")


def decode_density_tail(d):
    if d is None:
        return None
    kind = _need(d, "kind", "density tail")
    if kind == "power_density":
        return PowerDensity(_num(d["B"], "B"), _num(d["beta"], "beta"), _num(d.get("shift", 0.0), "shift"))
    if kind == "endpoint_density":
        return EndpointDensity(_num(d["B"], "B"), _num(d["beta"], "beta"))
    raise SchemaError(f"unknown density tail kind {kind!r}")


# --------------------------------------------------------------------------
# coefficients
# --------------------------------------------------------------------------


def encode_anti_derivative(w: AntiDerivative) -> dict:
    return {"grid": list(w.grid), "segments": [list(s) for s in w.segments], "tail": encode_tail(w.tail)}


def decode_anti_derivative(d, L: float) -> AntiDerivative:
    grid = _num_list(_need(d, "grid", "w"), "w.grid")
    segs = _need(d, "segments", "w")
    if not isinstance(segs, list):
        raise SchemaError("w.segments must be a list")
    return AntiDerivative(L, tuple(grid), tuple(tuple(_num_list(s, "w.segments")) for s in segs), decode_tail(d.get("tail")))


def encode_measure(m: MeasureRepr) -> dict:
    out = {"atoms": [[p, wt] for p, wt in m.atoms], "sign": "nonnegative" if m.nonnegative else "signed"}
    if m.density_grid:
        out["density"] = {
            "grid": list(m.density_grid),
            "segments": [list(s) for s in m.density_segments],
            "tail": encode_density_tail(m.tail),
        }
    return out


def decode_measure(d, L: float, nonnegative_default: bool = True) -> MeasureRepr:
    if d is None:
        return MeasureRepr.zero(L)
    if not isinstance(d, dict):
        raise SchemaError("measure must be an object")
    atoms = d.get("atoms", [])
    if not isinstance(atoms, list) or any(not isinstance(a, list) or len(a) != 2 for a in atoms):
        raise SchemaError("atoms must be a list of [position, weight] pairs")
    atoms = tuple((_num(a[0], "atom"), _num(a[1], "atom")) for a in atoms)
    sign = d.get("sign", "nonnegative" if nonnegative_default else "signed")
    if sign not in ("nonnegative", "signed"):
        raise SchemaError(f"unknown sign {sign!r}")
    dens = d.get("density")
    grid, segs, tail = (), (), None
    if dens is not None:
        grid = tuple(_num_list(_need(dens, "grid", "density"), "density.grid"))
        segs = tuple(tuple(_num_list(s, "density.segments")) for s in _need(dens, "segments", "density"))
        tail = decode_density_tail(dens.get("tail"))
    return MeasureRepr(L, atoms, grid, segs, tail, sign == "nonnegative")


def encode_string(s: GIString) -> dict:
    return {
        "kind": "gis",
        "L": encode_length(s.L),
        "w": encode_anti_derivative(s.w),
        "upsilon": encode_measure(s.upsilon),
    }


# --------------------------------------------------------------------------
# problem documents
# --------------------------------------------------------------------------


def encode_problem(doc: ProblemDoc) -> dict:
    p = doc.problem
    if doc.kind == "gis":
        return encode_string(p)
    if doc.kind == "krein":
        return {"kind": "krein", "L": encode_length(p.length), "omega": encode_measure(p)}
    if doc.kind == "ch":
        out = {"kind": "ch", "L": "infinite", "u": encode_anti_derivative(p.u), "upsilon": encode_measure(p.upsilon)}
        if p.upsilon_tail is not None:
            t = p.upsilon_tail
            out["upsilon_tail"] = {"B": t.B, "kappa": t.kappa, "start": t.start}
        return out
    if doc.kind == "delta_prime":
        out = {"kind": "delta_prime", "L": "infinite"}
        if isinstance(p, ExplicitSupport):
            out["support"] = {"positions": [float(v) for v in p.positions], "strengths": [float(v) for v in p.strengths]}
        else:
            out["generator"] = {"a": p.a, "gamma": p.gamma, "rule": p.rule, "b": p.b, "c0": p.c0, "rho": p.rho}
        if doc.truncation is not None:
            out["truncation"] = doc.truncation
        return out
    raise SchemaError(f"unknown kind {doc.kind!r}")


def decode_problem(d) -> ProblemDoc:
    if not isinstance(d, dict):
        raise SchemaError("problem document must be a JSON object")
    kind = _need(d, "kind", "document")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "gis":
        L = decode_length(_need(d, "L", "gis"))
        w = decode_anti_derivative(_need(d, "w", "gis"), L)
        return ProblemDoc(kind, GIString(L, w, decode_measure(d.get("upsilon"), L)))
    if kind == "krein":
        L = decode_length(_need(d, "L", "krein"))
        return ProblemDoc(kind, decode_measure(_need(d, "omega", "krein"), L))
    if kind == "ch":
        if d.get("L", "infinite") != "infinite":
            raise SchemaError("Camassa-Holm problems live on the half line")
        u = decode_anti_derivative(_need(d, "u", "ch"), math.inf)
        ups = decode_measure(d.get("upsilon"), math.inf)
        t = d.get("upsilon_tail")
        tail = None if t is None else ExpDensity(_num(t["B"], "B"), _num(t["kappa"], "kappa"), _num(t["start"], "start"))
        return ProblemDoc(kind, CHProblem(u, ups, tail))
    trunc = d.get("truncation")
    trunc = None if trunc is None else _num(trunc, "truncation")
    if "support" in d:
        s = d["support"]
        prob = ExplicitSupport(_num_list(_need(s, "positions", "support"), "positions"), _num_list(_need(s, "strengths", "support"), "strengths"))
    elif "generator" in d:
        g = d["generator"]
        prob = PowerLawGenerator(
            _num(_need(g, "a", "generator"), "a"),
            _num(_need(g, "gamma", "generator"), "gamma"),
            g.get("rule", "minus_gap"),
            _num(g.get("b", 0.0), "b"),
            _num(g.get("c0", 0.0), "c0"),
            _num(g.get("rho", 2.0), "rho"),
        )
    else:
        raise SchemaError("delta_prime needs a 'support' or a 'generator'")
    return ProblemDoc(kind, prob, trunc)


def load_problem(text: str) -> ProblemDoc:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return decode_problem(d)
