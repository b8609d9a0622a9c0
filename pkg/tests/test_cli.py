import io
import json
import math

import pytest

from gistring.cli import main
from gistring.criteria import Answer, Classification
from gistring.pencil import Spectrum
from gistring.schema import SchemaError, decode_problem, encode_problem, load_problem

ZERO_GIS = {"kind": "gis", "L": "infinite", "w": {"grid": [0.0], "segments": [], "tail": {"kind": "exact_constant", "c": 0.0}}}
KREIN = {"kind": "krein", "L": "infinite", "omega": {"atoms": [[2.0, 0.5]]}}
KREIN_DENSITY = {
    "kind": "krein",
    "L": "infinite",
    "omega": {"density": {"grid": [0.0], "segments": [], "tail": {"kind": "power_density", "B": 1.0, "beta": 4.0, "shift": 1.0}}},
}
CH = {
    "kind": "ch",
    "L": "infinite",
    "u": {"grid": [0.0, 1.0], "segments": [[1.0, -1.0]], "tail": {"kind": "exact_constant", "c": 0.0}},
    "upsilon": {"atoms": [[0.5, 1.0]]},
}
DP = {"kind": "delta_prime", "L": "infinite", "generator": {"a": 1.0, "gamma": 0.5}, "truncation": 4.0}
ATOM_UPS = {
    "kind": "gis",
    "L": {"finite": 2.0},
    "w": {"grid": [0.0, 2.0], "segments": [[0.0]], "tail": None},
    "upsilon": {"atoms": [[1.0, 1.0]]},
}
INCONCLUSIVE = {"kind": "delta_prime", "L": "infinite", "generator": {"a": 1.0, "gamma": 1.5}, "truncation": 4.0}


def _write(tmp_path, doc, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_zero_string(tmp_path, capsys):
    code, out, _ = _run(capsys, ["classify", "--input", _write(tmp_path, ZERO_GIS)])
    assert code == 0
    d = json.loads(out)
    assert d["discrete"] == "Yes"
    assert Classification.from_dict(d).discrete.value is Answer.YES


def test_classify_krein_trace(tmp_path, capsys):
    code, out, _ = _run(capsys, ["classify", "--input", _write(tmp_path, KREIN_DENSITY), "--p", "0.6,1,2"])
    d = json.loads(out)
    assert code == 0
    assert d["trace"] == pytest.approx(1 / 6)
    assert [e["p"] for e in d["schatten"]] == [0.6, 2.0]
    assert d["trace_class"] == "Yes"


def test_all_inconclusive_exit_code(tmp_path, capsys):
    code, out, _ = _run(capsys, ["classify", "--input", _write(tmp_path, INCONCLUSIVE)])
    assert code == 2
    assert json.loads(out)["discrete"] == "Inconclusive"


@pytest.mark.parametrize(
    "text",
    ["not json", json.dumps({"kind": "nope"}), json.dumps({"kind": "gis", "L": 3}), json.dumps({"kind": "delta_prime"})],
)
def test_bad_input_exit_code(tmp_path, capsys, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    code, _, err = _run(capsys, ["classify", "--input", str(p)])
    assert code == 1
    assert err.startswith("error:")


def test_missing_file(capsys):
    code, _, err = _run(capsys, ["classify", "--input", "/nonexistent/x.json"])
    assert code == 1 and "error" in err


def test_classification_round_trip(tmp_path, capsys):
    for doc in (ZERO_GIS, KREIN, CH, DP, ATOM_UPS):
        _, out, _ = _run(capsys, ["classify", "--input", _write(tmp_path, doc)])
        d = json.loads(out)
        assert Classification.from_dict(d).to_dict() == d


def test_spectrum_round_trip_and_values(tmp_path, capsys):
    code, out, _ = _run(capsys, ["spectrum", "--input", _write(tmp_path, ATOM_UPS), "--grid-n", "32"])
    assert code == 0
    d = json.loads(out)
    # f = x, then 2 - x: the derivative jump -2 equals -z^2 f(1)
    assert sorted(d["eigenvalues"]) == pytest.approx([-math.sqrt(2), math.sqrt(2)])
    assert d["kind"] == "gis"
    spec = Spectrum.from_dict(d)
    again = spec.to_dict()
    assert all(again[k] == d[k] for k in again)


def test_spectrum_with_tolerance(tmp_path, capsys):
    code, out, _ = _run(capsys, ["spectrum", "--input", _write(tmp_path, KREIN), "--tol", "1e-10"])
    d = json.loads(out)
    assert code == 0 and d["converged"]
    assert d["eigenvalues"][0] == pytest.approx(1.0)


def test_spectrum_delta_prime(tmp_path, capsys):
    code, out, _ = _run(capsys, ["spectrum", "--input", _write(tmp_path, DP), "--grid-n", "64"])
    d = json.loads(out)
    assert code == 0
    assert d["discreteness_caveat"] is True
    assert d["notes"]


def test_transform_round_trip(tmp_path, capsys):
    code, out, _ = _run(capsys, ["transform", "--input", _write(tmp_path, CH)])
    assert code == 0
    d = json.loads(out)
    doc = decode_problem(d)
    assert doc.kind == "gis"
    assert encode_problem(doc) == d
    # atom at s = 0.5 maps to t = e^0.5 - 1 with weight e^-0.5
    (t, wt), = d["upsilon"]["atoms"]
    assert t == pytest.approx(math.expm1(0.5)) and wt == pytest.approx(math.exp(-0.5))


@pytest.mark.parametrize("doc", [ZERO_GIS, KREIN, KREIN_DENSITY, CH, DP, ATOM_UPS])
def test_problem_round_trip(doc):
    d = encode_problem(load_problem(json.dumps(doc)))
    assert encode_problem(decode_problem(d)) == d


def test_output_is_deterministic(tmp_path, capsys):
    path = _write(tmp_path, CH)
    outs = []
    for i in range(2):
        target = str(tmp_path / f"out{i}.json")
        assert main(["spectrum", "--input", path, "--grid-n", "48", "--out", target]) == 0
        outs.append(open(target, "rb").read())
    assert outs[0] == outs[1]


def test_stdin_input(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(KREIN)))
    code, out, _ = _run(capsys, ["classify", "--input", "-"])
    assert code == 0 and json.loads(out)["kind"] == "krein"


@pytest.mark.parametrize("suite", ["traces", "hs", "ch-consistency", "dp-calibration", "calibration"])
def test_verify_suites_pass(capsys, suite):
    code, out, _ = _run(capsys, ["verify", suite])
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_verify_suite_from_file(tmp_path, capsys):
    code, out, _ = _run(capsys, ["verify", "--input", _write(tmp_path, {"suite": "dp-calibration"})])
    assert code == 0 and json.loads(out)["suite"] == "dp-calibration"


def test_verify_unknown_suite(capsys):
    code, _, err = _run(capsys, ["verify", "bogus"])
    assert code == 1 and "unknown suite" in err


def test_schema_rejects_bad_measure():
    with pytest.raises(SchemaError):
        load_problem(json.dumps({"kind": "krein", "L": "infinite", "omega": {"atoms": [[1.0]]}}))
