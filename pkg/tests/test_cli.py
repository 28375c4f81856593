import io
import json

import pytest

from picon.cli import EXIT_BUDGET, EXIT_FALSE, EXIT_OK, EXIT_PARSE, EXIT_USAGE, run
from picon.extraction import extract_protocol
from picon.pal import parse_architecture

from conftest import model_path

METERING = str(model_path("metering.pi"))
CONFORMANT = str(model_path("metering_conformant.pi"))
A1 = str(model_path("a1.pal"))


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_traces_text():
    code, out, _ = call("traces", METERING)
    assert code == EXIT_OK
    assert out == "<has(lM, xc1:k1), comp(lM, xm1:xc1), tau, rcv_att(lO, lM, xm1:k1)>\n"


def test_traces_json():
    code, out, _ = call("traces", METERING, "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out)["traces"]) == 1


def test_states_json():
    code, out, _ = call("states", METERING, "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out)["states"]) == 5


@pytest.mark.parametrize("cmd", [["traces", METERING], ["states", METERING], ["extract", CONFORMANT],
                                 ["check", CONFORMANT, A1, "--bisim"]])
def test_json_output_is_deterministic(cmd):
    first = call(*cmd, "--format", "json")[1]
    assert all(call(*cmd, "--format", "json")[1] == first for _ in range(3))


def test_extract_pal_round_trips(metering):
    code, out, _ = call("extract", METERING, "--format", "pal")
    assert code == EXIT_OK
    assert parse_architecture(out).relations == extract_protocol(metering).relations


def test_check_metering_fails_with_diff():
    code, out, _ = call("check", METERING, A1, "--format", "json")
    assert code == EXIT_FALSE
    report = json.loads(out)
    assert report["holds"] is False
    assert len(report["missing"]) == 3


def test_check_conformant_holds():
    code, out, _ = call("check", CONFORMANT, A1, "--bisim", "--format", "json")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["holds"] and report["bisimulation"]
    code, out, _ = call("check", CONFORMANT, A1, "--mode", "weak", "--bisim")
    assert code == EXIT_OK
    assert "simulation: holds" in out


@pytest.mark.parametrize("prop,expected", [("operator_gets_reading", EXIT_OK), ("reading_private", EXIT_FALSE),
                                           ("meter_knows_integrity", EXIT_OK)])
def test_eval_protocol(prop, expected):
    assert call("eval", METERING, "--property", prop)[0] == expected


@pytest.mark.parametrize("r", ["1", "2", "3"])
def test_eval_architecture(r):
    assert call("eval", A1, "--property", "hasall_O_Xfee", "--range", f"r={r}")[0] == EXIT_OK
    assert call("eval", A1, "--property", "hasnone_O_Xc", "--range", f"r={r}")[0] == EXIT_FALSE


def test_unknown_property_is_usage_error():
    code, _, err = call("eval", A1, "--property", "nope")
    assert code == EXIT_USAGE
    assert "hasall_O_Xfee" in err


def test_missing_file():
    assert call("traces", "/nonexistent/x.pi")[0] == EXIT_USAGE


def test_bad_arguments():
    assert call()[0] == EXIT_USAGE
    assert call("traces", METERING, "--max-nodes", "0")[0] == EXIT_USAGE
    assert call("eval", A1, "--property", "x", "--range", "r")[0] == EXIT_USAGE
    assert call("traces", METERING, "--format", "pal")[0] == EXIT_USAGE


def test_parse_error(tmp_path):
    bad = tmp_path / "bad.pi"
    bad.write_text("component a trusts {} { let = in nil }\n")
    code, _, err = call("traces", str(bad))
    assert code == EXIT_PARSE
    assert "1:" in err


def test_budget_exit(tmp_path):
    assert call("states", METERING, "--max-nodes", "2")[0] == EXIT_BUDGET


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("PICON_BUDGET", "2")
    assert call("traces", METERING)[0] == EXIT_BUDGET


def test_extra_theory_file(tmp_path):
    th = tmp_path / "t.th"
    th.write_text("fun f/1; fun h/1; rule h(f(x)) -> x;\n")
    src = tmp_path / "p.pi"
    src.write_text("component a trusts {} { let x = fresh n in let y = h(f(x)) in if y = x then nil }\n")
    code, out, _ = call("extract", str(src), "--theory", str(th), "--format", "json")
    assert code == EXIT_OK
    assert "check a (y = x)" in json.loads(out)["relations"]
