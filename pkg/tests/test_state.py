import json

from picon.arch import Trust
from picon.calculus import parse_protocol
from picon.reduction import all_traces, sorted_traces
from picon.state import Equation, StateGraph, initial_state, run_trace, state_semantics, state_to_json
from picon.terms import Name, Variable

from oracles import independent_components_source

xc1, xm1, xsig = Variable("xc1"), Variable("xm1"), Variable("xsig")


def test_initial_state_has_only_trust(metering):
    g = initial_state(metering.system)
    assert g.component("lO").prop_state == frozenset({Trust("lO", "lM")})
    assert not g.component("lM").var_state
    assert g.provenance == frozenset()


def test_final_metering_state(metering):
    (t,) = sorted_traces(all_traces(metering.system, metering.theory))
    g = run_trace(t, initial_state(metering.system), metering.theory)
    lm, lo = g.component("lM"), g.component("lO")
    assert lm.value(xm1) == Name("k1")
    assert Equation(xm1, xc1) in lm.prop_state
    assert lo.value(xm1) == Name("k1")
    assert lo.value(xc1) is None
    assert g.bound_to(Name("k1")) == {xc1, xm1}


def test_state_json_layout(metering):
    states = [state_to_json(g) for g in state_semantics(metering.system, metering.theory)]
    final = max(states, key=lambda d: len(json.dumps(d)))
    assert final == {
        "components": {
            "lM": {"error": False, "props": ["xm1 = xc1"],
                   "vars": {"xc1": "k1", "xm1": "k1", "xsig": "sign(k1, skm)"}},
            "lO": {"error": False, "props": ["trust lO lM"], "vars": {"xm1": "k1"}},
        },
        "provenance": {"k1": ["xc1", "xm1"], "sign(k1, skm)": ["xsig"]},
    }


def test_state_counts(metering):
    assert len(state_semantics(metering.system, metering.theory)) == 5
    p = parse_protocol(independent_components_source(2))
    assert len(state_semantics(p.system, p.theory)) == 4


def test_error_absorbs_later_labels():
    p = parse_protocol("fun f/1;\ncomponent a trusts {} { let x = fresh n in if x = f(x) then nil }\n")
    (t,) = sorted_traces(all_traces(p.system, p.theory))
    g = run_trace(t, initial_state(p.system), p.theory)
    assert g.component("a").error
    assert run_trace(t[:1], g, p.theory) == g


def test_verified_attestation_adds_equations_under_trust(metering_conformant):
    p = metering_conformant
    g = StateGraph(p.system, p.theory)
    finals = [state for (_, state), out in g.edges.items() if not out]
    assert finals
    for s in finals:
        assert Equation(xm1, xc1) in s.component("lO").prop_state


def test_graph_root_is_initial(metering):
    g = StateGraph(metering.system, metering.theory)
    assert g.root[1] == initial_state(metering.system)
