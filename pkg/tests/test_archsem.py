import pytest

from picon.arch import AVar, Architecture, Compute, HasArch, Receive, Trust
from picon.archsem import (ArchContext, ArchGraph, HasE, compatible_traces, event_for, initial_arch_state,
                           realized_relations, seed)
from picon.errors import StateSpaceBudgetExceeded, UndefinedOperand
from picon.pal import parse_architecture
from picon.terms import FunApp, Name, Variable

from conftest import model_path
from oracles import a1_dependencies, downsets_and_extensions

A1 = model_path("a1.pal").read_text()


@pytest.mark.parametrize("r", [1, 2, 3])
def test_graph_size_matches_poset_oracle(r):
    a = parse_architecture(A1, {"r": r})
    nodes, _ = downsets_and_extensions(a1_dependencies(r))
    assert len(ArchGraph(a).edges) == nodes


@pytest.mark.parametrize("r", [1, 2])
def test_trace_count_matches_poset_oracle(r):
    a = parse_architecture(A1, {"r": r})
    _, traces = downsets_and_extensions(a1_dependencies(r))
    assert sum(1 for _ in compatible_traces(a)) == traces


def test_initial_state(a1):
    g = initial_arch_state(a1)
    assert g.component("O").prop_state == frozenset({Trust("O", "M")})
    assert not g.component("M").prop_state


def test_has_event_seeds_a_fresh_name(a1):
    rel = HasArch("M", AVar("Xc", 1))
    e = event_for(rel, initial_arch_state(a1), ArchContext(a1))
    assert e == HasE("M", AVar("Xc", 1), Name("Xc[1]"))
    assert seed(AVar("Xfee")) == Name("Xfee")


def test_receive_needs_sender_value(a1):
    rel = Receive("O", "M", frozenset(), AVar("Xm", 1))
    assert event_for(rel, initial_arch_state(a1), ArchContext(a1)) is None


def test_fee_is_a_left_fold():
    a = parse_architecture(A1, {"r": 2})
    g = ArchGraph(a)
    finals = [state for (_, state), out in g.edges.items() if not out]
    fee = {s.component("O").value(Variable("Xfee")) for s in finals}
    f = lambda i: FunApp("F", (Name(f"Xc[{i}]"),))  # noqa: E731
    assert fee == {FunApp("+", (f(1), f(2)))}


def test_all_a1_relations_realized(a1):
    assert realized_relations(a1) == a1.relations


def test_dead_relation_not_realized():
    a = Architecture("A", ("M",), frozenset({Compute("M", AVar("Y"), AVar("Z"))}))
    assert realized_relations(a) == frozenset()


def test_undefined_operand():
    a = Architecture("A", ("M",), frozenset())
    ctx = ArchContext(a)
    with pytest.raises(UndefinedOperand):
        ctx.eval(AVar("Z"), initial_arch_state(a).component("M"))


def test_budget():
    with pytest.raises(StateSpaceBudgetExceeded):
        ArchGraph(parse_architecture(A1, {"r": 3}), max_nodes=20)
