import pytest

from picon.arch import AIter, AVar
from picon.calculus import parse_protocol
from picon.conformance import (IterTarget, Mapping, check_conformance, check_simulation, find_bisimulation,
                               find_mapping, find_simulation, system_updates)
from picon.errors import SearchBudgetExceeded
from picon.extraction import extract_protocol
from picon.pal import parse_architecture

LEAKY_TARGET = "architecture W { components M, O; has M X; has O Y; }"
LEAKY = ("component lm trusts {} { let x = fresh k in SEND }\n"
         "component lo trusts {} { let y = fresh j in RECV }\n")


def test_metering_is_not_strongly_conformant(metering, a1):
    v = check_conformance(metering, a1, "strong")
    assert not v.holds
    assert v.witness is None
    assert v.to_json()["missing"] == [
        "compute O (Xfee = iter(+, Xtf))",
        "compute O (Xtf[1] = F(Xm[1]))",
        "verifattest O attest M {Xm[1] = Xc[1]}",
    ]
    assert v.to_json()["extra"] == []


def test_conformant_variant_witness(metering_conformant, a1):
    v = check_conformance(metering_conformant, a1, "strong")
    assert v.holds
    assert v.to_json()["witness"] == {
        "components": {"lM": "M", "lO": "O"},
        "variables": {"xc1": "Xc[1]", "xfee": "Xfee", "xm1": "Xm[1]", "xtf1": "Xtf[1]"},
        "functions": {"f": "F", "sum": "iter(+, Xtf)"},
    }
    assert check_simulation(metering_conformant, a1, v.witness, bisim=True)


def test_witness_maps_extraction_onto_target(metering_conformant, a1):
    m = find_mapping(extract_protocol(metering_conformant), a1)
    assert m.funs["sum"] == IterTarget("+", "Xtf")
    assert m.architecture(extract_protocol(metering_conformant), a1).relations == a1.relations


def test_weak_mode_and_strict_subset(metering_conformant, a1):
    assert check_conformance(metering_conformant, a1, "weak").holds
    assert not check_conformance(metering_conformant, a1, "weak", strict_subset=True).holds


def test_weak_proper_superset():
    a = parse_architecture(LEAKY_TARGET)
    p = parse_protocol(LEAKY.replace("SEND", "let z = x in nil").replace("RECV", "nil"))
    assert not check_conformance(p, a, "strong").holds
    assert check_conformance(p, a, "weak", strict_subset=True).holds
    assert find_simulation(p, a) is not None


def test_weak_mode_rejects_leaks():
    a = parse_architecture(LEAKY_TARGET)
    p = parse_protocol(LEAKY.replace("SEND", "send c x . nil").replace("RECV", "recv c (x) . nil"))
    v = check_conformance(p, a, "weak")
    assert not v.holds
    assert v.hasnone_violations
    assert find_simulation(p, a) is None


def test_bisimulation_search(metering, metering_conformant, a1):
    assert find_bisimulation(metering_conformant, a1) is not None
    assert find_bisimulation(metering, a1) is None


def test_system_updates_match_extraction(metering_conformant):
    p = metering_conformant
    assert system_updates(p.system, p.theory) <= extract_protocol(p).relations


def test_component_mapping_is_injective():
    a = parse_architecture("architecture W { components M; has M X; has M Y; }")
    p = parse_protocol("component a trusts {} { let x = fresh k in nil }\n"
                       "component b trusts {} { let y = fresh j in nil }\n")
    assert not check_conformance(p, a, "strong").holds


def test_type_tags_restrict_mapping():
    a = parse_architecture("architecture W { components M; type t; var X : t; has M X; }")
    untyped = parse_protocol("component a trusts {} { let x = fresh k in nil }\n")
    same = parse_protocol("type t; var x : t;\ncomponent a trusts {} { let x = fresh k in nil }\n")
    other = parse_protocol("type u; var x : u;\ncomponent a trusts {} { let x = fresh k in nil }\n")
    assert check_conformance(untyped, a, "strong").holds
    assert check_conformance(same, a, "strong").holds
    assert not check_conformance(other, a, "strong").holds


def test_search_budget(metering_conformant, a1):
    with pytest.raises(SearchBudgetExceeded):
        find_mapping(extract_protocol(metering_conformant), a1, budget=1)


def test_mapping_json():
    m = Mapping({"a": "A"}, {AVar("x"): AVar("X", 1)}, {"f": "F", "g": IterTarget("+", "Y")})
    assert m.to_json() == {"components": {"a": "A"}, "variables": {"x": "X[1]"},
                           "functions": {"f": "F", "g": "iter(+, Y)"}}
    assert m.term(AIter("+", "Y")) == AIter("+", "Y")
