import pytest

from picon.arch import AFun, AIter, Attest, AVar, Compute, HasArch, Receive, Trust, VerifAttest
from picon.errors import ParseError
from picon.formulas import And, HasAll, HasNone
from picon.pal import format_architecture, parse_architecture, relation_to_json

from conftest import model_path

A1 = model_path("a1.pal").read_text()


def xm(i):
    return AVar("Xm", i)


def test_a1_relations(a1):
    att = Attest("M", frozenset({(xm(1), AVar("Xc", 1))}))
    assert a1.relations == frozenset({
        Trust("O", "M"),
        HasArch("M", AVar("Xc", 1)),
        Compute("M", xm(1), AVar("Xc", 1)),
        Receive("O", "M", frozenset({att}), xm(1)),
        VerifAttest("O", att),
        Compute("O", AVar("Xtf", 1), AFun("F", (xm(1),))),
        Compute("O", AVar("Xfee"), AIter("+", "Xtf")),
    })


@pytest.mark.parametrize("r", [1, 2, 3, 5])
def test_range_instantiation_count(r):
    # two index-free relations plus five templates per index
    a = parse_architecture(A1, {"r": r})
    assert len(a.relations) == 2 + 5 * r
    assert a.ranges["Xtf"] == r


def test_override_by_index_name():
    assert len(parse_architecture(A1, {"i": 2}).relations) == 12


def test_properties(a1):
    assert a1.properties["hasall_O_Xfee"] == HasAll("O", AVar("Xfee"))
    assert a1.properties["requirements"] == And(HasAll("O", AVar("Xfee")), HasNone("O", AVar("Xc")))


@pytest.mark.parametrize("r", [1, 3])
def test_round_trip(r):
    a = parse_architecture(A1, {"r": r})
    again = parse_architecture(format_architecture(a))
    assert again.relations == a.relations
    assert again.properties == a.properties


def test_empty_architecture():
    a = parse_architecture("architecture E { }")
    assert a.relations == frozenset()


@pytest.mark.parametrize("src", [
    "architecture B { components M; has Q X; }",
    "architecture B { components M; has M X[3]; compute M (Y = iter(+, Z)); }",
    "architecture B { components M; param r = 1; range i in 1..r; has M X[i]; property p = hasall M X[i]; }",
    "architecture B { components M; has M; }",
    "architecture B { components M; } trailing",
])
def test_invalid_sources(src):
    with pytest.raises(ParseError):
        parse_architecture(src)


def test_relation_json(a1):
    d = relation_to_json(Trust("O", "M"))
    assert d == {"kind": "Trust", "text": "trust O M", "components": ["M", "O"]}
