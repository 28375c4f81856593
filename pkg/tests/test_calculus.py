import random

import pytest

from picon.arch import Trust
from picon.calculus import (Let, Nil, Recv, Send, components, format_system, free_channels, free_names,
                            initial_trust, parse_protocol)
from picon.errors import DuplicateComponentId, ParseError, ReplicationUnsupported
from picon.gen import THEORY_SOURCE, random_protocol_source
from picon.terms import Channel, Name, Variable


def test_metering_structure(metering):
    comps = {c.id: c for c in metering.components}
    assert set(comps) == {"lM", "lO"}
    assert comps["lO"].trusts == frozenset({"lM"})
    assert free_names(metering.system) == {"k1", "skm"}
    assert free_channels(metering.system) == {"cmo"}
    assert initial_trust(metering.system) == frozenset({Trust("lO", "lM")})


def test_simple_process_ast():
    p = parse_protocol("component a trusts {} { let x = fresh n in send c x . nil }\n"
                       "component b trusts {} { recv c (x) . nil }\n")
    a, b = components(p.system)
    assert a.body == Let(Variable("x"), Name("n"), Send(Channel("c"), Variable("x"), Nil()), fresh=True)
    assert b.body == Recv(Channel("c"), Variable("x"), Nil())


def test_round_trip_models(metering, metering_conformant):
    for p in (metering, metering_conformant):
        again = parse_protocol(format_system(p.system))
        assert again.system == p.system


def test_round_trip_generated():
    rng = random.Random(7)
    for _ in range(100):
        p = parse_protocol(random_protocol_source(rng))
        again = parse_protocol(format_system(p.system, preamble=THEORY_SOURCE))
        assert again.system == p.system


def test_duplicate_component_rejected():
    src = "component a trusts {} { nil }\nsystem S = (a | a)\n"
    with pytest.raises(DuplicateComponentId):
        parse_protocol(src)


def test_replication_rejected():
    with pytest.raises(ReplicationUnsupported):
        parse_protocol("component a trusts {} { !nil }\n")


def test_self_trust_rejected():
    with pytest.raises(ParseError):
        parse_protocol("component a trusts {a} { nil }\n")


def test_unknown_trustee_rejected():
    with pytest.raises(ParseError):
        parse_protocol("component a trusts {zz} { nil }\n")


def test_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_protocol("component a trusts {} {\n  let = x in nil }\n")
    assert info.value.line == 2


def test_empty_system_parses():
    p = parse_protocol("system S = empty\n")
    assert components(p.system) == []
