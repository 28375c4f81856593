import pytest

from picon.errors import ArityError, ParseError, BudgetExceeded
from picon.terms import FunApp, Name, Variable, match, substitute, subterms
from picon.theory import (Deducer, builtin_theory, deducible, equal_in_e, normal_form, parse_theory)

from oracles import closure

a, b, m, sk, k = (Name(x) for x in ("a", "b", "m", "sk", "k"))


def sign(x, y):
    return FunApp("sign", (x, y))


def pk(x):
    return FunApp("pk", (x,))


def checksign(x, y):
    return FunApp("checksign", (x, y))


def test_builtin_rule_reduces_valid_signature():
    assert normal_form(checksign(sign(m, sk), pk(sk))) == m


def test_wrong_key_is_stuck():
    t = checksign(sign(m, sk), pk(k))
    assert normal_form(t) == t


def test_nested_normalisation():
    th = parse_theory("fun f/1; fun h/1; rule h(f(x)) -> x;")
    t = FunApp("h", (FunApp("f", (FunApp("h", (FunApp("f", (a,)),)),)),))
    assert th.normal_form(t) == a
    assert th.equal(FunApp("h", (FunApp("f", (b,)),)), b)
    assert not th.equal(a, b)


def test_equal_in_e_builtin():
    assert equal_in_e(checksign(sign(a, sk), pk(sk)), a)
    assert not equal_in_e(checksign(sign(a, sk), pk(b)), a)


def test_arity_checked():
    th = builtin_theory()
    with pytest.raises(ArityError):
        th.check_arity(FunApp("sign", (a,)))


def test_rule_with_unbound_rhs_variable_rejected():
    with pytest.raises(ParseError):
        parse_theory("fun f/1; rule f(x) -> y;")


def test_rewrite_budget_enforced():
    th = parse_theory("fun f/1; rule f(x) -> f(f(x));", rewrite_budget=50)
    with pytest.raises(BudgetExceeded):
        th.normal_form(FunApp("f", (a,)))


def test_match_and_substitute():
    x = Variable("x")
    pat = FunApp("sign", (x, sk))
    sigma = match(pat, sign(m, sk))
    assert sigma == {x: m}
    assert substitute(pat, sigma) == sign(m, sk)
    assert match(pat, sign(m, k)) is None
    assert set(subterms(sign(m, sk))) == {sign(m, sk), m, sk}


# deduction, checked against a brute-force closure

def test_signature_opens_with_public_key():
    assert deducible({sign(m, sk), pk(sk)}, m)


def test_signature_without_key():
    # checksign needs the matching public key, which cannot be built from pk(k)
    assert not deducible({sign(m, sk)}, sk)
    assert deducible({sign(m, sk)}, sign(m, sk))


def test_composition():
    assert deducible({a, b}, sign(a, b))
    assert not deducible({a}, sign(a, b))


@pytest.mark.parametrize("knowledge,target", [
    ({sign(m, sk), pk(sk)}, m),
    ({a, b}, sign(a, b)),
    ({a}, pk(pk(a))),
    ({sign(a, b)}, a),
    ({sign(a, sk), pk(b)}, a),
])
def test_deducer_agrees_with_closure_oracle(knowledge, target):
    th = builtin_theory()
    symbols = {"sign": 2, "pk": 1, "checksign": 2}
    expected = normal_form(target) in closure(knowledge, th, symbols, 2)
    assert Deducer(knowledge, th, depth=2).derives(target) == expected


def test_depth_zero_is_only_knowledge():
    d = Deducer({a}, builtin_theory(), depth=0)
    assert d.derives(a)
    assert not d.derives(pk(a))
