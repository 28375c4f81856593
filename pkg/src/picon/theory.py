"""Equational theories as oriented rewrite systems, plus bounded deduction.

Every theory carries the built-in attestation rule

    checksign(sign(m, sk), pk(sk)) -> m

so a signature check is an ordinary E-equality test.  User theories are
expected to be subterm-convergent; termination is enforced with a
per-call rewrite-step budget rather than checked up front.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .config import DEFAULT_DEPTH, DEFAULT_REWRITE_BUDGET
from .errors import ArityError, BudgetExceeded, ParseError
from .syntax import Cursor
from .terms import FunApp, Term, Variable, match, substitute, subterms, variables

SIGN, CHECKSIGN, PK = "sign", "checksign", "pk"
ATTESTATION_SYMBOLS = frozenset({SIGN, CHECKSIGN})


@dataclass(frozen=True)
class RewriteRule:
    lhs: FunApp
    rhs: Term

    def __post_init__(self):
        if not isinstance(self.lhs, FunApp):
            raise ParseError(f"rule left-hand side must be a function application: {self.lhs}")
        extra = variables(self.rhs) - variables(self.lhs)
        if extra:
            names = ", ".join(sorted(v.ident for v in extra))
            raise ParseError(f"rule {self} introduces variables not in its left-hand side: {names}")

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class FunSig:
    arity: int
    arg_types: tuple | None = None
    result_type: str | None = None


BUILTIN_RULE = RewriteRule(
    FunApp(CHECKSIGN, (FunApp(SIGN, (Variable("m"), Variable("sk"))), FunApp(PK, (Variable("sk"),)))),
    Variable("m"),
)
BUILTIN_SIGNATURES = {SIGN: FunSig(2), CHECKSIGN: FunSig(2), PK: FunSig(1)}


class _Steps:
    __slots__ = ("left",)

    def __init__(self, budget):
        self.left = budget

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("rewrite-step budget exhausted (non-terminating theory?)")


@dataclass
class EquationalTheory:
    """Rewrite rules plus function signatures.  Treated as immutable once built."""

    rules: tuple = ()
    signatures: dict = field(default_factory=dict)
    types: frozenset = frozenset()
    rewrite_budget: int = DEFAULT_REWRITE_BUDGET

    def __post_init__(self):
        rules = tuple(r for r in self.rules if r != BUILTIN_RULE)
        self.rules = (BUILTIN_RULE,) + rules
        sigs = dict(BUILTIN_SIGNATURES)
        sigs.update(self.signatures)
        self.signatures = sigs
        self._by_head = {}
        for rule in self.rules:
            self._by_head.setdefault(rule.lhs.symbol, []).append(rule)
            self.check_arity(rule.lhs)
            self.check_arity(rule.rhs)
        self._nf_cache = {}

    # -- structure -------------------------------------------------------

    def check_arity(self, t: Term) -> None:
        for s in subterms(t):
            if isinstance(s, FunApp):
                sig = self.signatures.get(s.symbol)
                if sig is not None and sig.arity != len(s.args):
                    raise ArityError(f"{s.symbol} expects {sig.arity} arguments, got {len(s.args)} in {s}")

    def declare(self, symbol: str, arity: int) -> EquationalTheory:
        """Return a theory that also knows `symbol/arity` (self if already declared)."""
        sig = self.signatures.get(symbol)
        if sig is not None:
            if sig.arity != arity:
                raise ArityError(f"{symbol} declared with arity {sig.arity}, used with {arity}")
            return self
        sigs = dict(self.signatures)
        sigs[symbol] = FunSig(arity)
        return EquationalTheory(self.rules, sigs, self.types, self.rewrite_budget)

    def renamed(self, fun_map: Mapping[str, str]) -> EquationalTheory:
        """Rename function symbols throughout rules and signatures."""

        def ren(t):
            if isinstance(t, FunApp):
                return FunApp(fun_map.get(t.symbol, t.symbol), tuple(ren(a) for a in t.args))
            return t

        rules = tuple(RewriteRule(ren(r.lhs), ren(r.rhs)) for r in self.rules if r != BUILTIN_RULE)
        sigs = {fun_map.get(k, k): v for k, v in self.signatures.items() if k not in BUILTIN_SIGNATURES}
        return EquationalTheory(rules, sigs, self.types, self.rewrite_budget)

    def with_budget(self, budget: int) -> EquationalTheory:
        return EquationalTheory(self.rules, self.signatures, self.types, budget)

    @property
    def user_rules(self) -> tuple:
        return self.rules[1:]

    # -- rewriting -------------------------------------------------------

    def normal_form(self, t: Term) -> Term:
        cached = self._nf_cache.get(t)
        if cached is not None:
            return cached
        result = self._nf(t, _Steps(self.rewrite_budget))
        self._nf_cache[t] = result
        return result

    def _nf(self, t, steps):
        if not isinstance(t, FunApp):
            return t
        cached = self._nf_cache.get(t)
        if cached is not None:
            return cached
        t = FunApp(t.symbol, tuple(self._nf(a, steps) for a in t.args))
        for rule in self._by_head.get(t.symbol, ()):
            sigma = match(rule.lhs, t)
            if sigma is not None:
                steps.tick()
                return self._nf(substitute(rule.rhs, sigma), steps)
        return t

    def equal(self, t1: Term, t2: Term) -> bool:
        return self.normal_form(t1) == self.normal_form(t2)

    def __str__(self):
        return "\n".join(str(r) for r in self.user_rules)


def builtin_theory() -> EquationalTheory:
    return EquationalTheory()


def normal_form(t: Term, theory: EquationalTheory | None = None) -> Term:
    return (theory or builtin_theory()).normal_form(t)


def equal_in_e(t1: Term, t2: Term, theory: EquationalTheory | None = None) -> bool:
    return (theory or builtin_theory()).equal(t1, t2)


# -- deduction -----------------------------------------------------------


class Deducer:
    """What an agent holding `knowledge` can derive under `theory`.

    Derivation alternates two moves: applying any function symbol to
    derivable terms (composition) and applying a rewrite rule whose
    left-hand side arguments are all derivable (analysis).  `depth` bounds
    both the number of analysis rounds and the nesting of compositions.
    """

    def __init__(self, knowledge: Iterable[Term], theory: EquationalTheory, depth: int = DEFAULT_DEPTH):
        self.theory = theory
        self.depth = depth
        self.known = {theory.normal_form(t) for t in knowledge}
        self._saturate()

    def _saturate(self):
        for _ in range(self.depth):
            candidates = {s for t in self.known for s in subterms(t) if isinstance(s, FunApp)}
            found = set()
            filler = min(self.known, key=str) if self.known else None
            for rule in self.theory.rules:
                patterns = rule.lhs.args
                free = variables(rule.lhs)
                for sigma in self._matches(patterns, 0, {}, candidates):
                    unbound = free - sigma.keys()
                    if unbound:
                        # a bare-variable argument accepts any derivable term
                        if filler is None:
                            continue
                        sigma = {**sigma, **{v: filler for v in unbound}}
                    insts = [substitute(p, sigma) for p in patterns]
                    if all(self.composable(i) for i in insts):
                        result = self.theory.normal_form(substitute(rule.rhs, sigma))
                        if result not in self.known:
                            found.add(result)
            if not found:
                return
            self.known |= found

    def _matches(self, patterns, i, sigma, candidates):
        if i == len(patterns):
            yield sigma
            return
        p = patterns[i]
        if isinstance(p, Variable):
            yield from self._matches(patterns, i + 1, sigma, candidates)
            return
        for c in sorted(candidates, key=str):
            extended = match(p, c, sigma)
            if extended is not None:
                yield from self._matches(patterns, i + 1, extended, candidates)

    def composable(self, t: Term, depth: int | None = None) -> bool:
        depth = self.depth if depth is None else depth
        if self.theory.normal_form(t) in self.known:
            return True
        if depth == 0 or not isinstance(t, FunApp):
            return False
        return all(self.composable(a, depth - 1) for a in t.args)

    def derives(self, target: Term) -> bool:
        return self.composable(self.theory.normal_form(target))


def deducible(knowledge: Iterable[Term], target: Term, theory: EquationalTheory | None = None,
              depth: int = DEFAULT_DEPTH) -> bool:
    return Deducer(knowledge, theory or builtin_theory(), depth).derives(target)


# -- parsing -------------------------------------------------------------


def read_term(cur: Cursor, atom) -> Term:
    """Parse `ident` or `ident(t, ...)`; `atom(ident, token)` classifies bare identifiers."""
    tok = cur.tok
    ident = cur.ident("term")
    if cur.accept("("):
        args = []
        if not cur.at(")"):
            args.append(read_term(cur, atom))
            while cur.accept(","):
                args.append(read_term(cur, atom))
        cur.expect(")")
        return FunApp(ident, tuple(args))
    return atom(ident, tok)


def _rule_atom(ident, tok, constants=()):
    if ident in constants:
        return FunApp(ident, ())
    return Variable(ident)


class TheoryBuilder:
    """Accumulates `type`, `fun` and rule declarations from any source file."""

    def __init__(self):
        self.rules = []
        self.signatures = {}
        self.types = set()

    def constants(self):
        return {s for s, sig in self.signatures.items() if sig.arity == 0}

    def parse_type(self, cur: Cursor):
        self.types.add(cur.ident("type name"))
        while cur.accept(","):
            self.types.add(cur.ident("type name"))

    def parse_fun(self, cur: Cursor):
        name_tok = cur.tok
        name = cur.ident("function symbol")
        cur.expect("/")
        arity = cur.number()
        arg_types = result = None
        if cur.accept(":"):
            cur.expect("(")
            arg_types = []
            if not cur.at(")"):
                arg_types.append(cur.ident("type"))
                while cur.accept(","):
                    arg_types.append(cur.ident("type"))
            cur.expect(")")
            cur.expect("->")
            result = cur.ident("type")
            if len(arg_types) != arity:
                raise cur.error(f"{name}/{arity} declares {len(arg_types)} argument types", name_tok)
            arg_types = tuple(arg_types)
        self.signatures[name] = FunSig(arity, arg_types, result)

    def parse_rule(self, cur: Cursor):
        consts = self.constants()
        tok = cur.tok
        lhs = read_term(cur, lambda i, t: _rule_atom(i, t, consts))
        cur.expect("->")
        rhs = read_term(cur, lambda i, t: _rule_atom(i, t, consts))
        try:
            self.rules.append(RewriteRule(lhs, rhs))
        except ParseError as exc:
            raise ParseError(str(exc), tok.line, tok.column) from None

    def try_statement(self, cur: Cursor) -> bool:
        if cur.accept("type"):
            self.parse_type(cur)
        elif cur.accept("fun"):
            self.parse_fun(cur)
        elif cur.accept("rule"):
            self.parse_rule(cur)
        else:
            return False
        return True

    def build(self, rewrite_budget: int = DEFAULT_REWRITE_BUDGET) -> EquationalTheory:
        try:
            return EquationalTheory(tuple(self.rules), dict(self.signatures), frozenset(self.types), rewrite_budget)
        except ArityError as exc:
            raise ParseError(str(exc)) from None


def parse_theory(source: str, rewrite_budget: int = DEFAULT_REWRITE_BUDGET) -> EquationalTheory:
    """Parse a theory file: `type`, `fun` declarations and rules, one rule per line.

    Rules may be written bare (`fst(pair(x,y)) -> x`) or with a leading `rule`.
    """
    cur = Cursor(source)
    builder = TheoryBuilder()
    while not cur.at_eof():
        if cur.accept(";"):
            continue
        if not builder.try_statement(cur):
            builder.parse_rule(cur)
    return builder.build(rewrite_budget)
