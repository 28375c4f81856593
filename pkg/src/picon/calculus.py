"""Process-calculus AST, concrete-syntax parser and pretty-printer.

Protocol files look like::

    channel cmo
    component lM trusts {} {
        let xc1 = fresh k1 in
        let xm1 = xc1 in
        let xsig = sign(xm1, skm) in
        sendatt cmo (xm1, xsig) . nil
    }
    component lO trusts {lM} { recvatt cmo (xm1, xsig) . nil }
    system S = (lM | lO)

Identifiers in term position are classified while parsing: binders in
scope are variables, declared components are component ids, channels may
only appear in channel position, and everything else is a name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arch import Trust
from .errors import ArityError, DuplicateComponentId, ParseError, ReplicationUnsupported
from .formulas import parse_formula
from .syntax import Cursor, tokenize
from .terms import Channel, ComponentId, FunApp, Name, Term, Variable, subterms
from .theory import EquationalTheory, TheoryBuilder, read_term

# -- processes -----------------------------------------------------------


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class Send:
    channel: Channel
    payload: Term
    cont: object


@dataclass(frozen=True)
class SendAtt:
    channel: Channel
    msg: Term
    sig: Term
    cont: object


@dataclass(frozen=True)
class Recv:
    channel: Channel
    var: Variable
    cont: object


@dataclass(frozen=True)
class RecvAtt:
    channel: Channel
    msg_var: Variable
    sig_var: Variable
    cont: object


@dataclass(frozen=True)
class Par:
    left: object
    right: object


@dataclass(frozen=True)
class Restrict:
    name: str
    body: object


@dataclass(frozen=True)
class Let:
    var: Variable
    rhs: Term
    body: object
    fresh: bool = False


@dataclass(frozen=True)
class If:
    lhs: Term
    rhs: Term
    then: object


Process = Nil | Send | SendAtt | Recv | RecvAtt | Par | Restrict | Let | If

# -- components and systems ----------------------------------------------


@dataclass(frozen=True)
class Component:
    id: str
    trusts: frozenset
    body: object
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EmptySystem:
    pass


@dataclass(frozen=True)
class Single:
    component: Component


@dataclass(frozen=True)
class RestrictS:
    name: str
    body: object


@dataclass(frozen=True)
class ParS:
    left: object
    right: object


System = EmptySystem | Single | RestrictS | ParS


def components(s) -> list[Component]:
    if isinstance(s, Single):
        return [s.component]
    if isinstance(s, RestrictS):
        return components(s.body)
    if isinstance(s, ParS):
        return components(s.left) + components(s.right)
    return []


def system_of(comps: list[Component]):
    """Left-nested parallel composition of the given components."""
    if not comps:
        return EmptySystem()
    s = Single(comps[0])
    for c in comps[1:]:
        s = ParS(s, Single(c))
    return s


@dataclass
class Protocol:
    """A parsed protocol file: the system plus its declarations."""

    system: object
    theory: EquationalTheory
    name: str = "S"
    var_types: dict = field(default_factory=dict)
    channels: frozenset = frozenset()
    properties: dict = field(default_factory=dict)

    @property
    def components(self) -> list[Component]:
        return components(self.system)


# -- queries ---------------------------------------------------------------


def _process_terms(p):
    if isinstance(p, Send):
        yield p.payload
    elif isinstance(p, SendAtt):
        yield p.msg
        yield p.sig
    elif isinstance(p, Let):
        yield p.rhs
    elif isinstance(p, If):
        yield p.lhs
        yield p.rhs


def _children(p):
    if isinstance(p, (Send, SendAtt, Recv, RecvAtt)):
        return [p.cont]
    if isinstance(p, Par):
        return [p.left, p.right]
    if isinstance(p, Restrict):
        return [p.body]
    if isinstance(p, Let):
        return [p.body]
    if isinstance(p, If):
        return [p.then]
    return []


def _free_names_process(p, bound):
    out = set()
    if isinstance(p, Restrict):
        return _free_names_process(p.body, bound | {p.name})
    for t in _process_terms(p):
        out |= {s.ident for s in subterms(t) if isinstance(s, Name) and s.ident not in bound}
    for child in _children(p):
        out |= _free_names_process(child, bound)
    return out


def free_names(s, bound: frozenset = frozenset()) -> set[str]:
    """Names occurring in `s` that no restriction captures; channels are not names."""
    if isinstance(s, Single):
        return _free_names_process(s.component.body, set(bound))
    if isinstance(s, RestrictS):
        return free_names(s.body, bound | {s.name})
    if isinstance(s, ParS):
        return free_names(s.left, bound) | free_names(s.right, bound)
    return set()


def free_channels(s) -> set[str]:
    out = set()

    def walk(p):
        if isinstance(p, (Send, SendAtt, Recv, RecvAtt)):
            out.add(p.channel.ident)
        for child in _children(p):
            walk(child)

    for c in components(s):
        walk(c.body)
    return out


def initial_trust(s) -> frozenset:
    return frozenset(Trust(c.id, j) for c in components(s) for j in c.trusts)


def walk_processes(p):
    yield p
    for child in _children(p):
        yield from walk_processes(child)


# -- parser ----------------------------------------------------------------

_BINDING_KEYWORDS = {"send", "sendatt", "recv", "recvatt"}
KEYWORDS = {"let", "in", "fresh", "send", "sendatt", "recv", "recvatt", "if", "then", "new", "nil",
            "component", "trusts", "system", "empty", "channel", "var", "name", "type", "fun", "rule",
            "property", "and", "hasall", "hasnone", "knows"}


class _ProtocolParser:
    def __init__(self, source: str):
        self.cur = Cursor(source)
        self.theory_builder = TheoryBuilder()
        self.var_types = {}
        self.declared_vars = set()
        self.channels = set()
        self.component_ids = set()
        self.components = {}
        self.order = []
        self.system = None
        self.system_name = "S"
        self.properties = {}
        self.fun_arities = {}
        self._prescan(source)

    def _prescan(self, source):
        toks = tokenize(source)
        for a, b in zip(toks, toks[1:]):
            if a.kind == "ident" and b.kind == "ident":
                if a.text == "component":
                    self.component_ids.add(b.text)
                elif a.text in _BINDING_KEYWORDS or a.text == "channel":
                    self.channels.add(b.text)
            if a.kind == "punct" and a.text == "!":
                raise ReplicationUnsupported("replication '!' is not supported", a.line, a.column)

    # terms

    def _atom(self, scope):
        def atom(ident, tok):
            if ident in scope:
                return Variable(ident)
            if ident in self.channels:
                raise ParseError(f"channel {ident!r} used as a term (channel passing is unsupported)",
                                 tok.line, tok.column)
            if ident in self.component_ids:
                return ComponentId(ident)
            if ident in self.declared_vars:
                return Variable(ident)
            if ident in KEYWORDS:
                raise ParseError(f"keyword {ident!r} used as a term", tok.line, tok.column)
            return Name(ident)
        return atom

    def term(self, scope) -> Term:
        tok = self.cur.tok
        t = read_term(self.cur, self._atom(scope))
        for s in subterms(t):
            if isinstance(s, FunApp):
                known = self.fun_arities.setdefault(s.symbol, len(s.args))
                if known != len(s.args):
                    raise ParseError(f"{s.symbol} used with arities {known} and {len(s.args)}",
                                     tok.line, tok.column)
        return t

    def binder(self) -> Variable:
        tok = self.cur.tok
        ident = self.cur.ident("variable")
        if ident in self.channels or ident in self.component_ids or ident in KEYWORDS:
            raise ParseError(f"{ident!r} cannot be bound as a variable", tok.line, tok.column)
        return Variable(ident)

    def channel(self) -> Channel:
        return Channel(self.cur.ident("channel"))

    # processes

    def process(self, scope) -> object:
        cur = self.cur
        if cur.accept("nil"):
            return Nil()
        if cur.tok.kind == "number" and cur.tok.text == "0":
            cur.pos += 1
            return Nil()
        if cur.accept("let"):
            var = self.binder()
            cur.expect("=")
            fresh = cur.accept("fresh")
            rhs = self.term(scope)
            cur.expect("in")
            return Let(var, rhs, self.process(scope | {var.ident}), fresh)
        if cur.accept("send"):
            ch = self.channel()
            payload = self.term(scope)
            cur.expect(".")
            return Send(ch, payload, self.process(scope))
        if cur.accept("sendatt"):
            ch = self.channel()
            cur.expect("(")
            msg = self.term(scope)
            cur.expect(",")
            sig = self.term(scope)
            cur.expect(")")
            cur.expect(".")
            return SendAtt(ch, msg, sig, self.process(scope))
        if cur.accept("recv"):
            ch = self.channel()
            cur.expect("(")
            var = self.binder()
            cur.expect(")")
            cur.expect(".")
            return Recv(ch, var, self.process(scope | {var.ident}))
        if cur.accept("recvatt"):
            ch = self.channel()
            cur.expect("(")
            mvar = self.binder()
            cur.expect(",")
            svar = self.binder()
            cur.expect(")")
            cur.expect(".")
            return RecvAtt(ch, mvar, svar, self.process(scope | {mvar.ident, svar.ident}))
        if cur.accept("if"):
            lhs = self.term(scope)
            cur.expect("=")
            rhs = self.term(scope)
            cur.expect("then")
            return If(lhs, rhs, self.process(scope))
        if cur.accept("new"):
            name = cur.ident("name")
            cur.expect(".")
            return Restrict(name, self.process(scope))
        if cur.accept("("):
            p = self.process(scope)
            while cur.accept("|"):
                p = Par(p, self.process(scope))
            cur.expect(")")
            return p
        raise cur.error(f"expected a process, found {cur.tok.text or 'end of input'!r}")

    # top level

    def component(self):
        cur = self.cur
        tok = cur.tok
        ident = cur.ident("component id")
        if ident in self.components:
            raise DuplicateComponentId(f"component {ident!r} declared twice", tok.line, tok.column)
        trusts = set()
        if cur.accept("trusts"):
            cur.expect("{")
            if not cur.at("}"):
                trusts.add(cur.ident("component id"))
                while cur.accept(","):
                    trusts.add(cur.ident("component id"))
            cur.expect("}")
        for t in trusts:
            if t == ident:
                raise ParseError(f"component {ident!r} cannot trust itself", tok.line, tok.column)
            if t not in self.component_ids:
                raise ParseError(f"component {ident!r} trusts undeclared component {t!r}", tok.line, tok.column)
        cur.expect("{")
        body = self.process(frozenset())
        cur.expect("}")
        self.components[ident] = Component(ident, frozenset(trusts), body, (tok.line, tok.column))
        self.order.append(ident)

    def sysexpr(self, used):
        cur = self.cur
        if cur.accept("empty"):
            return EmptySystem()
        if cur.accept("new"):
            name = cur.ident("name")
            cur.expect(".")
            return RestrictS(name, self.sysexpr(used))
        if cur.accept("("):
            s = self.sysexpr(used)
            while cur.accept("|"):
                s = ParS(s, self.sysexpr(used))
            cur.expect(")")
            return s
        tok = cur.tok
        ident = cur.ident("component id")
        if ident not in self.components:
            raise cur.error(f"undeclared component {ident!r}", tok)
        if ident in used:
            raise DuplicateComponentId(f"component {ident!r} used twice in the system", tok.line, tok.column)
        used.add(ident)
        return Single(self.components[ident])

    def property(self):
        cur = self.cur
        name = cur.ident("property name")
        cur.expect("=")
        comps = self.component_ids

        def read_comp(c):
            tok = c.tok
            ident = c.ident("component id")
            if ident not in comps:
                raise c.error(f"unknown component {ident!r}", tok)
            return ident

        def read_var(c):
            return Variable(c.ident("variable"))

        all_vars = frozenset(self.declared_vars | self._bound_vars())
        self.properties[name] = parse_formula(cur, read_comp, read_var, lambda c: self.term(all_vars),
                                              self.properties)

    def _bound_vars(self):
        out = set()
        for comp in self.components.values():
            for p in walk_processes(comp.body):
                if isinstance(p, (Let, Recv)):
                    out.add(p.var.ident)
                elif isinstance(p, RecvAtt):
                    out |= {p.msg_var.ident, p.sig_var.ident}
        return out

    def decl_typed(self, target):
        cur = self.cur
        while True:
            ident = cur.ident()
            tag = None
            if cur.accept(":"):
                tag = cur.ident("type")
            if target is not None:
                target[ident] = tag
            if not cur.accept(","):
                break

    def parse(self) -> Protocol:
        cur = self.cur
        while not cur.at_eof():
            if cur.accept(";"):
                continue
            if self.theory_builder.try_statement(cur):
                continue
            if cur.accept("channel"):
                self.decl_typed(None)
            elif cur.accept("var"):
                before = dict(self.var_types)
                self.decl_typed(self.var_types)
                self.declared_vars |= set(self.var_types) - set(before)
            elif cur.accept("name"):
                self.decl_typed({})
            elif cur.accept("component"):
                self.component()
            elif cur.accept("system"):
                self.system_name = cur.ident("system name")
                cur.expect("=")
                self.system = self.sysexpr(set())
            elif cur.accept("property"):
                self.property()
            else:
                raise cur.error(f"unexpected {cur.tok.text!r}")
        if self.system is None:
            self.system = system_of([self.components[i] for i in self.order])
        types = self.theory_builder.types
        for ident, tag in self.var_types.items():
            if tag is not None and tag not in types:
                raise ParseError(f"variable {ident!r} has undeclared type {tag!r}")
        for sym, arity in self.fun_arities.items():
            if sym not in self.theory_builder.signatures:
                self.theory_builder.signatures[sym] = _sig(arity)
        theory = self.theory_builder.build()
        try:
            for comp in self.components.values():
                for p in walk_processes(comp.body):
                    for t in _process_terms(p):
                        theory.check_arity(t)
        except ArityError as exc:
            raise ParseError(str(exc)) from None
        return Protocol(self.system, theory, self.system_name, dict(self.var_types),
                        frozenset(self.channels), dict(self.properties))


def _sig(arity):
    from .theory import FunSig
    return FunSig(arity)


def parse_protocol(source: str) -> Protocol:
    return _ProtocolParser(source).parse()


def parse_system(source: str):
    return parse_protocol(source).system


# -- pretty-printing ---------------------------------------------------------


def format_process(p) -> str:
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, Let):
        fresh = "fresh " if p.fresh else ""
        return f"let {p.var} = {fresh}{p.rhs} in {format_process(p.body)}"
    if isinstance(p, Send):
        return f"send {p.channel} {p.payload} . {format_process(p.cont)}"
    if isinstance(p, SendAtt):
        return f"sendatt {p.channel} ({p.msg}, {p.sig}) . {format_process(p.cont)}"
    if isinstance(p, Recv):
        return f"recv {p.channel} ({p.var}) . {format_process(p.cont)}"
    if isinstance(p, RecvAtt):
        return f"recvatt {p.channel} ({p.msg_var}, {p.sig_var}) . {format_process(p.cont)}"
    if isinstance(p, If):
        return f"if {p.lhs} = {p.rhs} then {format_process(p.then)}"
    if isinstance(p, Restrict):
        return f"new {p.name} . {format_process(p.body)}"
    if isinstance(p, Par):
        return f"({format_process(p.left)} | {format_process(p.right)})"
    raise TypeError(p)


def format_sysexpr(s) -> str:
    if isinstance(s, EmptySystem):
        return "empty"
    if isinstance(s, Single):
        return s.component.id
    if isinstance(s, RestrictS):
        return f"new {s.name} . {format_sysexpr(s.body)}"
    return f"({format_sysexpr(s.left)} | {format_sysexpr(s.right)})"


def format_system(s, name: str = "S", preamble: str = "") -> str:
    lines = [preamble] if preamble else []
    for c in components(s):
        trusts = ", ".join(sorted(c.trusts))
        lines.append(f"component {c.id} trusts {{{trusts}}} {{ {format_process(c.body)} }}")
    lines.append(f"system {name} = {format_sysexpr(s)}")
    return "\n".join(lines) + "\n"
