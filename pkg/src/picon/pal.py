"""Parser and printer for PAL architecture files.

A file declares one architecture::

    architecture A1 {
        components M, O;
        param r = 1;
        range i in 1..r;
        has M Xc[i];
        compute M (Xm[i] = Xc[i]);
        receive O from M attest M {Xm[i] = Xc[i]} var Xm[i];
        verifattest O attest M {Xm[i] = Xc[i]};
        compute O (Xtf[i] = F(Xm[i]));
        compute O (Xfee = iter(+, Xtf));
        trust O M;
        property P = hasall O Xfee;
    }

Statements mentioning a range index are instantiated once per index value.
"""

from __future__ import annotations

import dataclasses
from itertools import product

from .arch import (AFun, AIter, Architecture, Attest, AVar, CheckRel, Compute, HasArch, Receive, Relation,
                   Trust, VerifAttest, arch_vars, relation_components)
from .errors import ArityError, ParseError
from .formulas import And, HasAll, HasNone, Knows, parse_formula
from .syntax import Cursor
from .theory import FunSig, TheoryBuilder

_KEYWORDS = {"components", "param", "range", "in", "has", "compute", "receive", "from", "attest", "var",
             "verifattest", "check", "trust", "property", "iter", "type", "fun", "rule", "and", "hasall",
             "hasnone", "knows", "architecture"}


class _Template:
    """A relation or formula whose variable indices may still be index names."""

    def __init__(self, obj, tok):
        self.obj = obj
        self.tok = tok

    def indices(self):
        out = set()
        _collect_indices(self.obj, out)
        return out


def _collect_indices(obj, out):
    if isinstance(obj, AVar):
        if isinstance(obj.index, str):
            out.add(obj.index)
    elif isinstance(obj, (frozenset, tuple, list)):
        for x in obj:
            _collect_indices(x, out)
    elif dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            _collect_indices(getattr(obj, f.name), out)


def _instantiate(obj, env):
    if isinstance(obj, AVar):
        if isinstance(obj.index, str):
            return AVar(obj.name, env[obj.index])
        return obj
    if isinstance(obj, frozenset):
        return frozenset(_instantiate(x, env) for x in obj)
    if isinstance(obj, tuple):
        return tuple(_instantiate(x, env) for x in obj)
    if dataclasses.is_dataclass(obj):
        return type(obj)(**{f.name: _instantiate(getattr(obj, f.name), env) for f in dataclasses.fields(obj)})
    return obj


class _PalParser:
    def __init__(self, source: str, ranges: dict | None = None):
        self.cur = Cursor(source)
        self.overrides = dict(ranges or {})
        self.builder = TheoryBuilder()
        self.name = "A"
        self.components: list[str] = []
        self.params: dict[str, int] = {}
        self.index_ranges: dict[str, object] = {}  # index -> bound (int or param name)
        self.templates: list[_Template] = []
        self.property_templates: list[tuple] = []
        self.var_types: dict[str, str] = {}

    # -- pieces --------------------------------------------------------------

    def comp(self, cur):
        tok = cur.tok
        ident = cur.ident("component")
        if ident not in self.components:
            raise cur.error(f"undeclared component {ident!r}", tok)
        return ident

    def var(self, cur):
        tok = cur.tok
        name = cur.ident("variable")
        if name in _KEYWORDS:
            raise cur.error(f"keyword {name!r} used as a variable", tok)
        index = None
        if cur.accept("["):
            if cur.tok.kind == "number":
                index = cur.number()
            else:
                itok = cur.tok
                index = cur.ident("index")
                if index not in self.index_ranges:
                    raise cur.error(f"undeclared range index {index!r}", itok)
            cur.expect("]")
        return AVar(name, index)

    def symbol(self, cur):
        tok = cur.tok
        if tok.kind == "op":
            cur.pos += 1
            return tok.text
        return cur.ident("function symbol")

    def term(self, cur):
        tok = cur.tok
        if cur.accept("iter"):
            cur.expect("(")
            sym = self.symbol(cur)
            cur.expect(",")
            array = cur.ident("array variable")
            cur.expect(")")
            self._declare(sym, 2, tok)
            return AIter(sym, array)
        if cur.tok.kind == "ident" and cur.peek().text == "(" and cur.peek().kind == "punct":
            sym = cur.ident()
            cur.expect("(")
            args = []
            if not cur.at(")"):
                args.append(self.term(cur))
                while cur.accept(","):
                    args.append(self.term(cur))
            cur.expect(")")
            self._declare(sym, len(args), tok)
            return AFun(sym, tuple(args))
        if cur.tok.kind == "ident" and cur.tok.text in self.builder.constants():
            return AFun(cur.ident(), ())
        return self.var(cur)

    def _declare(self, sym, arity, tok):
        sig = self.builder.signatures.get(sym)
        if sig is None:
            self.builder.signatures[sym] = FunSig(arity)
        elif sig.arity != arity:
            raise ParseError(f"{sym} used with arity {arity}, declared {sig.arity}", tok.line, tok.column)

    def equation(self, cur):
        lhs = self.var(cur)
        cur.expect("=")
        return lhs, self.term(cur)

    def attest(self, cur):
        cur.expect("attest")
        who = self.comp(cur)
        cur.expect("{")
        eqs = []
        if not cur.at("}"):
            eqs.append(self.equation(cur))
            while cur.accept(","):
                eqs.append(self.equation(cur))
        cur.expect("}")
        return Attest(who, frozenset(eqs))

    # -- statements ------------------------------------------------------------

    def relation(self, cur):
        if cur.accept("has"):
            return HasArch(self.comp(cur), self.var(cur))
        if cur.accept("compute"):
            comp = self.comp(cur)
            cur.expect("(")
            var, t = self.equation(cur)
            cur.expect(")")
            return Compute(comp, var, t)
        if cur.accept("receive"):
            receiver = self.comp(cur)
            cur.expect("from")
            sender = self.comp(cur)
            atts = set()
            while cur.at("attest"):
                atts.add(self.attest(cur))
            cur.expect("var")
            return Receive(receiver, sender, frozenset(atts), self.var(cur))
        if cur.accept("verifattest"):
            comp = self.comp(cur)
            return VerifAttest(comp, self.attest(cur))
        if cur.accept("check"):
            comp = self.comp(cur)
            cur.expect("(")
            lhs = self.term(cur)
            cur.expect("=")
            rhs = self.term(cur)
            cur.expect(")")
            return CheckRel(comp, lhs, rhs)
        if cur.accept("trust"):
            tok = cur.tok
            a, b = self.comp(cur), self.comp(cur)
            if a == b:
                raise cur.error(f"component {a!r} cannot trust itself", tok)
            return Trust(a, b)
        return None

    def statement(self, cur):
        if self.builder.try_statement(cur):
            return
        if cur.accept("components"):
            self.components.append(cur.ident("component"))
            while cur.accept(","):
                self.components.append(cur.ident("component"))
            if len(set(self.components)) != len(self.components):
                raise cur.error("duplicate component declaration")
            return
        if cur.accept("param"):
            name = cur.ident("parameter")
            cur.expect("=")
            self.params[name] = cur.number()
            return
        if cur.accept("range"):
            index = cur.ident("index")
            cur.expect("in")
            lo = cur.number()
            if lo != 1:
                raise cur.error("ranges must start at 1")
            cur.expect("..")
            bound = cur.number() if cur.tok.kind == "number" else cur.ident("range bound")
            self.index_ranges[index] = bound
            return
        if cur.accept("var"):
            while True:
                name = cur.ident("variable")
                if cur.accept(":"):
                    self.var_types[name] = cur.ident("type")
                if not cur.accept(","):
                    break
            return
        if cur.accept("property"):
            name = cur.ident("property name")
            cur.expect("=")
            named = {n: f for n, f in self.property_templates}
            formula = parse_formula(cur, self.comp, self.var, self.term, named)
            self.property_templates.append((name, formula))
            return
        tok = cur.tok
        rel = self.relation(cur)
        if rel is None:
            raise cur.error(f"unexpected {tok.text or 'end of input'!r}")
        self.templates.append(_Template(rel, tok))

    def parse(self) -> Architecture:
        cur = self.cur
        cur.expect("architecture")
        self.name = cur.ident("architecture name")
        cur.expect("{")
        while not cur.accept("}"):
            if cur.accept(";"):
                continue
            self.statement(cur)
        while cur.accept(";"):
            pass
        if not cur.at_eof():
            raise cur.error("trailing input after architecture")
        return self.build()

    # -- instantiation -------------------------------------------------------------

    def _size(self, index):
        if index in self.overrides:
            return self.overrides[index]
        bound = self.index_ranges[index]
        if isinstance(bound, str):
            if bound in self.overrides:
                return self.overrides[bound]
            if bound not in self.params:
                raise ParseError(f"range bound {bound!r} is not a declared parameter")
            return self.params[bound]
        return bound

    def build(self) -> Architecture:
        sizes = {i: self._size(i) for i in self.index_ranges}
        for i, n in sizes.items():
            if n < 1:
                raise ParseError(f"range {i!r} must have at least one element")
        ranges: dict[str, int] = {}
        self._array_sizes(self.templates, sizes, ranges)
        relations = set()
        for tpl in self.templates:
            idx = sorted(tpl.indices())
            for values in product(*(range(1, sizes[i] + 1) for i in idx)):
                rel = _instantiate(tpl.obj, dict(zip(idx, values)))
                self._check_indices(rel, ranges, tpl.tok)
                relations.add(rel)
        properties = {}
        for name, formula in self.property_templates:
            if _has_template_index(formula):
                raise ParseError(f"property {name!r} must use numeric indices")
            properties[name] = formula
        try:
            theory = self.builder.build()
        except ArityError as exc:
            raise ParseError(str(exc)) from None
        return Architecture(self.name, tuple(self.components), frozenset(relations), ranges,
                            dict(self.var_types), properties, theory)

    def _array_sizes(self, templates, sizes, ranges):
        numeric: dict[str, int] = {}
        for tpl in templates:
            for v in _avars(tpl.obj):
                if isinstance(v.index, str):
                    n = sizes[v.index]
                    if ranges.get(v.name, n) != n:
                        raise ParseError(f"array {v.name!r} indexed by ranges of different sizes",
                                         tpl.tok.line, tpl.tok.column)
                    ranges[v.name] = n
                elif isinstance(v.index, int):
                    numeric[v.name] = max(numeric.get(v.name, 0), v.index)
        for name, n in numeric.items():
            ranges.setdefault(name, n)
        for tpl in templates:
            for it in _iters(tpl.obj):
                if it.array not in ranges:
                    raise ParseError(f"iter over {it.array!r}, which is never used as an array",
                                     tpl.tok.line, tpl.tok.column)

    def _check_indices(self, rel, ranges, tok):
        for v in _avars(rel):
            if v.index is None:
                continue
            size = ranges.get(v.name)
            if v.index < 1 or (size is not None and v.index > size):
                raise ParseError(f"index {v} is outside the declared range", tok.line, tok.column)
        for c in relation_components(rel):
            if c not in self.components:
                raise ParseError(f"undeclared component {c!r}", tok.line, tok.column)


def _avars(obj):
    out = []

    def walk(o):
        if isinstance(o, AVar):
            out.append(o)
        elif isinstance(o, (frozenset, tuple, list)):
            for x in o:
                walk(x)
        elif dataclasses.is_dataclass(o):
            for f in dataclasses.fields(o):
                walk(getattr(o, f.name))
    walk(obj)
    return out


def _iters(obj):
    out = []

    def walk(o):
        if isinstance(o, AIter):
            out.append(o)
        elif isinstance(o, (frozenset, tuple, list)):
            for x in o:
                walk(x)
        elif dataclasses.is_dataclass(o):
            for f in dataclasses.fields(o):
                walk(getattr(o, f.name))
    walk(obj)
    return out


def _has_template_index(formula) -> bool:
    found = set()
    _collect_indices(formula, found)
    return bool(found)


def parse_architecture(source: str, ranges: dict | None = None) -> Architecture:
    """Parse a PAL file; `ranges` overrides range bounds by index or parameter name."""
    return _PalParser(source, ranges).parse()


def format_architecture(a: Architecture) -> str:
    """Render an architecture as a flat (fully instantiated) PAL file."""
    lines = [f"architecture {a.name} {{"]
    comps = sorted(set(a.components) | a.used_components())
    if comps:
        lines.append(f"    components {', '.join(comps)};")
    th = a.theory
    if th is not None:
        if th.types:
            lines.append(f"    type {', '.join(sorted(th.types))};")
        for sym, sig in sorted(th.signatures.items()):
            if sig.arg_types is not None:
                lines.append(f"    fun {sym}/{sig.arity} : ({', '.join(sig.arg_types)}) -> {sig.result_type};")
            elif sig.arity == 0:
                lines.append(f"    fun {sym}/0;")
        for rule in th.user_rules:
            lines.append(f"    rule {rule};")
    for name, tag in sorted(a.var_types.items()):
        if tag:
            lines.append(f"    var {name} : {tag};")
    for r in a.sorted_relations():
        lines.append(f"    {r};")
    for name, f in sorted(a.properties.items()):
        lines.append(f"    property {name} = {f};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def relation_to_json(r: Relation) -> dict:
    d = {"kind": type(r).__name__, "text": str(r)}
    d["components"] = sorted(relation_components(r))
    return d


__all__ = ["parse_architecture", "format_architecture", "relation_to_json", "arch_vars", "And", "HasAll",
           "HasNone", "Knows"]
