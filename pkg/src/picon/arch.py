"""Architecture-level data: PAL terms, attestations, relations and architectures.

The same classes describe both a hand-written PAL architecture and the
architecture extracted from a protocol.  In the extracted case variable
names are the protocol's variable identifiers and protocol names become
nullary functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .terms import FunApp, Term, Variable


@dataclass(frozen=True, order=True)
class AVar:
    name: str
    index: int | None = None

    def __str__(self):
        return self.name if self.index is None else f"{self.name}[{self.index}]"


@dataclass(frozen=True)
class AFun:
    symbol: str
    args: tuple = ()

    def __str__(self):
        return f"{self.symbol}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class AIter:
    """Iterated application of `symbol` over the array variable `array`."""

    symbol: str
    array: str

    def __str__(self):
        return f"iter({self.symbol}, {self.array})"


ArchTerm = Union[AVar, AFun, AIter]


def arch_vars(t: ArchTerm, ranges: dict | None = None) -> set[AVar]:
    if isinstance(t, AVar):
        return {t}
    if isinstance(t, AFun):
        out = set()
        for a in t.args:
            out |= arch_vars(a, ranges)
        return out
    size = (ranges or {}).get(t.array, 1)
    return {AVar(t.array, k) for k in range(1, size + 1)}


def arch_symbols(t: ArchTerm) -> set[str]:
    if isinstance(t, AFun):
        out = {t.symbol}
        for a in t.args:
            out |= arch_symbols(a)
        return out
    if isinstance(t, AIter):
        return {t.symbol}
    return set()


def var_as_term(v: AVar) -> Variable:
    return Variable(str(v))


def to_term(t: ArchTerm, ranges: dict | None = None) -> Term:
    """Flatten an architecture term into a plain term; iterations become left folds."""
    if isinstance(t, AVar):
        return var_as_term(t)
    if isinstance(t, AFun):
        return FunApp(t.symbol, tuple(to_term(a, ranges) for a in t.args))
    size = (ranges or {}).get(t.array, 1)
    acc = var_as_term(AVar(t.array, 1))
    for k in range(2, size + 1):
        acc = FunApp(t.symbol, (acc, var_as_term(AVar(t.array, k))))
    return acc


def from_term(t: Term) -> ArchTerm:
    """Protocol term to architecture term: variables stay variables, names become constants."""
    if isinstance(t, Variable):
        return AVar(t.ident)
    if isinstance(t, FunApp):
        return AFun(t.symbol, tuple(from_term(a) for a in t.args))
    return AFun(t.ident, ())


def _eqs_key(eqs):
    return sorted(f"{v} = {t}" for v, t in eqs)


@dataclass(frozen=True)
class Attest:
    attester: str
    equations: frozenset  # of (AVar, ArchTerm)

    def __str__(self):
        return f"attest {self.attester} {{{', '.join(_eqs_key(self.equations))}}}"


@dataclass(frozen=True)
class HasArch:
    comp: str
    var: AVar

    def __str__(self):
        return f"has {self.comp} {self.var}"


@dataclass(frozen=True)
class Receive:
    receiver: str
    sender: str
    attests: frozenset
    var: AVar

    def __str__(self):
        atts = "".join(f" {a}" for a in sorted(self.attests, key=str))
        return f"receive {self.receiver} from {self.sender}{atts} var {self.var}"


@dataclass(frozen=True)
class Compute:
    comp: str
    var: AVar
    term: ArchTerm

    def __str__(self):
        return f"compute {self.comp} ({self.var} = {self.term})"


@dataclass(frozen=True)
class CheckRel:
    comp: str
    lhs: ArchTerm
    rhs: ArchTerm

    def __str__(self):
        return f"check {self.comp} ({self.lhs} = {self.rhs})"


@dataclass(frozen=True)
class VerifAttest:
    comp: str
    attest: Attest

    def __str__(self):
        return f"verifattest {self.comp} {self.attest}"


@dataclass(frozen=True)
class Trust:
    truster: str
    trustee: str

    def __str__(self):
        return f"trust {self.truster} {self.trustee}"


Relation = Union[HasArch, Receive, Compute, CheckRel, VerifAttest, Trust]

KIND_ORDER = {Trust: 0, HasArch: 1, Compute: 2, Receive: 3, VerifAttest: 4, CheckRel: 5}


def relation_key(r) -> tuple:
    return (KIND_ORDER[type(r)], str(r))


def relation_components(r) -> set[str]:
    if isinstance(r, Trust):
        return {r.truster, r.trustee}
    if isinstance(r, Receive):
        return {r.receiver, r.sender} | {a.attester for a in r.attests}
    if isinstance(r, VerifAttest):
        return {r.comp, r.attest.attester}
    return {r.comp}


def _attest_vars(a: Attest, ranges):
    out = set()
    for v, t in a.equations:
        out |= {v} | arch_vars(t, ranges)
    return out


def relation_vars(r, ranges=None) -> set[AVar]:
    if isinstance(r, HasArch):
        return {r.var}
    if isinstance(r, Receive):
        out = {r.var}
        for a in r.attests:
            out |= _attest_vars(a, ranges)
        return out
    if isinstance(r, Compute):
        return {r.var} | arch_vars(r.term, ranges)
    if isinstance(r, CheckRel):
        return arch_vars(r.lhs, ranges) | arch_vars(r.rhs, ranges)
    if isinstance(r, VerifAttest):
        return _attest_vars(r.attest, ranges)
    return set()


def relation_symbols(r) -> set[str]:
    if isinstance(r, Compute):
        return arch_symbols(r.term)
    if isinstance(r, CheckRel):
        return arch_symbols(r.lhs) | arch_symbols(r.rhs)
    atts = r.attests if isinstance(r, Receive) else [r.attest] if isinstance(r, VerifAttest) else []
    out = set()
    for a in atts:
        for _, t in a.equations:
            out |= arch_symbols(t)
    return out


@dataclass(frozen=True)
class Architecture:
    """A set of relations over declared components.

    `ranges` maps array-variable names to their size; `var_types` and
    `fun_types` hold optional type tags used by the mapping search.
    """

    name: str = "A"
    components: tuple = ()
    relations: frozenset = frozenset()
    ranges: dict = field(default_factory=dict, compare=False, hash=False)
    var_types: dict = field(default_factory=dict, compare=False, hash=False)
    properties: dict = field(default_factory=dict, compare=False, hash=False)
    theory: object = field(default=None, compare=False, hash=False)

    def sorted_relations(self) -> list:
        return sorted(self.relations, key=relation_key)

    def variables(self) -> set[AVar]:
        out = set()
        for r in self.relations:
            out |= relation_vars(r, self.ranges)
        return out

    def symbols(self) -> set[str]:
        out = set()
        for r in self.relations:
            out |= relation_symbols(r)
        return out

    def used_components(self) -> set[str]:
        out = set()
        for r in self.relations:
            out |= relation_components(r)
        return out

    def trusts(self) -> set[Trust]:
        return {r for r in self.relations if isinstance(r, Trust)}

    def with_relations(self, relations) -> Architecture:
        return Architecture(self.name, self.components, frozenset(relations), self.ranges,
                            self.var_types, self.properties, self.theory)
