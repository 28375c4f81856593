"""Symbolic terms shared by the protocol and architecture levels.

Terms are immutable and hashable.  The four atomic universes (channels,
component identifiers, names and variables) are distinct classes, so an
identifier used as a name never compares equal to the same identifier used
as a variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, slots=True)
class Channel:
    ident: str

    def __str__(self):
        return self.ident


@dataclass(frozen=True, slots=True)
class ComponentId:
    ident: str

    def __str__(self):
        return self.ident


@dataclass(frozen=True, slots=True)
class Name:
    ident: str

    def __str__(self):
        return self.ident


@dataclass(frozen=True, slots=True)
class Variable:
    ident: str

    def __str__(self):
        return self.ident


@dataclass(frozen=True, slots=True)
class FunApp:
    symbol: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return f"{self.symbol}()"
        return f"{self.symbol}({', '.join(str(a) for a in self.args)})"


Term = Union[Channel, ComponentId, Name, Variable, FunApp]
Atom = (Channel, ComponentId, Name, Variable)


def term_key(t: Term) -> tuple:
    """Total order on terms, used wherever output must be deterministic."""
    if isinstance(t, FunApp):
        return (4, t.symbol, tuple(term_key(a) for a in t.args))
    return ({Channel: 0, ComponentId: 1, Name: 2, Variable: 3}[type(t)], t.ident)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, FunApp):
        for a in t.args:
            yield from subterms(a)


def variables(t: Term) -> set[Variable]:
    return {s for s in subterms(t) if isinstance(s, Variable)}


def names(t: Term) -> set[Name]:
    return {s for s in subterms(t) if isinstance(s, Name)}


def substitute(t: Term, sigma: Mapping[Variable, Term]) -> Term:
    if isinstance(t, Variable):
        return sigma.get(t, t)
    if isinstance(t, FunApp):
        return FunApp(t.symbol, tuple(substitute(a, sigma) for a in t.args))
    return t


def rename_names(t: Term, renaming: Mapping[str, str]) -> Term:
    if isinstance(t, Name):
        return Name(renaming.get(t.ident, t.ident))
    if isinstance(t, FunApp):
        return FunApp(t.symbol, tuple(rename_names(a, renaming) for a in t.args))
    return t


def match(pattern: Term, t: Term, sigma: dict | None = None) -> dict | None:
    """First-order syntactic matching; pattern variables are `Variable` terms."""
    sigma = {} if sigma is None else dict(sigma)
    stack = [(pattern, t)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Variable):
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = s
            elif bound != s:
                return None
        elif isinstance(p, FunApp):
            if not isinstance(s, FunApp) or s.symbol != p.symbol or len(s.args) != len(p.args):
                return None
            stack.extend(zip(p.args, s.args))
        elif p != s:
            return None
    return sigma


def height(t: Term) -> int:
    if isinstance(t, FunApp) and t.args:
        return 1 + max(height(a) for a in t.args)
    return 0
