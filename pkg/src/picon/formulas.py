"""Privacy-logic formulas, shared by architecture and system files.

The same four constructors serve both levels; at the protocol level the
variable is a `Variable` and the equation sides are protocol terms, at the
architecture level they are `AVar` (or an array name) and PAL terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class HasAll:
    comp: str
    var: object

    def __str__(self):
        return f"hasall {self.comp} {self.var}"


@dataclass(frozen=True)
class HasNone:
    comp: str
    var: object

    def __str__(self):
        return f"hasnone {self.comp} {self.var}"


@dataclass(frozen=True)
class Knows:
    comp: str
    lhs: object
    rhs: object

    def __str__(self):
        return f"knows {self.comp} ({self.lhs} = {self.rhs})"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} and {self.right})"


Formula = Union[HasAll, HasNone, Knows, And]


def parse_formula(cur, read_comp, read_var, read_term, named: dict):
    """formula := atom ('and' atom)* ; atom := hasall C V | hasnone C V | knows C (T = T) | (formula) | NAME"""
    left = _atom(cur, read_comp, read_var, read_term, named)
    while cur.accept("and"):
        left = And(left, _atom(cur, read_comp, read_var, read_term, named))
    return left


def _atom(cur, read_comp, read_var, read_term, named):
    if cur.accept("hasall"):
        return HasAll(read_comp(cur), read_var(cur))
    if cur.accept("hasnone"):
        return HasNone(read_comp(cur), read_var(cur))
    if cur.accept("knows"):
        comp = read_comp(cur)
        cur.expect("(")
        lhs = read_term(cur)
        cur.expect("=")
        rhs = read_term(cur)
        cur.expect(")")
        return Knows(comp, lhs, rhs)
    if cur.accept("("):
        f = parse_formula(cur, read_comp, read_var, read_term, named)
        cur.expect(")")
        return f
    tok = cur.tok
    ident = cur.ident("formula")
    if ident not in named:
        raise cur.error(f"unknown property {ident!r}", tok)
    return named[ident]
