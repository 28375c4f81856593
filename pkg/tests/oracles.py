"""Independent reference implementations used to cross-check picon."""

from __future__ import annotations

import math
import random
from itertools import product

from picon.terms import FunApp, Name
from picon.theory import EquationalTheory


def closure(knowledge, theory: EquationalTheory, symbols: dict, rounds: int) -> set:
    """Breadth-first deduction: apply every symbol to every tuple of known terms, normalise, repeat."""
    known = {theory.normal_form(t) for t in knowledge}
    for _ in range(rounds):
        new = set(known)
        for sym, arity in symbols.items():
            for args in product(sorted(known, key=str), repeat=arity):
                new.add(theory.normal_form(FunApp(sym, args)))
        if new == known:
            break
        known = new
    return known


def interleavings(n: int) -> int:
    """Maximal traces of n independent single-step components."""
    return math.factorial(n)


def independent_components_source(n: int) -> str:
    return "\n".join(f"component c{i} trusts {{}} {{ let x{i} = fresh a{i} in nil }}" for i in range(n)) + "\n"


TERM_SYMBOLS = {"f": 1, "g": 2, "h": 1, "pk": 1, "sign": 2, "checksign": 2}


def random_term(rng: random.Random, depth: int = 3, atoms=("a", "b", "c", "sk")):
    if depth == 0 or rng.random() < 0.3:
        return Name(rng.choice(atoms))
    sym = rng.choice(sorted(TERM_SYMBOLS))
    return FunApp(sym, tuple(random_term(rng, depth - 1, atoms) for _ in range(TERM_SYMBOLS[sym])))


def a1_dependencies(r: int) -> dict:
    """Firing prerequisites of the metering architecture's relations, written out by hand."""
    deps = {}
    for i in range(1, r + 1):
        deps[f"has{i}"] = set()
        deps[f"cm{i}"] = {f"has{i}"}
        deps[f"rcv{i}"] = {f"cm{i}"}
        deps[f"ver{i}"] = {f"rcv{i}"}
        deps[f"tf{i}"] = {f"rcv{i}"}
    deps["fee"] = {f"tf{i}" for i in range(1, r + 1)}
    return deps


def downsets_and_extensions(deps: dict) -> tuple[int, int]:
    """Number of prerequisite-closed subsets, and of orders firing everything."""
    from functools import lru_cache

    items = sorted(deps)
    seen = set()

    @lru_cache(maxsize=None)
    def ext(done: frozenset) -> int:
        seen.add(done)
        ready = [x for x in items if x not in done and deps[x] <= done]
        if not ready:
            return 1
        return sum(ext(done | {x}) for x in ready)

    n = ext(frozenset())
    return len(seen), n
