"""Semantic invariants as plain checks over a seeded RNG.

Each check draws one case from `rng` and raises AssertionError on failure.
The hypothesis suite and the acceptance runner both drive these.
"""

from __future__ import annotations

import random

from picon.calculus import initial_trust
from picon.extraction import ExtractionContext, extract_label
from picon.gen import THEORY_SOURCE, random_protocol
from picon.reduction import all_traces, enabled_steps, initial_config, label_components
from picon.state import initial_state, apply_label
from picon.terms import FunApp, Name, subterms
from picon.theory import Deducer, parse_theory

from oracles import random_term

THEORY = parse_theory(THEORY_SOURCE)
ATOMS = ("a", "b", "c", "sk")


def redex_term(rng: random.Random, depth: int = 3):
    """A random term that often contains reducible patterns."""
    roll = rng.random()
    if depth > 0 and roll < 0.2:
        key = Name(rng.choice(ATOMS))
        body = redex_term(rng, depth - 1)
        return FunApp("checksign", (FunApp("sign", (body, key)), FunApp("pk", (key,))))
    if depth > 0 and roll < 0.35:
        return FunApp("h", (FunApp("f", (redex_term(rng, depth - 1),)),))
    if depth == 0 or roll < 0.5:
        return random_term(rng, 0, ATOMS)
    sym = rng.choice(["f", "g", "h", "pk", "sign", "checksign"])
    arity = 2 if sym in ("g", "sign", "checksign") else 1
    return FunApp(sym, tuple(redex_term(rng, depth - 1) for _ in range(arity)))


def check_normal_form_idempotent(rng: random.Random):
    t = redex_term(rng)
    n = THEORY.normal_form(t)
    assert THEORY.normal_form(n) == n, t
    assert THEORY.equal(t, n)


def check_deduction_monotone(rng: random.Random):
    small = {redex_term(rng, 2) for _ in range(rng.randint(0, 3))}
    large = small | {redex_term(rng, 2) for _ in range(rng.randint(0, 2))}
    pool = [s for t in large for s in subterms(t)] + [redex_term(rng, 2) for _ in range(3)]
    d_small = Deducer(small, THEORY, 2)
    d_large = Deducer(large, THEORY, 2)
    d_deep = Deducer(small, THEORY, 3)
    for target in pool:
        if d_small.derives(target):
            assert d_large.derives(target), (small, large, target)
            assert d_deep.derives(target), (small, target)


def _draw_system(rng: random.Random):
    return random_protocol(rng, max_comps=3, max_steps=6)


def _concurrent_system(rng: random.Random):
    """A generated protocol running next to a few purely local components."""
    from picon.calculus import parse_protocol
    from picon.gen import random_protocol_source

    lines = []
    for i in range(rng.randint(1, 2)):
        steps = [f"let y{i}0 = fresh n{i} in"]
        for j in range(1, rng.randint(1, 3)):
            steps.append(rng.choice([f"let y{i}{j} = f(y{i}{j - 1}) in", f"if y{i}{j - 1} = y{i}0 then",
                                     f"let y{i}{j} = fresh n{i}{j} in"]))
        lines.append(f"component c{i} trusts {{}} {{ {' '.join(steps)} nil }}")
    return parse_protocol(random_protocol_source(rng, max_comps=2, max_steps=4) + "\n".join(lines) + "\n")


def _random_walk(c, theory, rng):
    for _ in range(rng.randint(0, 4)):
        steps = enabled_steps(c, theory)
        if not steps:
            break
        c = rng.choice(steps)[1]
    return c


def check_diamond(rng: random.Random):
    """Steps of disjoint components commute and reach the same configuration."""
    p = _concurrent_system(rng)
    c = _random_walk(initial_config(p.system, p.theory), p.theory, rng)
    steps = enabled_steps(c, p.theory)
    for i, (l1, c1) in enumerate(steps):
        for l2, c2 in steps[i + 1:]:
            if label_components(l1) & label_components(l2):
                continue
            via1 = {n for lab, n in enabled_steps(c1, p.theory) if lab == l2}
            via2 = {n for lab, n in enabled_steps(c2, p.theory) if lab == l1}
            assert via1 and via1 & via2, (l1, l2)


def _fold(traces, init):
    ctx = ExtractionContext(set(init))
    while True:
        before = len(ctx.relations)
        for tr in traces:
            for lab in tr:
                extract_label(lab, ctx)
        if len(ctx.relations) == before:
            return ctx.relations


def check_extraction_order_independent(rng: random.Random):
    p = _draw_system(rng)
    traces = list(all_traces(p.system, p.theory))
    init = initial_trust(p.system)
    base = _fold(sorted(traces, key=str), init)
    rng.shuffle(traces)
    assert _fold(traces, init) == base


def _random_run(p, rng):
    c = initial_config(p.system, p.theory)
    g = initial_state(p.system)
    states = [g]
    while True:
        steps = enabled_steps(c, p.theory)
        if not steps:
            return states
        label, c = rng.choice(steps)
        g = apply_label(label, g, p.theory)
        states.append(g)


def check_prop_state_monotone(rng: random.Random):
    p = _draw_system(rng)
    states = _random_run(p, rng)
    for before, after in zip(states, states[1:]):
        for ident in before.ids():
            assert before.component(ident).prop_state <= after.component(ident).prop_state
        assert before.provenance <= after.provenance


def check_var_state_functional(rng: random.Random):
    p = _draw_system(rng)
    for g in _random_run(p, rng):
        for ident in g.ids():
            cs = g.component(ident)
            keys = [v for v, _ in cs.var_state]
            assert len(keys) == len(set(keys))
            for v, value in cs.var_state:
                assert (value, v) in g.provenance


CHECKS = {
    "normal-form idempotence": check_normal_form_idempotent,
    "deduction monotonicity": check_deduction_monotone,
    "diamond property": check_diamond,
    "extraction order-independence": check_extraction_order_independent,
    "prop_state monotonicity": check_prop_state_monotone,
}
