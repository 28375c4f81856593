"""Random small protocols and mappings for property-based testing.

Generated protocols follow a few conventions that keep them inside the
fragment where extraction and both semantics are meant to agree:

* processes are sequential, and each send/receive pair has its own channel,
  so every run is a projection of one global script;
* every bound variable is fresh, a receiver reuses the sender's variable
  name, and every `has` step draws a distinct name;
* signature variables only appear in `sendatt` and in the matching
  `checksign` test, which may use the wrong key to force an error.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .arch import Architecture, AVar
from .calculus import Protocol, parse_protocol
from .conformance import Mapping
from .theory import BUILTIN_SIGNATURES

THEORY_SOURCE = """\
fun f/1; fun g/2; fun h/1;
rule h(f(x)) -> x;
"""
USER_FUNS = {"f": 1, "g": 2, "h": 1}


@dataclass
class _Comp:
    ident: str
    trusts: set = field(default_factory=set)
    steps: list = field(default_factory=list)   # process prefixes, in order
    known: list = field(default_factory=list)   # non-signature variables it holds
    attested: dict = field(default_factory=dict)  # var -> (signature var, signer)


def _term(rng, known):
    x = rng.choice(known)
    y = rng.choice(known)
    shape = rng.randrange(6)
    if shape == 0:
        return x
    if shape == 1:
        return f"f({x})"
    if shape == 2:
        return f"g({x}, {y})"
    if shape == 3:
        return f"h(f({x}))"
    if shape == 4:
        return f"h({x})"
    return f"g(f({x}), {y})"


def random_protocol_source(rng: random.Random, max_comps: int = 3, max_steps: int = 6) -> str:
    n = rng.randint(1, max_comps)
    comps = [_Comp(f"l{i + 1}") for i in range(n)]
    for c in comps:
        others = [d.ident for d in comps if d is not c]
        c.trusts = {d for d in others if rng.random() < 0.5}
    counters = {"x": 0, "k": 0, "s": 0, "c": 0}

    def fresh(kind):
        counters[kind] += 1
        return f"{kind}{counters[kind]}"

    steps = rng.randint(1, max_steps)
    for _ in range(steps):
        kinds = ["has"]
        if any(c.known for c in comps):
            kinds += ["comp", "check"]
            if n > 1:
                kinds += ["send", "sendatt", "sendatt"]
        if any(c.attested for c in comps):
            kinds += ["verify", "verify"]
        kind = rng.choice(kinds)
        if kind == "has":
            c = rng.choice(comps)
            x = fresh("x")
            c.steps.append(f"let {x} = fresh {fresh('k')} in")
            c.known.append(x)
        elif kind == "comp":
            c = rng.choice([c for c in comps if c.known])
            x = fresh("x")
            c.steps.append(f"let {x} = {_term(rng, c.known)} in")
            c.known.append(x)
        elif kind == "check":
            c = rng.choice([c for c in comps if c.known])
            lhs = _term(rng, c.known)
            rhs = lhs if rng.random() < 0.4 else _term(rng, c.known)
            c.steps.append(f"if {lhs} = {rhs} then")
        elif kind in ("send", "sendatt"):
            c = rng.choice([c for c in comps if c.known])
            targets = [d for d in comps if d is not c]
            d = rng.choice(targets)
            x = rng.choice(c.known)
            if x in d.known:
                continue
            ch = fresh("c")
            if kind == "send":
                c.steps.append(f"send {ch} {x} .")
                d.steps.append(f"recv {ch} ({x}) .")
            else:
                s = fresh("s")
                c.steps.append(f"let {s} = sign({x}, sk_{c.ident}) in")
                c.steps.append(f"sendatt {ch} ({x}, {s}) .")
                d.steps.append(f"recvatt {ch} ({x}, {s}) .")
                d.attested[x] = (s, c.ident)
            d.known.append(x)
        else:
            d = rng.choice([c for c in comps if c.attested])
            x = rng.choice(sorted(d.attested))
            s, signer = d.attested.pop(x)
            key = signer if rng.random() < 0.8 else rng.choice([c.ident for c in comps])
            d.steps.append(f"if {x} = checksign({s}, pk(sk_{key})) then")
    lines = [THEORY_SOURCE]
    for c in comps:
        body = " ".join(c.steps + ["nil"])
        lines.append(f"component {c.ident} trusts {{{', '.join(sorted(c.trusts))}}} {{ {body} }}")
    return "\n".join(lines) + "\n"


def random_protocol(rng: random.Random, **kwargs) -> Protocol:
    return parse_protocol(random_protocol_source(rng, **kwargs))


def random_renaming(rng: random.Random, a: Architecture) -> Mapping:
    """An injective renaming of a's components, variables and user symbols (no iterations)."""
    m = Mapping()
    comps = sorted(set(a.components) | a.used_components())
    labels = [f"C{i}" for i in range(1, len(comps) + 1)]
    rng.shuffle(labels)
    m.comps = dict(zip(comps, labels))
    vs = sorted(a.variables())
    names = [f"V{i}" for i in range(1, len(vs) + 1)]
    rng.shuffle(names)
    m.vars = {v: AVar(n) for v, n in zip(vs, names)}
    syms = sorted(s for s in a.symbols() if s not in BUILTIN_SIGNATURES)
    targets = [f"F{i}" for i in range(1, len(syms) + 1)]
    rng.shuffle(targets)
    m.funs = dict(zip(syms, targets))
    return m


def renamed_target(a_s: Architecture, m: Mapping) -> Architecture:
    image = m.architecture(a_s)
    theory = a_s.theory.renamed({k: v for k, v in m.funs.items() if isinstance(v, str)}) if a_s.theory else None
    var_types = {m.vars[AVar(k)].name: t for k, t in a_s.var_types.items() if AVar(k) in m.vars}
    return Architecture("A", image.components, image.relations, {}, var_types, {}, theory)


def mutate(rng: random.Random, a: Architecture) -> tuple[str, Architecture]:
    """Apply one of: identity, drop a relation, add a relation, rename inside a relation."""
    from .arch import HasArch, Trust

    rels = a.sorted_relations()
    choice = rng.choice(["identity", "drop", "add", "rename"])
    if choice == "drop" and rels:
        victim = rng.choice(rels)
        return choice, a.with_relations(set(rels) - {victim})
    if choice == "add":
        comps = sorted(a.components) or ["C1"]
        if rng.random() < 0.5 and len(comps) > 1:
            x, y = rng.sample(comps, 2)
            extra = Trust(x, y)
        else:
            extra = HasArch(rng.choice(comps), AVar(f"Vextra{rng.randrange(100)}"))
        comps_t = tuple(sorted(set(a.components) | {comps[0]}))
        return choice, Architecture(a.name, comps_t, a.relations | {extra}, a.ranges, a.var_types, a.properties,
                                    a.theory)
    if choice == "rename" and rels:
        victim = rng.choice(rels)
        vs = sorted(a.variables())
        if vs:
            old = rng.choice(vs)
            m = Mapping(vars={old: AVar(old.name + "r")},
                        funs={s: s for s in a.symbols()})
            return choice, a.with_relations((set(rels) - {victim}) | {m.relation(victim)})
    return "identity", a


__all__ = ["THEORY_SOURCE", "USER_FUNS", "random_protocol_source", "random_protocol", "random_renaming",
           "renamed_target", "mutate"]
