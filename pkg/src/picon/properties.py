"""Executable checks of the correspondence properties on concrete instances.

Each check returns a list of counterexample descriptions (empty when the
property holds on the instance).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .arch import Architecture, AVar
from .archsem import realized_relations
from .conformance import Mapping, check_conformance, find_bisimulation, find_simulation
from .extraction import extract_protocol
from .formulas import HasAll, HasNone, Knows
from .gen import mutate, random_renaming, renamed_target
from .logic import ArchModel, SysModel
from .state import Equation
from .terms import FunApp, Name, Variable


def is_live(a: Architecture) -> bool:
    """Every non-trust relation of `a` is realized by some compatible trace."""
    return realized_relations(a) == a.relations | a.trusts()


def knowledge_candidates(sys_model: SysModel) -> set:
    """Equations worth asking K about: everything learned anywhere, plus variable pairs."""
    eqs = set()
    for g in sys_model.graph.states:
        for _, cs in g.comps:
            eqs |= {(f.lhs, f.rhs) for f in cs.prop_state if isinstance(f, Equation)}
    vs = sorted({v for g in sys_model.graph.states for _, cs in g.comps for v, _ in cs.var_state},
                key=lambda v: v.ident)
    for i, a in enumerate(vs[:4]):
        for b in vs[i + 1:5]:
            eqs.add((a, b))
    return eqs


def logic_agreement(protocol, rng: random.Random) -> list[str]:
    """Protocol-level and architecture-level logic agree under a renaming of the extraction."""
    a_s = extract_protocol(protocol)
    m = random_renaming(rng, a_s)
    target = renamed_target(a_s, m)
    sys_model = SysModel(protocol.system, protocol.theory)
    arch_model = ArchModel(target)
    bad = []
    comps = sorted(m.comps)
    for v in sorted(a_s.variables()):
        x = Variable(v.name)
        for l in comps:
            i = m.comps[l]
            for ctor in (HasAll, HasNone):
                s_val = sys_model.holds(ctor(l, x))
                a_val = arch_model.holds(ctor(i, m.vars[v]))
                if s_val != a_val:
                    bad.append(f"{ctor.__name__}({l}, {x}): system {s_val}, architecture {a_val}")
    for lhs, rhs in sorted(knowledge_candidates(sys_model), key=str):
        if not _mappable(lhs, m) or not _mappable(rhs, m):
            continue
        for l in comps:
            s_val = sys_model.holds(Knows(l, lhs, rhs))
            a_val = arch_model.holds(Knows(m.comps[l], m.sys_term(lhs), m.sys_term(rhs)))
            if s_val != a_val:
                bad.append(f"K({l}, {lhs} = {rhs}): system {s_val}, architecture {a_val}")
    return bad


def _mappable(t, m: Mapping) -> bool:
    if isinstance(t, Variable):
        return AVar(t.ident) in m.vars
    if isinstance(t, FunApp):
        return all(_mappable(a, m) for a in t.args)
    return isinstance(t, Name)


@dataclass
class Instance:
    protocol: object
    target: Architecture
    mutation: str


def conformance_instance(protocol, rng: random.Random) -> Instance | None:
    """A renamed, possibly mutated target for `protocol`; None if the target has dead relations."""
    a_s = extract_protocol(protocol)
    target = renamed_target(a_s, random_renaming(rng, a_s))
    kind, mutated = mutate(rng, target)
    if not is_live(mutated):
        return None
    return Instance(protocol, mutated, kind)


def strong_matches_bisimulation(inst: Instance) -> list[str]:
    """Strong conformance holds exactly when some mapping gives a state bisimulation."""
    strong = check_conformance(inst.protocol, inst.target, "strong").holds
    bisim = find_bisimulation(inst.protocol, inst.target) is not None
    if strong != bisim:
        return [f"{inst.mutation}: strong {strong}, bisimulation {bisim}"]
    return []


def weak_matches_simulation(inst: Instance) -> list[str]:
    """Weak conformance holds exactly when simulation plus Has^none-pair bisimulation does."""
    weak = check_conformance(inst.protocol, inst.target, "weak").holds
    sim = find_simulation(inst.protocol, inst.target) is not None
    if weak != sim:
        return [f"{inst.mutation}: weak {weak}, simulation {sim}"]
    return []


__all__ = ["is_live", "logic_agreement", "strong_matches_bisimulation", "weak_matches_simulation",
           "conformance_instance", "Instance"]
