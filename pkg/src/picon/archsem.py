"""Event semantics of architectures.

Architectures carry no data, so every `has` relation seeds a symbolic
value: the name of the variable it introduces.  Other events compose or
copy those seeds.  Each relation instance fires at most once per trace and
only when the values it reads are defined; the resulting states are
explored as a graph keyed by (fired relations, state).
"""

from __future__ import annotations

from dataclasses import dataclass

from .arch import (Architecture, Attest, AVar, CheckRel, Compute, HasArch, Receive, Trust, VerifAttest,
                   arch_vars, relation_key, to_term, var_as_term)
from .config import DEFAULT_MAX_NODES
from .errors import StateSpaceBudgetExceeded, UndefinedOperand
from .state import ComponentState, Equation, GlobalState
from .terms import Name, Term, substitute
from .theory import builtin_theory

# -- events --------------------------------------------------------------------


@dataclass(frozen=True)
class HasE:
    comp: str
    var: AVar
    value: Term

    def __str__(self):
        return f"has_{self.comp}({self.var}:{self.value})"


@dataclass(frozen=True)
class ReceiveE:
    comp: str
    sender: str
    attests: frozenset
    var: AVar
    value: Term

    def __str__(self):
        return f"receive_{self.comp},{self.sender}({self.var}:{self.value})"


@dataclass(frozen=True)
class ComputeE:
    comp: str
    var: AVar
    term: object

    def __str__(self):
        return f"compute_{self.comp}({self.var} = {self.term})"


@dataclass(frozen=True)
class CheckE:
    comp: str
    lhs: object
    rhs: object

    def __str__(self):
        return f"check_{self.comp}({self.lhs} = {self.rhs})"


@dataclass(frozen=True)
class VerifE:
    comp: str
    attest: Attest

    def __str__(self):
        return f"verif_{self.comp}({self.attest})"


def seed(var: AVar) -> Name:
    return Name(str(var))


def initial_arch_state(a: Architecture) -> GlobalState:
    """Init^A: only the trust facts of the architecture."""
    comps = sorted(set(a.components) | a.used_components())
    trusts = a.trusts()
    return GlobalState(tuple(
        (c, ComponentState(prop_state=frozenset(t for t in trusts if t.truster == c))) for c in comps))


class ArchContext:
    """An architecture plus the derived bits its semantics needs."""

    def __init__(self, a: Architecture, theory=None):
        self.arch = a
        self.theory = theory or a.theory or builtin_theory()
        self.ranges = a.ranges

    def term(self, t) -> Term:
        return to_term(t, self.ranges)

    def defined(self, cs: ComponentState, t) -> bool:
        sub = cs.substitution()
        return all(var_as_term(v) in sub for v in arch_vars(t, self.ranges))

    def eval(self, t, cs: ComponentState) -> Term:
        sub = cs.substitution()
        missing = [str(v) for v in sorted(arch_vars(t, self.ranges)) if var_as_term(v) not in sub]
        if missing:
            raise UndefinedOperand(f"undefined operands in {t}: {', '.join(missing)}")
        return self.theory.normal_form(substitute(self.term(t), sub))

    def equation(self, lhs, rhs) -> Equation:
        return Equation(self.term(lhs), self.term(rhs))


def _bind(g: GlobalState, comp, var: AVar, value) -> GlobalState:
    cs = g.component(comp)
    v = var_as_term(var)
    return g.with_component(comp, cs.bind(v, value), [(value, v)])


def apply_event(e, g: GlobalState, ctx: ArchContext) -> GlobalState:
    cs = g.component(e.comp)
    if isinstance(e, (HasE, ReceiveE)):
        return _bind(g, e.comp, e.var, e.value)
    if isinstance(e, ComputeE):
        value = ctx.eval(e.term, cs)
        g = _bind(g, e.comp, e.var, value)
        cs = g.component(e.comp)
        return g.with_component(e.comp, cs.learn(ctx.equation(e.var, e.term)))
    if isinstance(e, CheckE):
        if ctx.eval(e.lhs, cs) == ctx.eval(e.rhs, cs):
            return g.with_component(e.comp, cs.learn(ctx.equation(e.lhs, e.rhs)))
        return g
    if isinstance(e, VerifE):
        if Trust(e.comp, e.attest.attester) in cs.prop_state:
            return g.with_component(e.comp, cs.learn(*(ctx.equation(v, t) for v, t in e.attest.equations)))
        return g
    raise TypeError(e)


def event_for(rel, g: GlobalState, ctx: ArchContext):
    """The event instantiating `rel` in state g, or None if it is not enabled."""
    if isinstance(rel, HasArch):
        return HasE(rel.comp, rel.var, seed(rel.var))
    if isinstance(rel, Receive):
        value = g.component(rel.sender).value(var_as_term(rel.var))
        if value is None:
            return None
        return ReceiveE(rel.receiver, rel.sender, rel.attests, rel.var, value)
    cs = g.component(rel.comp)
    if isinstance(rel, Compute):
        return ComputeE(rel.comp, rel.var, rel.term) if ctx.defined(cs, rel.term) else None
    if isinstance(rel, CheckRel):
        ok = ctx.defined(cs, rel.lhs) and ctx.defined(cs, rel.rhs)
        return CheckE(rel.comp, rel.lhs, rel.rhs) if ok else None
    if isinstance(rel, VerifAttest):
        sub = cs.substitution()
        if all(var_as_term(v) in sub for v, _ in rel.attest.equations):
            return VerifE(rel.comp, rel.attest)
        return None
    return None


def run_events(events, g: GlobalState, ctx: ArchContext) -> GlobalState:
    for e in events:
        g = apply_event(e, g, ctx)
    return g


class ArchGraph:
    """All states reachable by compatible traces, as a graph.

    Nodes are (fired relations, state); edges carry (relation, event).
    `updating` collects the relations whose event changed some state.
    """

    def __init__(self, a: Architecture, theory=None, max_nodes: int = DEFAULT_MAX_NODES):
        self.ctx = ArchContext(a, theory)
        self.theory = self.ctx.theory
        self.relations = [r for r in a.sorted_relations() if not isinstance(r, Trust)]
        self.init = initial_arch_state(a)
        self.root = (frozenset(), self.init)
        self.edges: dict = {self.root: ()}
        self.updating: set = set()
        todo = [self.root]
        while todo:
            node = todo.pop()
            if len(self.edges) > max_nodes:
                raise StateSpaceBudgetExceeded(f"state-space budget of {max_nodes} nodes exhausted")
            fired, g = node
            out = []
            for rel in self.relations:
                if rel in fired:
                    continue
                e = event_for(rel, g, self.ctx)
                if e is None:
                    continue
                g2 = apply_event(e, g, self.ctx)
                if g2 != g:
                    self.updating.add(rel)
                child = (fired | {rel}, g2)
                out.append(((rel, e), child))
                if child not in self.edges:
                    self.edges[child] = ()
                    todo.append(child)
            self.edges[node] = tuple(out)
        self.states = {g for _, g in self.edges}
        self._reach = {}

    @property
    def nodes(self):
        return self.edges.keys()

    def successors(self, node) -> frozenset:
        hit = self._reach.get(node)
        if hit is not None:
            return hit
        seen, todo = {node}, [node]
        while todo:
            cur = todo.pop()
            for _, nxt in self.edges[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        self._reach[node] = frozenset(seen)
        return self._reach[node]


def arch_semantics(a: Architecture, theory=None, max_nodes: int = DEFAULT_MAX_NODES) -> set:
    return set(ArchGraph(a, theory, max_nodes).states)


def compatible_traces(a: Architecture, theory=None, max_nodes: int = DEFAULT_MAX_NODES):
    """Yield every maximal compatible event trace, in a deterministic order.

    Background deduction is not interleaved as extra events; it is accounted
    for when the logic asks what a component can obtain.
    """
    graph = ArchGraph(a, theory, max_nodes)

    def walk(node, prefix):
        outs = graph.edges[node]
        if not outs:
            yield tuple(prefix)
            return
        for (rel, e), child in sorted(outs, key=lambda o: relation_key(o[0][0])):
            prefix.append(e)
            yield from walk(child, prefix)
            prefix.pop()

    yield from walk(graph.root, [])


def realized_relations(a: Architecture, theory=None, max_nodes: int = DEFAULT_MAX_NODES) -> frozenset:
    """Trust facts plus every relation whose event updates some reachable state."""
    graph = ArchGraph(a, theory, max_nodes)
    return frozenset(a.trusts() | graph.updating)


__all__ = ["HasE", "ReceiveE", "ComputeE", "CheckE", "VerifE", "ArchContext", "ArchGraph", "apply_event",
           "arch_semantics", "compatible_traces", "event_for", "initial_arch_state", "realized_relations",
           "run_events", "seed"]
