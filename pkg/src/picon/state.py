"""Protocol-level knowledge states and their evolution along label traces."""

from __future__ import annotations

from dataclasses import dataclass

from .arch import Trust
from .calculus import components
from .config import DEFAULT_MAX_NODES
from .errors import StateSpaceBudgetExceeded, UnknownComponent
from .reduction import (CheckL, CompL, ErrorL, HasL, RcvAttL, RcvL, TauL, VerAttL, enabled_steps, initial_config,
                        label_components)
from .terms import Term, Variable, substitute, term_key
from .theory import EquationalTheory, builtin_theory


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


def fact_key(f):
    return (0 if isinstance(f, Trust) else 1, str(f))


@dataclass(frozen=True)
class ComponentState:
    var_state: frozenset = frozenset()   # (Variable, value) pairs, at most one per variable
    prop_state: frozenset = frozenset()  # Equation and Trust facts
    error: bool = False

    def value(self, var: Variable):
        for v, t in self.var_state:
            if v == var:
                return t
        return None

    def substitution(self) -> dict:
        return dict(self.var_state)

    def values(self) -> set:
        return {t for _, t in self.var_state}

    def bind(self, var, value) -> ComponentState:
        kept = {(v, t) for v, t in self.var_state if v != var}
        return ComponentState(frozenset(kept | {(var, value)}), self.prop_state, self.error)

    def learn(self, *facts) -> ComponentState:
        return ComponentState(self.var_state, self.prop_state | frozenset(facts), self.error)

    def equations(self) -> set:
        return {f for f in self.prop_state if isinstance(f, Equation)}


@dataclass(frozen=True)
class GlobalState:
    comps: tuple = ()                # sorted (component id, ComponentState)
    provenance: frozenset = frozenset()  # (value, variable) pairs

    def component(self, ident) -> ComponentState:
        for i, cs in self.comps:
            if i == ident:
                return cs
        raise UnknownComponent(f"unknown component {ident!r}")

    def ids(self) -> list[str]:
        return [i for i, _ in self.comps]

    def bound_to(self, value) -> set:
        return {x for t, x in self.provenance if t == value}

    def with_component(self, ident, cs, bindings=()) -> GlobalState:
        comps = tuple((i, cs if i == ident else old) for i, old in self.comps)
        return GlobalState(comps, self.provenance | frozenset(bindings))


def initial_state(s) -> GlobalState:
    """Init^S: every component starts knowing only its trust facts."""
    comps = []
    for c in components(s):
        comps.append((c.id, ComponentState(prop_state=frozenset(Trust(c.id, j) for j in c.trusts))))
    return GlobalState(tuple(sorted(comps, key=lambda p: p[0])))


def _bind(g, comp, var, value):
    cs = g.component(comp)
    return g.with_component(comp, cs.bind(var, value), [(value, var)])


def apply_label(label, g: GlobalState, theory: EquationalTheory | None = None) -> GlobalState:
    theory = theory or builtin_theory()
    for c in label_components(label):
        g.component(c)
    if isinstance(label, (RcvL, RcvAttL)):
        if g.component(label.receiver).error:
            return g
        return _bind(g, label.receiver, label.var, label.value)
    cs = g.component(label.comp)
    if cs.error:
        return g
    if isinstance(label, HasL):
        return _bind(g, label.comp, label.var, label.value)
    if isinstance(label, CompL):
        value = theory.normal_form(substitute(label.rhs, cs.substitution()))
        g = _bind(g, label.comp, label.var, value)
        cs = g.component(label.comp)
        return g.with_component(label.comp, cs.learn(Equation(label.var, label.rhs)))
    if isinstance(label, CheckL):
        sub = cs.substitution()
        if theory.equal(substitute(label.lhs, sub), substitute(label.rhs, sub)):
            return g.with_component(label.comp, cs.learn(Equation(label.lhs, label.rhs)))
        return g
    if isinstance(label, VerAttL):
        if label.attester is not None and Trust(label.comp, label.attester) in cs.prop_state:
            return g.with_component(label.comp, cs.learn(*(Equation(v, t) for v, t in label.attested)))
        return g
    if isinstance(label, ErrorL):
        return g.with_component(label.comp, ComponentState(cs.var_state, cs.prop_state, True))
    if isinstance(label, TauL):
        if label.var is None:
            return g
        return _bind(g, label.comp, label.var, label.value)
    raise TypeError(label)


def run_trace(trace, init: GlobalState, theory: EquationalTheory | None = None) -> GlobalState:
    g = init
    for label in trace:
        g = apply_label(label, g, theory)
    return g


class StateGraph:
    """Reachable (configuration, global state) nodes with their successor edges.

    The prefix order between states is reachability between nodes, so two
    runs that happen to reach the same knowledge state keep distinct futures.
    """

    def __init__(self, s, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES):
        self.theory = theory or builtin_theory()
        self.init = initial_state(s)
        start = (initial_config(s, self.theory), self.init)
        self.root = start
        self.edges: dict = {}
        todo = [start]
        self.edges[start] = ()
        while todo:
            node = todo.pop()
            if len(self.edges) > max_nodes:
                raise StateSpaceBudgetExceeded(f"state-space budget of {max_nodes} nodes exhausted")
            cfg, g = node
            out = []
            for label, nxt in enabled_steps(cfg, self.theory):
                child = (nxt, apply_label(label, g, self.theory))
                out.append((label, child))
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
        """All nodes reachable from `node`, including itself."""
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


def state_semantics(s, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES) -> set:
    return set(StateGraph(s, theory, max_nodes).states)


def state_to_json(g: GlobalState) -> dict:
    comps = {}
    for ident, cs in g.comps:
        comps[ident] = {
            "vars": {str(v): str(t) for v, t in sorted(cs.var_state, key=lambda p: p[0].ident)},
            "props": sorted(str(f) for f in cs.prop_state),
            "error": cs.error,
        }
    prov = {}
    for value, var in sorted(g.provenance, key=lambda p: (term_key(p[0]), p[1].ident)):
        prov.setdefault(str(value), []).append(str(var))
    return {"components": comps, "provenance": prov}
