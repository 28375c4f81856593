"""The privacy logic, evaluated over either level's state graph.

Both `StateGraph` (protocols) and `ArchGraph` (architectures) expose nodes
whose second component is a `GlobalState`, successor sets for the prefix
order, and a theory.  A component *obtains* a variable in a state when it
can deduce some value that was bound to that variable along the run.
"""

from __future__ import annotations

from .arch import Architecture, AVar, to_term, var_as_term
from .archsem import ArchGraph
from .config import DEFAULT_DEPTH, DEFAULT_MAX_NODES
from .formulas import And, HasAll, HasNone, Knows
from .state import StateGraph
from .terms import FunApp, Term, Variable, subterms
from .theory import Deducer, EquationalTheory


def entails(equations, lhs: Term, rhs: Term, theory: EquationalTheory) -> bool:
    """Does the set of (l, r) equations entail lhs = rhs, by congruence closure over E-normal forms?"""
    nf = theory.normal_form
    eqs = [(nf(a), nf(b)) for a, b in equations]
    goal = (nf(lhs), nf(rhs))
    if goal[0] == goal[1]:
        return True
    terms = set()
    for a, b in eqs + [goal]:
        terms.update(subterms(a))
        terms.update(subterms(b))
    parent = {t: t for t in terms}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
        return True

    for a, b in eqs:
        union(a, b)
    apps = [t for t in terms if isinstance(t, FunApp)]
    changed = True
    while changed:
        changed = False
        sig = {}
        for t in apps:
            key = (t.symbol, tuple(find(x) for x in t.args))
            other = sig.setdefault(key, t)
            if other is not t and union(other, t):
                changed = True
    return find(goal[0]) == find(goal[1])


class Model:
    """Formula evaluation over one state graph, with per-state caches."""

    def __init__(self, graph, expand=None, depth: int = DEFAULT_DEPTH):
        self.graph = graph
        self.theory = graph.theory
        self.depth = depth
        self.expand = expand or (lambda v: [v])
        self._deducers = {}
        self._obtains = {}

    def _deducer(self, cs):
        key = frozenset(cs.values())
        d = self._deducers.get(key)
        if d is None:
            d = Deducer(key, self.theory, self.depth)
            self._deducers[key] = d
        return d

    def obtains(self, g, comp, var: Term) -> bool:
        """In state g, can `comp` deduce some value bound to `var`?"""
        key = (g, comp, var)
        hit = self._obtains.get(key)
        if hit is None:
            cs = g.component(comp)
            candidates = [t for t, x in g.provenance if x == var]
            hit = False
            if candidates:
                d = self._deducer(cs)
                hit = any(d.derives(t) for t in candidates)
            self._obtains[key] = hit
        return hit

    def has_all(self, comp, var) -> bool:
        targets = self.expand(var)
        return any(all(self.obtains(g, comp, x) for x in targets) for g in self.graph.states)

    def has_none(self, comp, var) -> bool:
        targets = self.expand(var)
        return not any(self.obtains(g, comp, x) for g in self.graph.states for x in targets)

    def knows(self, comp, lhs: Term, rhs: Term) -> bool:
        good = {}
        for node in self.graph.nodes:
            eqs = [(f.lhs, f.rhs) for f in node[1].component(comp).equations()]
            good[node] = entails(eqs, lhs, rhs, self.theory)
        return all(any(good[n] for n in self.graph.successors(node)) for node in self.graph.nodes)

    def holds(self, formula, term=lambda t: t) -> bool:
        if isinstance(formula, And):
            return self.holds(formula.left, term) and self.holds(formula.right, term)
        if isinstance(formula, HasAll):
            return self.has_all(formula.comp, formula.var)
        if isinstance(formula, HasNone):
            return self.has_none(formula.comp, formula.var)
        if isinstance(formula, Knows):
            return self.knows(formula.comp, term(formula.lhs), term(formula.rhs))
        raise TypeError(formula)


class ArchModel(Model):
    def __init__(self, a: Architecture, theory=None, max_nodes: int = DEFAULT_MAX_NODES, depth: int = DEFAULT_DEPTH):
        self.arch = a
        super().__init__(ArchGraph(a, theory, max_nodes), self._expand, depth)

    def _expand(self, var):
        if isinstance(var, AVar) and var.index is None and var.name in self.arch.ranges:
            return [var_as_term(AVar(var.name, k)) for k in range(1, self.arch.ranges[var.name] + 1)]
        if isinstance(var, AVar):
            return [var_as_term(var)]
        return [var]

    def holds(self, formula, term=None) -> bool:
        return super().holds(formula, lambda t: to_term(t, self.arch.ranges))


class SysModel(Model):
    def __init__(self, s, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES,
                 depth: int = DEFAULT_DEPTH):
        super().__init__(StateGraph(s, theory, max_nodes), None, depth)

    def _lift(self, var):
        return var if isinstance(var, Variable) else Variable(str(var))

    def has_all(self, comp, var) -> bool:
        return super().has_all(comp, self._lift(var))

    def has_none(self, comp, var) -> bool:
        return super().has_none(comp, self._lift(var))


def eval_arch(a: Architecture, formula, theory=None, max_nodes: int = DEFAULT_MAX_NODES,
              depth: int = DEFAULT_DEPTH) -> bool:
    return ArchModel(a, theory, max_nodes, depth).holds(formula)


def eval_sys(s, formula, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES,
             depth: int = DEFAULT_DEPTH) -> bool:
    return SysModel(s, theory, max_nodes, depth).holds(formula)
