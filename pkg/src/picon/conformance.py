"""Type-preserved mappings, conformance verdicts and state (bi)simulation.

A mapping renames the extracted architecture's vocabulary (component
ids, variables, function symbols) into a target architecture's.  A source
function may also map onto an iteration ``iter(F, Y)`` when it is applied
to exactly the elements of ``Y``, in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count, permutations

from .arch import (AFun, AIter, Architecture, Attest, AVar, CheckRel, Compute, HasArch, Receive, Trust,
                   VerifAttest, relation_key)
from .config import DEFAULT_MAX_NODES, DEFAULT_SEARCH_BUDGET
from .errors import SearchBudgetExceeded
from .extraction import attest_of, avar, extract_protocol
from .logic import ArchModel, SysModel
from .reduction import CheckL, CompL, HasL, RcvAttL, RcvL, VerAttL
from .state import StateGraph
from .terms import FunApp, Variable
from .theory import ATTESTATION_SYMBOLS
from .archsem import realized_relations
from .arch import from_term
from .formulas import HasNone


@dataclass(frozen=True)
class IterTarget:
    symbol: str
    array: str

    def __str__(self):
        return f"iter({self.symbol}, {self.array})"


@dataclass
class Mapping:
    comps: dict = field(default_factory=dict)
    vars: dict = field(default_factory=dict)
    funs: dict = field(default_factory=dict)

    def copy(self) -> Mapping:
        return Mapping(dict(self.comps), dict(self.vars), dict(self.funs))

    def key(self) -> tuple:
        return (sorted(self.comps.items()), sorted((str(k), str(v)) for k, v in self.vars.items()),
                sorted((k, str(v)) for k, v in self.funs.items()))

    def to_json(self) -> dict:
        return {
            "components": dict(sorted(self.comps.items())),
            "variables": {str(k): str(v) for k, v in sorted(self.vars.items(), key=lambda kv: str(kv[0]))},
            "functions": {k: str(v) for k, v in sorted(self.funs.items())},
        }

    # -- application ----------------------------------------------------------

    def term(self, t):
        if isinstance(t, AVar):
            return self.vars.get(t, t)
        if isinstance(t, AIter):
            return t
        target = self.funs.get(t.symbol, t.symbol)
        if isinstance(target, IterTarget):
            return AIter(target.symbol, target.array)
        return AFun(target, tuple(self.term(a) for a in t.args))

    def attest(self, att: Attest) -> Attest:
        return Attest(self.comps.get(att.attester, att.attester),
                      frozenset((self.term(v), self.term(t)) for v, t in att.equations))

    def relation(self, r):
        c = lambda x: self.comps.get(x, x)  # noqa: E731
        if isinstance(r, Trust):
            return Trust(c(r.truster), c(r.trustee))
        if isinstance(r, HasArch):
            return HasArch(c(r.comp), self.term(r.var))
        if isinstance(r, Receive):
            return Receive(c(r.receiver), c(r.sender), frozenset(self.attest(a) for a in r.attests),
                           self.term(r.var))
        if isinstance(r, Compute):
            return Compute(c(r.comp), self.term(r.var), self.term(r.term))
        if isinstance(r, CheckRel):
            return CheckRel(c(r.comp), self.term(r.lhs), self.term(r.rhs))
        if isinstance(r, VerifAttest):
            return VerifAttest(c(r.comp), self.attest(r.attest))
        raise TypeError(r)

    def architecture(self, a: Architecture, target: Architecture | None = None) -> Architecture:
        comps = tuple(sorted(self.comps.get(x, x) for x in a.components))
        rels = frozenset(self.relation(r) for r in a.relations)
        ranges = dict(target.ranges) if target is not None else {}
        var_types = dict(target.var_types) if target is not None else {}
        theory = target.theory if target is not None else None
        return Architecture(target.name if target else a.name, comps, rels, ranges, var_types, {}, theory)

    def sys_term(self, t):
        """Map a protocol term (as used in formulas) into the architecture vocabulary."""
        if isinstance(t, Variable):
            return self.vars.get(AVar(t.ident), AVar(t.ident))
        return self.term(from_term(t))


# -- search -----------------------------------------------------------------------


class _State:
    __slots__ = ("m", "rc", "rv", "rf")

    def __init__(self, m, rc, rv, rf):
        self.m, self.rc, self.rv, self.rf = m, rc, rv, rf

    @classmethod
    def empty(cls):
        return cls(Mapping(), {}, {}, {})

    def copy(self):
        return _State(self.m.copy(), dict(self.rc), dict(self.rv), dict(self.rf))


class _Search:
    def __init__(self, source: Architecture, target: Architecture, budget: int):
        self.src = source
        self.tgt = target
        self.budget = budget
        self.steps = 0
        self.src_var_types = source.var_types
        self.tgt_var_types = target.var_types
        self.src_sigs = source.theory.signatures if source.theory is not None else {}
        self.tgt_sigs = target.theory.signatures if target.theory is not None else {}

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise SearchBudgetExceeded(f"mapping search budget of {self.budget} steps exhausted")

    # bindings return False on conflict and mutate st otherwise

    def bind_comp(self, st, a, b):
        cur = st.m.comps.get(a)
        if cur is not None:
            return cur == b
        if b in st.rc:
            return False
        st.m.comps[a] = b
        st.rc[b] = a
        return True

    def _tag_ok(self, src_tag, tgt_tag):
        return src_tag is None or tgt_tag is None or src_tag == tgt_tag

    def bind_var(self, st, v: AVar, w: AVar):
        cur = st.m.vars.get(v)
        if cur is not None:
            return cur == w
        if w in st.rv:
            return False
        if not self._tag_ok(self.src_var_types.get(v.name), self.tgt_var_types.get(w.name)):
            return False
        st.m.vars[v] = w
        st.rv[w] = v
        return True

    def bind_fun(self, st, f, target, arity):
        cur = st.m.funs.get(f)
        if cur is not None:
            return cur == target
        if target in st.rf:
            return False
        if not isinstance(target, IterTarget):
            s_sig, t_sig = self.src_sigs.get(f), self.tgt_sigs.get(target)
            if s_sig is not None and t_sig is not None:
                if not self._tag_ok(s_sig.result_type, t_sig.result_type):
                    return False
                if s_sig.arg_types and t_sig.arg_types and s_sig.arg_types != t_sig.arg_types:
                    return False
        st.m.funs[f] = target
        st.rf[target] = f
        return True

    def term(self, st, s, t):
        if isinstance(s, AVar):
            return isinstance(t, AVar) and self.bind_var(st, s, t)
        if isinstance(s, AIter):
            return s == t
        if isinstance(t, AFun):
            if len(s.args) != len(t.args):
                return False
            if not self.bind_fun(st, s.symbol, t.symbol, len(s.args)):
                return False
            return all(self.term(st, a, b) for a, b in zip(s.args, t.args))
        if isinstance(t, AIter):
            size = self.tgt.ranges.get(t.array)
            if size is None or len(s.args) != size:
                return False
            if not self.bind_fun(st, s.symbol, IterTarget(t.symbol, t.array), len(s.args)):
                return False
            return all(isinstance(a, AVar) and self.bind_var(st, a, AVar(t.array, k + 1))
                       for k, a in enumerate(s.args))
        return False

    def equations(self, st, s_eqs, t_eqs):
        """Yield states matching two equation sets element-wise."""
        s_list = sorted(s_eqs, key=str)
        t_list = sorted(t_eqs, key=str)
        if len(s_list) != len(t_list):
            return
        for perm in permutations(t_list):
            self.tick()
            st2 = st.copy()
            if all(self.term(st2, a, b) and self.term(st2, ta, tb) for (a, ta), (b, tb) in zip(s_list, perm)):
                yield st2

    def attest(self, st, a: Attest, b: Attest):
        st = st.copy()
        if not self.bind_comp(st, a.attester, b.attester):
            return
        yield from self.equations(st, a.equations, b.equations)

    def attest_sets(self, st, s_atts, t_atts):
        s_list = sorted(s_atts, key=str)
        t_list = sorted(t_atts, key=str)
        if len(s_list) != len(t_list):
            return
        if not s_list:
            yield st
            return
        for perm in permutations(t_list):
            yield from self._attest_chain(st, s_list, list(perm), 0)

    def _attest_chain(self, st, s_list, t_list, i):
        if i == len(s_list):
            yield st
            return
        for st2 in self.attest(st, s_list[i], t_list[i]):
            yield from self._attest_chain(st2, s_list, t_list, i + 1)

    def relation(self, st, s, t):
        """Yield states under which the image of s equals t."""
        self.tick()
        if type(s) is not type(t):
            return
        st = st.copy()
        if isinstance(s, Trust):
            if self.bind_comp(st, s.truster, t.truster) and self.bind_comp(st, s.trustee, t.trustee):
                yield st
        elif isinstance(s, HasArch):
            if self.bind_comp(st, s.comp, t.comp) and self.bind_var(st, s.var, t.var):
                yield st
        elif isinstance(s, Compute):
            if self.bind_comp(st, s.comp, t.comp) and self.bind_var(st, s.var, t.var) and \
                    self.term(st, s.term, t.term):
                yield st
        elif isinstance(s, CheckRel):
            if self.bind_comp(st, s.comp, t.comp) and self.term(st, s.lhs, t.lhs) and self.term(st, s.rhs, t.rhs):
                yield st
        elif isinstance(s, Receive):
            if self.bind_comp(st, s.receiver, t.receiver) and self.bind_comp(st, s.sender, t.sender) and \
                    self.bind_var(st, s.var, t.var):
                yield from self.attest_sets(st, s.attests, t.attests)
        elif isinstance(s, VerifAttest):
            if self.bind_comp(st, s.comp, t.comp):
                yield from self.attest(st, s.attest, t.attest)


def _complete(m: Mapping, source: Architecture, target: Architecture) -> Mapping:
    """Give every unmapped source symbol a fresh, non-clashing target name."""
    m = m.copy()
    used_comps = set(target.components) | target.used_components() | set(m.comps.values())
    used_vars = {v.name for v in target.variables()} | {v.name for v in m.vars.values()} | set(target.ranges)
    used_funs = target.symbols() | {str(f) for f in m.funs.values()}
    fresh = count(1)

    def pick(base, used):
        name = base
        while name in used:
            name = f"{base}_{next(fresh)}"
        used.add(name)
        return name

    for c in sorted(set(source.components) | source.used_components()):
        if c not in m.comps:
            m.comps[c] = pick(c, used_comps)
    for v in sorted(source.variables()):
        if v not in m.vars:
            m.vars[v] = AVar(pick(v.name, used_vars), v.index)
    for f in sorted(source.symbols()):
        if f not in m.funs:
            m.funs[f] = pick(f, used_funs)
    return m


def iter_mappings(source: Architecture, target: Architecture, mode: str = "strong", strict_subset: bool = False,
                  budget: int = DEFAULT_SEARCH_BUDGET):
    """Yield mappings (in a deterministic order) witnessing the relation condition of `mode`."""
    src = source.sorted_relations()
    tgt = target.sorted_relations()
    if mode == "strong" and len(src) != len(tgt):
        return
    if mode == "weak" and (len(src) < len(tgt) or (strict_subset and len(src) == len(tgt))):
        return
    search = _Search(source, target, budget)
    by_kind: dict = {}
    for r in src:
        by_kind.setdefault(type(r), []).append(r)
    for r in tgt:
        if len(by_kind.get(type(r), [])) < sum(1 for t in tgt if type(t) is type(r)):
            return
    seen = set()

    def go(i, st, used):
        if i == len(tgt):
            m = _complete(st.m, source, target) if mode == "weak" else st.m.copy()
            k = str(m.key())
            if k not in seen:
                seen.add(k)
                yield m
            return
        t = tgt[i]
        for j, s in enumerate(by_kind.get(type(t), [])):
            if (type(t), j) in used:
                continue
            for st2 in search.relation(st, s, t):
                yield from go(i + 1, st2, used | {(type(t), j)})

    yield from go(0, _State.empty(), frozenset())


def find_mapping(source: Architecture, target: Architecture, mode: str = "strong", strict_subset: bool = False,
                 budget: int = DEFAULT_SEARCH_BUDGET) -> Mapping | None:
    return next(iter_mappings(source, target, mode, strict_subset, budget), None)


def best_partial(source: Architecture, target: Architecture, budget: int = DEFAULT_SEARCH_BUDGET):
    """The largest consistent partial matching, as (mapping, matched target set, matched source set)."""
    src = source.sorted_relations()
    tgt = target.sorted_relations()
    search = _Search(source, target, budget)
    best = [(-1, None, frozenset(), frozenset())]

    def go(i, st, used_src, matched):
        if len(matched) + (len(tgt) - i) <= best[0][0]:
            return
        if i == len(tgt):
            best[0] = (len(matched), st.m.copy(), frozenset(matched), frozenset(used_src))
            return
        t = tgt[i]
        for j, s in enumerate(src):
            if j in used_src or type(s) is not type(t):
                continue
            for st2 in search.relation(st, s, t):
                go(i + 1, st2, used_src | {j}, matched | {t})
        go(i + 1, st, used_src, matched)

    try:
        go(0, _State.empty(), frozenset(), frozenset())
    except SearchBudgetExceeded:
        pass
    _, m, matched, used = best[0]
    return m or Mapping(), matched, frozenset(src[j] for j in used)


# -- verdicts ------------------------------------------------------------------------


@dataclass
class ConformanceVerdict:
    mode: str
    holds: bool
    witness: Mapping | None = None
    missing: frozenset = frozenset()
    extra: frozenset = frozenset()
    hasnone_violations: frozenset = frozenset()

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "holds": self.holds,
            "witness": self.witness.to_json() if self.witness else None,
            "missing": sorted(str(r) for r in self.missing),
            "extra": sorted(str(r) for r in self.extra),
            "hasnone_violations": sorted(f"{x} -> {X}" for X, x in self.hasnone_violations),
        }


def hasnone_violations(sys_model: SysModel, arch_model: ArchModel, m: Mapping, target: Architecture) -> set:
    """Mapped pairs where the architecture guarantees Has^none but the protocol does not."""
    out = set()
    target_vars = target.variables()
    for (x, X) in sorted(m.vars.items(), key=lambda kv: str(kv[0])):
        if X not in target_vars:
            continue
        for l, i in sorted(m.comps.items()):
            if i not in target.components and i not in target.used_components():
                continue
            if arch_model.has_none(i, X) and not sys_model.has_none(l, Variable(x.name)):
                out.add((X, Variable(x.name)))
    return out


def check_conformance(protocol, target: Architecture, mode: str = "strong", strict_subset: bool = False,
                      max_nodes: int = DEFAULT_MAX_NODES, budget: int = DEFAULT_SEARCH_BUDGET,
                      depth: int | None = None) -> ConformanceVerdict:
    source = extract_protocol(protocol, max_nodes)
    extra_args = {} if depth is None else {"depth": depth}
    if mode == "strong":
        m = find_mapping(source, target, "strong", budget=budget)
        if m is not None:
            return ConformanceVerdict(mode, True, m)
    else:
        sys_model = arch_model = None
        first_violation = None
        for m in iter_mappings(source, target, "weak", strict_subset, budget):
            if sys_model is None:
                sys_model = SysModel(protocol.system, protocol.theory, max_nodes, **extra_args)
                arch_model = ArchModel(target, None, max_nodes, **extra_args)
            bad = hasnone_violations(sys_model, arch_model, m, target)
            if not bad:
                return ConformanceVerdict(mode, True, m)
            if first_violation is None:
                first_violation = (m, bad)
        if first_violation is not None:
            m, bad = first_violation
            return ConformanceVerdict(mode, False, None, frozenset(), frozenset(), frozenset(bad))
    m, matched, used = best_partial(source, target, budget)
    missing = target.relations - matched
    extra = source.relations - used
    if mode == "weak":
        extra = frozenset()
    return ConformanceVerdict(mode, False, None, frozenset(missing), frozenset(extra))


# -- state (bi)simulation -------------------------------------------------------------


def label_update(label, before, after):
    """The relation-shaped update a protocol transition performs, or None."""
    if isinstance(label, HasL):
        return HasArch(label.comp, avar(label.var))
    if isinstance(label, RcvL):
        return Receive(label.receiver, label.sender, frozenset(), avar(label.var))
    if isinstance(label, RcvAttL):
        atts = frozenset({attest_of(label.sender, label.attested)}) if label.attested else frozenset()
        return Receive(label.receiver, label.sender, atts, avar(label.var))
    if isinstance(label, CompL):
        if isinstance(label.rhs, FunApp) and label.rhs.symbol in ATTESTATION_SYMBOLS:
            return None
        return Compute(label.comp, avar(label.var), from_term(label.rhs))
    if before == after:
        return None
    if isinstance(label, CheckL):
        return CheckRel(label.comp, from_term(label.lhs), from_term(label.rhs))
    if isinstance(label, VerAttL) and label.attested:
        return VerifAttest(label.comp, attest_of(label.attester, label.attested))
    return None


def system_updates(s, theory=None, max_nodes: int = DEFAULT_MAX_NODES, graph: StateGraph | None = None) -> frozenset:
    """Trust facts plus the relation shape of every state update along some run."""
    graph = graph or StateGraph(s, theory, max_nodes)
    out = set()
    for _, cs in graph.init.comps:
        out |= {f for f in cs.prop_state if isinstance(f, Trust)}
    for (cfg, g), outs in graph.edges.items():
        for label, (_, g2) in outs:
            r = label_update(label, g, g2)
            if r is not None:
                out.add(r)
    return frozenset(out)


def _updates_arch(protocol, max_nodes) -> Architecture:
    rels = system_updates(protocol.system, protocol.theory, max_nodes)
    comps = tuple(sorted(c.id for c in protocol.components))
    return Architecture(f"U_{protocol.name}", comps, rels, {}, dict(protocol.var_types), {}, protocol.theory)


def _realized_arch(target: Architecture, max_nodes) -> Architecture:
    return target.with_relations(realized_relations(target, None, max_nodes))


def check_simulation(protocol, target: Architecture, m: Mapping, pair: tuple | None = None, bisim: bool = True,
                     max_nodes: int = DEFAULT_MAX_NODES, models: tuple | None = None) -> bool:
    """Does the protocol's state evolution (bi)simulate the architecture's under m?

    Without `pair`, compares the relation shapes of the updates on both
    sides.  With ``pair = (X, x)``, compares, for every mapped component,
    whether X (architecture) and x (protocol) can ever be obtained.
    """
    if pair is None:
        sys_up = frozenset(m.relation(r) for r in system_updates(protocol.system, protocol.theory, max_nodes))
        arch_up = realized_relations(target, None, max_nodes)
        return sys_up == arch_up if bisim else arch_up <= sys_up
    X, x = pair
    sys_model, arch_model = models or (SysModel(protocol.system, protocol.theory, max_nodes),
                                       ArchModel(target, None, max_nodes))
    for l, i in sorted(m.comps.items()):
        if i not in target.components and i not in target.used_components():
            continue
        arch_has = not arch_model.has_none(i, X)
        sys_has = not sys_model.has_none(l, x)
        if arch_has != sys_has and (bisim or arch_has):
            return False
    return True


def find_bisimulation(protocol, target: Architecture, max_nodes: int = DEFAULT_MAX_NODES,
                      budget: int = DEFAULT_SEARCH_BUDGET) -> Mapping | None:
    """A mapping under which the protocol and architecture are state-bisimilar, if any."""
    ups = _updates_arch(protocol, max_nodes)
    real = _realized_arch(target, max_nodes)
    for m in iter_mappings(ups, real, "strong", budget=budget):
        if check_simulation(protocol, target, m, max_nodes=max_nodes):
            return m
    return None


def hasnone_pairs(m: Mapping, target: Architecture, arch_model: ArchModel) -> list:
    """(X, x) pairs of the mapping where some target component satisfies Has^none(X)."""
    comps = [i for i in m.comps.values() if i in target.components or i in target.used_components()]
    target_vars = target.variables()
    out = []
    for s_var, X in sorted(m.vars.items(), key=lambda kv: str(kv[0])):
        if X in target_vars and any(arch_model.holds(HasNone(i, X)) for i in comps):
            out.append((X, Variable(s_var.name)))
    return out


def find_simulation(protocol, target: Architecture, strict_subset: bool = False,
                    max_nodes: int = DEFAULT_MAX_NODES, budget: int = DEFAULT_SEARCH_BUDGET) -> Mapping | None:
    """A mapping with simulation plus bisimulation on every Has^none variable pair, if any."""
    ups = _updates_arch(protocol, max_nodes)
    real = _realized_arch(target, max_nodes)
    models = None
    for m in iter_mappings(ups, real, "weak", strict_subset, budget):
        if not check_simulation(protocol, target, m, bisim=False, max_nodes=max_nodes):
            continue
        if models is None:
            models = (SysModel(protocol.system, protocol.theory, max_nodes), ArchModel(target, None, max_nodes))
        pairs = hasnone_pairs(m, target, models[1])
        if all(check_simulation(protocol, target, m, pair=p, models=models) for p in pairs):
            return m
    return None


__all__ = ["IterTarget", "Mapping", "ConformanceVerdict", "iter_mappings", "find_mapping", "best_partial",
           "check_conformance", "check_simulation", "find_bisimulation", "find_simulation", "system_updates",
           "label_update", "hasnone_violations", "hasnone_pairs", "relation_key"]
