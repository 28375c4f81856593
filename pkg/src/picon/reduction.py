"""Labeled reduction of systems and exhaustive trace enumeration.

A running system is a `Config`: one `RuntimeComponent` per component, each
holding a multiset of threads.  A thread pairs a process with the
environment of values bound so far, so labels can report the *syntactic*
right-hand side of a computation (``comp(lM, xm1:xc1)``) while
communications report the transmitted *value* (``rcv_att(lO, lM, xm1:k1)``).
Restrictions are unfolded once, at load time, after renaming any bound
name that clashes with another name in the system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count

from .calculus import (EmptySystem, If, Let, Nil, Par, ParS, Recv, RecvAtt, Restrict, RestrictS, Send, SendAtt,
                       Single, free_names)
from .config import DEFAULT_MAX_NODES
from .errors import StateSpaceBudgetExceeded
from .terms import ComponentId, FunApp, Name, Term, Variable, rename_names, substitute, term_key, variables
from .theory import CHECKSIGN, SIGN, EquationalTheory, builtin_theory

# -- labels ------------------------------------------------------------------


def _eqs_str(eqs):
    return "{" + ", ".join(sorted(f"{v} = {t}" for v, t in eqs)) + "}"


@dataclass(frozen=True)
class HasL:
    comp: str
    var: Variable
    value: Term

    def __str__(self):
        return f"has({self.comp}, {self.var}:{self.value})"


@dataclass(frozen=True)
class RcvL:
    receiver: str
    sender: str
    var: Variable
    value: Term

    def __str__(self):
        return f"rcv({self.receiver}, {self.sender}, {self.var}:{self.value})"


@dataclass(frozen=True)
class RcvAttL:
    """Reception of a signed value.  `attested` holds the sender's equations behind it."""

    receiver: str
    sender: str
    var: Variable
    value: Term
    sig: Term = None
    attested: frozenset = frozenset()

    def __str__(self):
        return f"rcv_att({self.receiver}, {self.sender}, {self.var}:{self.value})"


@dataclass(frozen=True)
class VerAttL:
    comp: str
    var: Variable | None
    value: Term
    attester: str | None = None
    attested: frozenset = frozenset()

    def __str__(self):
        return f"ver_att({self.comp}, {self.var}:{self.value})"


@dataclass(frozen=True)
class CheckL:
    comp: str
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"check({self.comp}, {self.lhs} = {self.rhs})"


@dataclass(frozen=True)
class CompL:
    comp: str
    var: Variable
    rhs: Term

    def __str__(self):
        return f"comp({self.comp}, {self.var}:{self.rhs})"


@dataclass(frozen=True)
class ErrorL:
    comp: str

    def __str__(self):
        return f"error({self.comp})"


@dataclass(frozen=True)
class TauL:
    """Silent step.  Signing steps and internal syncs still bind `var` locally."""

    comp: str
    var: Variable | None = None
    value: Term | None = None

    def __str__(self):
        return "tau"


Label = HasL | RcvL | RcvAttL | VerAttL | CheckL | CompL | ErrorL | TauL


def label_components(label) -> set[str]:
    if isinstance(label, (RcvL, RcvAttL)):
        return {label.receiver, label.sender}
    return {label.comp}


def format_trace(trace) -> str:
    return "<" + ", ".join(str(lab) for lab in trace) + ">"


# -- runtime configurations --------------------------------------------------


def _pkey(p):
    return repr(p)


@dataclass(frozen=True)
class Thread:
    process: object
    env: tuple = ()  # sorted (Variable, value) pairs

    def lookup(self):
        return dict(self.env)

    def key(self):
        return (_pkey(self.process), tuple((v.ident, term_key(t)) for v, t in self.env))


@dataclass(frozen=True)
class RuntimeComponent:
    id: str
    trusts: frozenset
    threads: tuple = ()
    defs: tuple = ()      # (Variable, syntactic rhs) from computation steps
    origins: tuple = ()   # (Variable, (sender, attested equations)) from attested receptions
    errored: bool = False

    def defs_map(self):
        return dict(self.defs)

    def origins_map(self):
        return dict(self.origins)


@dataclass(frozen=True)
class Config:
    comps: tuple
    theory: EquationalTheory = field(default=None, compare=False, hash=False, repr=False)

    def component(self, ident):
        for c in self.comps:
            if c.id == ident:
                return c
        raise KeyError(ident)

    def replace(self, *updated):
        table = {c.id: c for c in updated}
        return Config(tuple(table.get(c.id, c) for c in self.comps), self.theory)


def _sorted_pairs(d: dict) -> tuple:
    return tuple(sorted(d.items(), key=lambda kv: kv[0].ident))


def _split(process, env) -> list:
    """Flatten parallel composition and drop finished threads."""
    if isinstance(process, Nil):
        return []
    if isinstance(process, Par):
        return _split(process.left, env) + _split(process.right, env)
    if isinstance(process, Restrict):
        return _split(process.body, env)
    return [Thread(process, env)]


def _norm_threads(threads) -> tuple:
    return tuple(sorted(threads, key=Thread.key))


# -- initialisation: renaming of restricted names ------------------------------


def _rename_process(p, ren):
    if not ren:
        return p
    r = lambda t: rename_names(t, ren)  # noqa: E731
    if isinstance(p, Nil):
        return p
    if isinstance(p, Send):
        return Send(p.channel, r(p.payload), _rename_process(p.cont, ren))
    if isinstance(p, SendAtt):
        return SendAtt(p.channel, r(p.msg), r(p.sig), _rename_process(p.cont, ren))
    if isinstance(p, Recv):
        return Recv(p.channel, p.var, _rename_process(p.cont, ren))
    if isinstance(p, RecvAtt):
        return RecvAtt(p.channel, p.msg_var, p.sig_var, _rename_process(p.cont, ren))
    if isinstance(p, Par):
        return Par(_rename_process(p.left, ren), _rename_process(p.right, ren))
    if isinstance(p, Restrict):
        inner = {k: v for k, v in ren.items() if k != p.name}
        return Restrict(p.name, _rename_process(p.body, inner))
    if isinstance(p, Let):
        return Let(p.var, r(p.rhs), _rename_process(p.body, ren), p.fresh)
    if isinstance(p, If):
        return If(r(p.lhs), r(p.rhs), _rename_process(p.then, ren))
    raise TypeError(p)


class _Renamer:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counter = count(1)

    def fresh(self, name):
        if name not in self.taken:
            self.taken.add(name)
            return name
        while True:
            candidate = f"{name}'{next(self.counter)}"
            if candidate not in self.taken:
                self.taken.add(candidate)
                return candidate

    def process(self, p, ren):
        """Rename restricted names apart and strip the restrictions."""
        if isinstance(p, Restrict):
            new = self.fresh(p.name)
            return self.process(p.body, {**ren, p.name: new})
        if isinstance(p, Par):
            return Par(self.process(p.left, ren), self.process(p.right, ren))
        if isinstance(p, Nil):
            return p
        head = _rename_process(_shallow(p), ren)
        children = [self.process(c, ren) for c in _conts(p)]
        return _with_conts(head, children)

    def system(self, s, ren, out):
        if isinstance(s, RestrictS):
            new = self.fresh(s.name)
            self.system(s.body, {**ren, s.name: new}, out)
        elif isinstance(s, ParS):
            self.system(s.left, ren, out)
            self.system(s.right, ren, out)
        elif isinstance(s, Single):
            c = s.component
            out.append((c, self.process(_rename_process(c.body, ren), {})))


def _conts(p):
    if isinstance(p, (Send, SendAtt, Recv, RecvAtt)):
        return [p.cont]
    if isinstance(p, Let):
        return [p.body]
    if isinstance(p, If):
        return [p.then]
    return []


def _shallow(p):
    return _with_conts(p, [Nil()] * len(_conts(p)))


def _with_conts(p, children):
    if isinstance(p, Send):
        return Send(p.channel, p.payload, children[0])
    if isinstance(p, SendAtt):
        return SendAtt(p.channel, p.msg, p.sig, children[0])
    if isinstance(p, Recv):
        return Recv(p.channel, p.var, children[0])
    if isinstance(p, RecvAtt):
        return RecvAtt(p.channel, p.msg_var, p.sig_var, children[0])
    if isinstance(p, Let):
        return Let(p.var, p.rhs, children[0], p.fresh)
    if isinstance(p, If):
        return If(p.lhs, p.rhs, children[0])
    return p


def initial_config(s, theory: EquationalTheory | None = None) -> Config:
    theory = theory or builtin_theory()
    if isinstance(s, EmptySystem):
        return Config((), theory)
    renamer = _Renamer(free_names(s))
    pairs = []
    renamer.system(s, {}, pairs)
    comps = [RuntimeComponent(c.id, c.trusts, _norm_threads(_split(body, ()))) for c, body in pairs]
    comps.sort(key=lambda c: c.id)
    return Config(tuple(comps), theory)


# -- one-step reduction ---------------------------------------------------------


def _eval(t, env, theory):
    return theory.normal_form(substitute(t, dict(env)))


def _extend(env, var, value):
    d = dict(env)
    d[var] = value
    return _sorted_pairs(d)


def _attested(defs: dict, var) -> frozenset:
    """`var = def` plus every definition it depends on, transitively."""
    if not isinstance(var, Variable) or var not in defs:
        return frozenset()
    out, todo = set(), [var]
    while todo:
        v = todo.pop()
        rhs = defs.get(v)
        if rhs is None or (v, rhs) in out:
            continue
        out.add((v, rhs))
        todo.extend(variables(rhs))
    return frozenset(out)


def _with_thread_replaced(comp, index, new_threads, **changes):
    threads = list(comp.threads[:index]) + list(comp.threads[index + 1:]) + list(new_threads)
    fields = dict(id=comp.id, trusts=comp.trusts, threads=_norm_threads(threads), defs=comp.defs,
                  origins=comp.origins, errored=comp.errored)
    fields.update(changes)
    return RuntimeComponent(**fields)


def _killed(comp):
    return RuntimeComponent(comp.id, comp.trusts, (), comp.defs, comp.origins, True)


def _local_steps(comp, theory):
    for i, th in enumerate(comp.threads):
        p, env = th.process, th.env
        if isinstance(p, Let):
            value = _eval(p.rhs, env, theory)
            cont = _split(p.body, _extend(env, p.var, value))
            if isinstance(p.rhs, (Name, ComponentId)):
                yield HasL(comp.id, p.var, value), _with_thread_replaced(comp, i, cont)
            elif isinstance(p.rhs, FunApp) and p.rhs.symbol in (SIGN, CHECKSIGN):
                yield TauL(comp.id, p.var, value), _with_thread_replaced(comp, i, cont)
            else:
                defs = comp.defs_map()
                defs[p.var] = p.rhs
                yield CompL(comp.id, p.var, p.rhs), _with_thread_replaced(comp, i, cont, defs=_sorted_pairs(defs))
        elif isinstance(p, If):
            left, right = _eval(p.lhs, env, theory), _eval(p.rhs, env, theory)
            if left != right:
                yield ErrorL(comp.id), _killed(comp)
                continue
            cont = _split(p.then, env)
            if isinstance(p.rhs, FunApp) and p.rhs.symbol == CHECKSIGN:
                var = p.lhs if isinstance(p.lhs, Variable) else None
                attester, eqs = comp.origins_map().get(var, (None, frozenset()))
                yield VerAttL(comp.id, var, left, attester, eqs), _with_thread_replaced(comp, i, cont)
            else:
                yield CheckL(comp.id, p.lhs, p.rhs), _with_thread_replaced(comp, i, cont)


def _outputs(comp):
    for i, th in enumerate(comp.threads):
        if isinstance(th.process, (Send, SendAtt)):
            yield i, th


def _inputs(comp):
    for i, th in enumerate(comp.threads):
        if isinstance(th.process, (Recv, RecvAtt)):
            yield i, th


def _matches(out_p, in_p):
    if out_p.channel != in_p.channel:
        return False
    return (isinstance(out_p, Send) and isinstance(in_p, Recv)) or (
        isinstance(out_p, SendAtt) and isinstance(in_p, RecvAtt))


def _receive(in_th, out_th, theory):
    """Continuation threads of the receiver plus (var, value, sig) of the transfer."""
    out_p, in_p = out_th.process, in_th.process
    if isinstance(out_p, Send):
        value = _eval(out_p.payload, out_th.env, theory)
        env = _extend(in_th.env, in_p.var, value)
        return _split(in_p.cont, env), in_p.var, value, None
    value = _eval(out_p.msg, out_th.env, theory)
    sig = _eval(out_p.sig, out_th.env, theory)
    env = _extend(_extend(in_th.env, in_p.msg_var, value), in_p.sig_var, sig)
    return _split(in_p.cont, env), in_p.msg_var, value, sig


def enabled_steps(s, theory: EquationalTheory | None = None) -> list:
    """All (label, successor config) pairs, in a deterministic order."""
    cfg = s if isinstance(s, Config) else initial_config(s, theory)
    theory = theory or cfg.theory or builtin_theory()
    steps = []
    live = [c for c in cfg.comps if not c.errored]
    for comp in live:
        for label, new in _local_steps(comp, theory):
            steps.append((label, cfg.replace(new)))
    # communication inside one component
    for comp in live:
        for oi, out_th in _outputs(comp):
            for ii, in_th in _inputs(comp):
                if not _matches(out_th.process, in_th.process):
                    continue
                cont, var, value, _ = _receive(in_th, out_th, theory)
                rest = [t for k, t in enumerate(comp.threads) if k not in (oi, ii)]
                new_threads = rest + _split(out_th.process.cont, out_th.env) + cont
                new = RuntimeComponent(comp.id, comp.trusts, _norm_threads(new_threads), comp.defs,
                                       comp.origins, comp.errored)
                steps.append((TauL(comp.id, var, value), cfg.replace(new)))
    # communication across components
    for sender in live:
        for oi, out_th in _outputs(sender):
            for receiver in live:
                if receiver.id == sender.id:
                    continue
                for ii, in_th in _inputs(receiver):
                    if not _matches(out_th.process, in_th.process):
                        continue
                    cont, var, value, sig = _receive(in_th, out_th, theory)
                    new_sender = _with_thread_replaced(sender, oi, _split(out_th.process.cont, out_th.env))
                    if sig is None:
                        label = RcvL(receiver.id, sender.id, var, value)
                        new_receiver = _with_thread_replaced(receiver, ii, cont)
                    else:
                        eqs = _attested(sender.defs_map(), out_th.process.msg)
                        label = RcvAttL(receiver.id, sender.id, var, value, sig, eqs)
                        origins = receiver.origins_map()
                        origins[var] = (sender.id, eqs)
                        new_receiver = _with_thread_replaced(receiver, ii, cont, origins=_sorted_pairs(origins))
                    steps.append((label, cfg.replace(new_sender, new_receiver)))
    steps.sort(key=lambda st: (str(st[0]), repr(st[0])))
    return steps


# -- exhaustive enumeration -------------------------------------------------------


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise StateSpaceBudgetExceeded(f"state-space budget of {self.limit} nodes exhausted")


def all_traces(s, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES) -> set[tuple]:
    """Every maximal label trace of `s`, as a set of tuples."""
    cfg = s if isinstance(s, Config) else initial_config(s, theory)
    budget = _Budget(max_nodes)
    memo: dict = {}

    def suffixes(c):
        hit = memo.get(c)
        if hit is not None:
            return hit
        budget.tick()
        steps = enabled_steps(c, theory)
        if not steps:
            result = frozenset({()})
        else:
            acc = set()
            for label, nxt in steps:
                for tail in suffixes(nxt):
                    acc.add((label,) + tail)
            result = frozenset(acc)
        memo[c] = result
        return result

    return set(suffixes(cfg))


def sorted_traces(traces) -> list[tuple]:
    return sorted(traces, key=lambda tr: [str(lab) for lab in tr] + [repr(tr)])


def reachable_configs(s, theory: EquationalTheory | None = None, max_nodes: int = DEFAULT_MAX_NODES) -> set:
    cfg = s if isinstance(s, Config) else initial_config(s, theory)
    budget = _Budget(max_nodes)
    seen, todo = {cfg}, [cfg]
    while todo:
        c = todo.pop()
        budget.tick()
        for _, nxt in enabled_steps(c, theory):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen
