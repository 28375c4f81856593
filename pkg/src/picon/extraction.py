"""Extraction of the architecture realized by a protocol's trace set."""

from __future__ import annotations

from dataclasses import dataclass, field

from .arch import (Architecture, Attest, AVar, CheckRel, Compute, HasArch, Receive, Trust, VerifAttest,
                   from_term)
from .calculus import components, initial_trust
from .config import DEFAULT_MAX_NODES
from .reduction import CheckL, CompL, HasL, RcvAttL, RcvL, VerAttL, all_traces, sorted_traces
from .terms import FunApp, Variable
from .theory import ATTESTATION_SYMBOLS


def avar(v: Variable) -> AVar:
    return AVar(v.ident)


def attest_of(sender: str, attested) -> Attest:
    return Attest(sender, frozenset((avar(v), from_term(t)) for v, t in attested))


@dataclass
class ExtractionContext:
    relations: set = field(default_factory=set)

    def copy(self) -> ExtractionContext:
        return ExtractionContext(set(self.relations))


def extract_label(label, ctx: ExtractionContext) -> ExtractionContext:
    """Add the relation (if any) that `label` realizes; mutates and returns ctx."""
    rels = ctx.relations
    if isinstance(label, HasL):
        rels.add(HasArch(label.comp, avar(label.var)))
    elif isinstance(label, RcvL):
        rels.add(Receive(label.receiver, label.sender, frozenset(), avar(label.var)))
    elif isinstance(label, RcvAttL):
        att = attest_of(label.sender, label.attested)
        guarded = bool(att.equations) and all(
            Compute(label.sender, v, t) in rels for v, t in att.equations)
        atts = frozenset({att}) if guarded else frozenset()
        rels.add(Receive(label.receiver, label.sender, atts, avar(label.var)))
    elif isinstance(label, CompL):
        if not (isinstance(label.rhs, FunApp) and label.rhs.symbol in ATTESTATION_SYMBOLS):
            rels.add(Compute(label.comp, avar(label.var), from_term(label.rhs)))
    elif isinstance(label, CheckL):
        rels.add(CheckRel(label.comp, from_term(label.lhs), from_term(label.rhs)))
    elif isinstance(label, VerAttL):
        if label.var is None or label.attester is None or not label.attested:
            return ctx
        att = attest_of(label.attester, label.attested)
        received = Receive(label.comp, label.attester, frozenset({att}), avar(label.var))
        if Trust(label.comp, label.attester) in rels and received in rels:
            rels.add(VerifAttest(label.comp, att))
    return ctx


def extract_from_traces(traces, init: set) -> set:
    """Fold every trace into the relation set, repeating until nothing new appears."""
    ctx = ExtractionContext(set(init))
    ordered = sorted_traces(traces)
    while True:
        before = len(ctx.relations)
        for trace in ordered:
            for label in trace:
                extract_label(label, ctx)
        if len(ctx.relations) == before:
            return ctx.relations


def extract_architecture(s, theory=None, max_nodes: int = DEFAULT_MAX_NODES, name: str = "A_S",
                         var_types: dict | None = None) -> Architecture:
    traces = all_traces(s, theory, max_nodes)
    relations = extract_from_traces(traces, set(initial_trust(s)))
    comps = tuple(sorted(c.id for c in components(s)))
    return Architecture(name, comps, frozenset(relations), {}, dict(var_types or {}), {}, theory)


def extract_protocol(protocol, max_nodes: int = DEFAULT_MAX_NODES) -> Architecture:
    return extract_architecture(protocol.system, protocol.theory, max_nodes, f"A_{protocol.name}",
                                protocol.var_types)
