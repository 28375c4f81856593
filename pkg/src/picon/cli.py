"""Command-line driver: ``picon traces|states|extract|eval|check``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .calculus import Protocol, parse_protocol
from .config import (DEFAULT_DEPTH, DEFAULT_MAX_NODES, DEFAULT_REWRITE_BUDGET, DEFAULT_SEARCH_BUDGET,
                     RunConfig)
from .conformance import check_conformance, check_simulation
from .errors import BudgetExceeded, ParseError, PiconError
from .extraction import extract_protocol
from .logic import ArchModel, SysModel
from .pal import format_architecture, parse_architecture
from .reduction import all_traces, format_trace, sorted_traces
from .state import state_semantics, state_to_json
from .syntax import tokenize
from .theory import EquationalTheory, parse_theory

EXIT_OK, EXIT_FALSE, EXIT_BUDGET, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _range_arg(text):
    name, sep, value = text.partition("=")
    if not sep or not name or not value.isdigit() or int(value) < 1:
        raise argparse.ArgumentTypeError(f"expected NAME=N with N >= 1, got {text!r}")
    return name, int(value)


def _positive(text):
    if not text.isdigit() or int(text) < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(text)


def _natural(text):
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "pal"], default="text",
                        help="output format (pal only applies to extract)")
    common.add_argument("--max-nodes", type=_positive, default=None,
                        help=f"state-space budget in nodes (default {DEFAULT_MAX_NODES}, or $PICON_BUDGET)")
    common.add_argument("--depth", type=_natural, default=DEFAULT_DEPTH,
                        help=f"deduction depth bound (default {DEFAULT_DEPTH})")
    common.add_argument("--rewrite-budget", type=_positive, default=DEFAULT_REWRITE_BUDGET,
                        help=f"rewrite steps per normalisation (default {DEFAULT_REWRITE_BUDGET})")
    common.add_argument("--search-budget", type=_positive, default=DEFAULT_SEARCH_BUDGET,
                        help=f"mapping search steps (default {DEFAULT_SEARCH_BUDGET})")
    common.add_argument("--range", dest="ranges", type=_range_arg, action="append", default=[],
                        metavar="NAME=N", help="override an architecture range or parameter (default r=1)")
    common.add_argument("--theory", type=Path, default=None, help="extra equational theory file")

    parser = _Parser(prog="picon", description="Protocol/architecture conformance checker.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("traces", parents=[common], help="list all maximal label traces of a protocol")
    p.add_argument("file", type=Path)
    p = sub.add_parser("states", parents=[common], help="list the reachable knowledge states of a protocol")
    p.add_argument("file", type=Path)
    p = sub.add_parser("extract", parents=[common], help="extract the architecture a protocol realizes")
    p.add_argument("file", type=Path)
    p = sub.add_parser("eval", parents=[common], help="evaluate a named property of a protocol or architecture")
    p.add_argument("file", type=Path)
    p.add_argument("--property", required=True, help="property name declared in the file")
    p = sub.add_parser("check", parents=[common], help="check conformance of a protocol to an architecture")
    p.add_argument("protocol", type=Path)
    p.add_argument("architecture", type=Path)
    p.add_argument("--mode", choices=["strong", "weak"], default="strong")
    p.add_argument("--strict-subset", action="store_true", help="weak mode: require a proper superset")
    p.add_argument("--bisim", action="store_true", help="also report the state (bi)simulation check")
    return parser


def _config(args) -> RunConfig:
    kwargs = dict(rewrite_budget=args.rewrite_budget, depth=args.depth, search_budget=args.search_budget,
                  ranges=dict(args.ranges), output_format=args.format,
                  strict_subset=getattr(args, "strict_subset", False))
    if args.max_nodes is not None:
        kwargs["max_nodes"] = args.max_nodes
    return RunConfig.from_env(**kwargs)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _merge(base: EquationalTheory, extra: EquationalTheory | None, budget: int) -> EquationalTheory:
    if extra is None:
        return base.with_budget(budget)
    sigs = dict(extra.signatures)
    sigs.update(base.signatures)
    return EquationalTheory(base.user_rules + extra.user_rules, sigs, base.types | extra.types, budget)


def _extra_theory(args):
    return parse_theory(_read(args.theory)) if args.theory else None


def load_protocol(path: Path, cfg: RunConfig, extra=None) -> Protocol:
    p = parse_protocol(_read(path))
    p.theory = _merge(p.theory, extra, cfg.rewrite_budget)
    return p


def load_architecture(path: Path, cfg: RunConfig, extra=None):
    a = parse_architecture(_read(path), cfg.ranges)
    return a.__class__(a.name, a.components, a.relations, a.ranges, a.var_types, a.properties,
                       _merge(a.theory, extra, cfg.rewrite_budget))


def _is_architecture(source: str) -> bool:
    toks = tokenize(source)
    return bool(toks) and toks[0].text == "architecture"


def _emit(obj, cfg: RunConfig, out):
    if cfg.output_format == "json":
        out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    else:
        out.write(obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, indent=2) + "\n")


def cmd_traces(args, cfg, out):
    p = load_protocol(args.file, cfg, _extra_theory(args))
    traces = sorted_traces(all_traces(p.system, p.theory, cfg.max_nodes))
    if cfg.output_format == "json":
        _emit({"traces": [[str(lab) for lab in tr] for tr in traces]}, cfg, out)
    else:
        out.write("".join(format_trace(tr) + "\n" for tr in traces))
    return EXIT_OK


def cmd_states(args, cfg, out):
    p = load_protocol(args.file, cfg, _extra_theory(args))
    states = [state_to_json(g) for g in state_semantics(p.system, p.theory, cfg.max_nodes)]
    states.sort(key=lambda d: json.dumps(d, sort_keys=True))
    _emit({"states": states} if cfg.output_format == "json" else json.dumps({"states": states}, sort_keys=True,
                                                                            indent=2) + "\n", cfg, out)
    return EXIT_OK


def _arch_json(a):
    return {"name": a.name, "components": sorted(a.components), "relations": sorted(str(r) for r in a.relations)}


def cmd_extract(args, cfg, out):
    p = load_protocol(args.file, cfg, _extra_theory(args))
    a = extract_protocol(p, cfg.max_nodes)
    if cfg.output_format == "json":
        _emit(_arch_json(a), cfg, out)
    else:
        out.write(format_architecture(a))
    return EXIT_OK


def cmd_eval(args, cfg, out):
    source = _read(args.file)
    extra = _extra_theory(args)
    if _is_architecture(source):
        target = load_architecture(args.file, cfg, extra)
        props = target.properties
        model = lambda: ArchModel(target, None, cfg.max_nodes, cfg.depth)  # noqa: E731
    else:
        p = load_protocol(args.file, cfg, extra)
        props = p.properties
        model = lambda: SysModel(p.system, p.theory, cfg.max_nodes, cfg.depth)  # noqa: E731
    if args.property not in props:
        known = ", ".join(sorted(props)) or "none"
        raise UsageError(f"unknown property {args.property!r} (declared: {known})")
    formula = props[args.property]
    value = model().holds(formula)
    if cfg.output_format == "json":
        _emit({"property": args.property, "formula": str(formula), "value": value}, cfg, out)
    else:
        out.write(f"{args.property} = {formula}: {'true' if value else 'false'}\n")
    return EXIT_OK if value else EXIT_FALSE


def cmd_check(args, cfg, out):
    extra = _extra_theory(args)
    p = load_protocol(args.protocol, cfg, extra)
    a = load_architecture(args.architecture, cfg, extra)
    verdict = check_conformance(p, a, args.mode, cfg.strict_subset, cfg.max_nodes, cfg.search_budget, cfg.depth)
    report = verdict.to_json()
    if args.bisim and verdict.witness is not None:
        report["bisimulation" if args.mode == "strong" else "simulation"] = check_simulation(
            p, a, verdict.witness, bisim=args.mode == "strong", max_nodes=cfg.max_nodes)
    if cfg.output_format == "json":
        _emit(report, cfg, out)
    else:
        lines = [f"{args.mode} conformance: {'holds' if verdict.holds else 'does not hold'}"]
        if verdict.witness is not None:
            for section, table in verdict.witness.to_json().items():
                for k, v in table.items():
                    lines.append(f"  {section[:-1] if section != 'variables' else 'variable'} {k} -> {v}")
        for r in report["missing"]:
            lines.append(f"  missing: {r}")
        for r in report["extra"]:
            lines.append(f"  extra: {r}")
        for r in report["hasnone_violations"]:
            lines.append(f"  hasnone violated: {r}")
        for key in ("bisimulation", "simulation"):
            if key in report:
                lines.append(f"  {key}: {'holds' if report[key] else 'fails'}")
        out.write("\n".join(lines) + "\n")
    return EXIT_OK if verdict.holds else EXIT_FALSE


COMMANDS = {"traces": cmd_traces, "states": cmd_states, "extract": cmd_extract, "eval": cmd_eval,
            "check": cmd_check}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        if cfg.output_format == "pal" and args.command != "extract":
            raise UsageError("--format pal only applies to extract")
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        err.write(f"picon: error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"picon: parse error: {exc}\n")
        return EXIT_PARSE
    except BudgetExceeded as exc:
        err.write(f"picon: budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (PiconError, ValueError) as exc:
        err.write(f"picon: error: {exc}\n")
        return EXIT_BUDGET


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
