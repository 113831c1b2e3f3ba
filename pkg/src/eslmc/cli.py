"""Command-line front end: ``eslmc check | validate | info | qptl-sat``.

Exit codes: 0 true/SAT, 1 false/UNSAT, 2 usage or input error, 3 cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import formula as f
from .checker import EXISTENTIAL, UNIVERSAL, build_report, model_check, render_json, render_text
from .errors import EslmcError, ModelValidationError, SearchSpaceExceeded
from .evaluator import EvalConfig
from .model import load_model
from .parser import parse_formula
from .qptl import (
    CAP_EXCEEDED,
    SAT,
    parse_qptl,
    pretty_qptl,
    propositions,
    qptl_alternation,
    qptl_sat,
    translate,
)
from .strategy import MODES, PERFECT, UNIFORM, default_cap, format_state, strategy_space

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR, EXIT_CAP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eslmc", description="Epistemic Strategy Logic model checker.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="decide a formula on a model")
    check.add_argument("--model", required=True)
    src = check.add_mutually_exclusive_group(required=True)
    src.add_argument("--formula")
    src.add_argument("--formula-file")
    check.add_argument("--recall", type=_positive, default=1)
    check.add_argument("--mode", choices=MODES, default=PERFECT)
    check.add_argument("--closure", choices=(EXISTENTIAL, UNIVERSAL), default=EXISTENTIAL)
    check.add_argument("--witness", action="store_true", help="report witness strategies")
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--cap", type=_positive, default=None)
    check.add_argument("--jobs", type=_positive, default=1)
    check.add_argument("--timing", action="store_true", help="include search statistics")

    val = sub.add_parser("validate", help="validate a model file")
    val.add_argument("--model", required=True)

    info = sub.add_parser("info", help="reachable states and strategy counts")
    info.add_argument("--model", required=True)
    info.add_argument("--recall", type=_positive, default=1)
    info.add_argument("--format", choices=("text", "json"), default="text")
    info.add_argument("--jobs", type=_positive, default=1)

    q = sub.add_parser("qptl-sat", help="QPTL satisfiability through the strategy reduction")
    q.add_argument("--formula", required=True)
    q.add_argument("--props", help="comma-separated proposition order (default: order of appearance)")
    q.add_argument("--recall", type=_positive, default=1)
    q.add_argument("--format", choices=("text", "json"), default="text")
    q.add_argument("--cap", type=_positive, default=None)
    q.add_argument("--jobs", type=_positive, default=1)
    return p


def _cmd_check(args) -> int:
    model = load_model(args.model)
    if args.formula_file:
        with open(args.formula_file, encoding="utf-8") as fh:
            text = fh.read().strip()
    else:
        text = args.formula
    phi = parse_formula(text, model.names)
    cfg = EvalConfig(
        recall=args.recall,
        mode=args.mode,
        cap=args.cap if args.cap is not None else default_cap(),
    )
    verdict = model_check(model, phi, cfg, closure=args.closure, witness=args.witness, jobs=args.jobs)
    doc = build_report(model, phi, cfg, args.closure, verdict, timing=args.timing)
    sys.stdout.write(render_json(doc) if args.format == "json" else render_text(doc))
    return EXIT_TRUE if verdict.result else EXIT_FALSE


def _cmd_validate(args) -> int:
    model = load_model(args.model)
    print(model.summary())
    return EXIT_TRUE


def info_report(model, recall: int) -> dict:
    perfect = strategy_space(model, recall, PERFECT)
    uniform = strategy_space(model, recall, UNIFORM)
    return {
        "model": {
            "agents": len(model.agents),
            "reachable_states": len(model.reachable),
            "edges": len(model.edges),
        },
        "states": [format_state(s) for s in model.reachable],
        "recall": recall,
        "windows": len(perfect.windows),
        "strategies": {
            a.name: {
                PERFECT: perfect.space_size(i),
                UNIFORM: uniform.space_size(i),
            }
            for i, a in enumerate(model.agents)
        },
    }


def _cmd_info(args) -> int:
    model = load_model(args.model)
    doc = info_report(model, args.recall)
    if args.format == "json":
        sys.stdout.write(render_json(doc))
        return EXIT_TRUE
    print(model.summary())
    print("states:")
    for s in doc["states"]:
        print(f"  {s}")
    print(f"recall {args.recall}: {doc['windows']} windows")
    for name, counts in doc["strategies"].items():
        print(f"strategies {name}: perfect {counts[PERFECT]}, uniform {counts[UNIFORM]}")
    return EXIT_TRUE


def _cmd_qptl(args) -> int:
    phi = parse_qptl(args.formula)
    props = [p.strip() for p in args.props.split(",")] if args.props else propositions(phi)
    res = qptl_sat(phi, args.recall, props=props, cap=args.cap, jobs=args.jobs)
    doc = {
        "formula": pretty_qptl(phi),
        "props": list(res.props),
        "recall": args.recall,
        "alternation": {
            "qptl": qptl_alternation(phi),
            "esl": f.alternation_depth(translate(phi, res.props)),
        },
        "result": res.status,
        "verdict": res.describe(),
        "certified": res.certified,
        "evaluation": res.evaluation.render() if res.evaluation else None,
        "witnesses": {
            v: {"agent": s.agent, "recall": s.recall, "table": s.lines()}
            for v, s in (res.witnesses or {}).items()
        },
    }
    if args.format == "json":
        sys.stdout.write(render_json(doc))
    else:
        print(f"formula: {doc['formula']}")
        print(f"props: {', '.join(doc['props'])}")
        print(f"alternation: qptl {doc['alternation']['qptl']}, esl {doc['alternation']['esl']}")
        print(f"result: {doc['verdict']}")
        for p, word in (doc["evaluation"] or {}).items():
            print(f"  {p}: {word}")
        if res.status == CAP_EXCEEDED:
            print(res.detail, file=sys.stderr)
    if res.status == SAT:
        return EXIT_TRUE
    return EXIT_CAP if res.status == CAP_EXCEEDED else EXIT_FALSE


_COMMANDS = {
    "check": _cmd_check,
    "validate": _cmd_validate,
    "info": _cmd_info,
    "qptl-sat": _cmd_qptl,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    try:
        return _COMMANDS[args.command](args)
    except SearchSpaceExceeded as exc:
        print(f"eslmc: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ModelValidationError as exc:
        print(f"eslmc: invalid model: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (EslmcError, OSError, json.JSONDecodeError) as exc:
        print(f"eslmc: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
