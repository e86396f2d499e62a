"""Command-line interface: ``lamsem <command> ...``."""

from __future__ import annotations

import argparse
import sys
import threading
from typing import Optional, Sequence

from .. import bigstep, denot, machine, smallstep, types
from ..syntax import ParseError, parse, show, to_debruijn
from .check import Budget
from .gen import MODES, GenConfig
from .suite import dumps, run_suite

# deep terms recurse deeply in the evaluators; run in a thread with a big stack
STACK_SIZE = 1 << 29


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamsem", description="Semantics workbench for call-by-value lambda-calculus.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("reduce", help="small-step reduction")
    c.add_argument("term")
    c.add_argument("--limit", type=int, default=smallstep.DEFAULT_LIMIT)
    c.add_argument("--trace", action="store_true", help="print every reduct, one per line")

    c = sub.add_parser("eval", help="fuelled big-step evaluation")
    c.add_argument("term")
    c.add_argument("--fuel", type=int, default=bigstep.DEFAULT_FUEL)
    c.add_argument("--trace", action="store_true", help="print the evaluation trace")

    c = sub.add_parser("coeval", help="coevaluation approximant")
    c.add_argument("term")
    c.add_argument("value")
    c.add_argument("--depth", type=int, default=200)
    c.add_argument("--fuel", type=int, default=bigstep.DEFAULT_FUEL)

    c = sub.add_parser("diverges", help="divergence approximant")
    c.add_argument("term")
    c.add_argument("--depth", type=int, default=200)
    c.add_argument("--fuel", type=int, default=bigstep.DEFAULT_FUEL)

    c = sub.add_parser("denot", help="depth-indexed denotation")
    c.add_argument("term")
    c.add_argument("--depth", type=int, required=True)

    c = sub.add_parser("typecheck", help="principal type")
    c.add_argument("term")

    c = sub.add_parser("compile", help="machine code listing")
    c.add_argument("term")
    c.add_argument("--nop", action="store_true", help="prefix applications with Nop")

    c = sub.add_parser("run", help="compile and run on the machine")
    c.add_argument("term")
    c.add_argument("--limit", type=int, default=10_000)
    c.add_argument("--nop", action="store_true", help="prefix applications with Nop")
    c.add_argument("--dump-states", action="store_true", help="print every machine state")

    c = sub.add_parser("fuzz", help="differential testing on generated terms")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--count", type=int, required=True)
    c.add_argument("--max-size", type=int, required=True)
    c.add_argument("--mode", choices=MODES, required=True)
    c.add_argument("--fuel", type=int, default=Budget.fuel)
    c.add_argument("--limit", type=int, default=Budget.limit)
    c.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    return p


def _reduce(args) -> int:
    a = parse(args.term)
    if args.trace:
        trace, result = smallstep.reduce_with_trace(a, args.limit)
        for t in trace:
            print(show(t))
    else:
        result = smallstep.classify(a, args.limit)
    match result:
        case smallstep.ValueReached(v, n):
            print(show(v))
            print(f"value after {n} steps", file=sys.stderr)
        case smallstep.Stuck(t, n):
            print(show(t))
            print(f"stuck after {n} steps", file=sys.stderr)
            return 1
        case smallstep.StepLimit(t, n):
            print(show(t))
            print(f"no value within {n} steps", file=sys.stderr)
            return 1
    return 0


def _show_outcome(r: bigstep.EvalOutcome) -> int:
    match r:
        case bigstep.Value(v):
            print(show(v))
            return 0
        case bigstep.Wrong(at):
            print(f"wrong at {show(at)}")
        case bigstep.FuelOut():
            print("out of fuel")
    return 1


def _eval(args) -> int:
    a = parse(args.term)
    if args.trace:
        trace, r = bigstep.eval_trace(a, args.fuel)
        for t in trace:
            print(show(t))
    else:
        r = bigstep.eval_fuel(a, args.fuel)
    return _show_outcome(r)


def _coeval(args) -> int:
    holds = bigstep.coeval_approx(parse(args.term), parse(args.value), args.depth, args.fuel)
    print("true" if holds else "false")
    return 0


def _diverges(args) -> int:
    holds = bigstep.diverges_approx(parse(args.term), args.depth, args.fuel)
    print("true" if holds else "false")
    return 0


def _denot(args) -> int:
    print(denot.compute(args.depth, parse(args.term)))
    return 0


def _typecheck(args) -> int:
    try:
        print(types.show_type(types.infer(parse(args.term))))
    except types.IllTyped as e:
        print(f"ill-typed: {e}")
        return 1
    return 0


def _compile(args) -> int:
    for line in machine.show_code(machine.compile(to_debruijn(parse(args.term)), nop=args.nop)):
        print(line)
    return 0


def _run(args) -> int:
    code = machine.compile(to_debruijn(parse(args.term)), nop=args.nop)
    if args.dump_states:
        for s in machine.trace_states(code, args.limit):
            print(machine.show_state(s))
    result = machine.run(code, args.limit)
    match result.final:
        case machine.Halt(state):
            print(" ".join(machine.show_mvalue(v) for v in state.stack))
            print(f"halted after {result.steps} transitions", file=sys.stderr)
            return 0
        case machine.Crash(_, reason):
            print(f"crash: {reason}")
            print(f"after {result.steps} transitions", file=sys.stderr)
        case machine.StepLimit():
            print(f"running after {result.steps} transitions")
    return 1


def _fuzz(args) -> int:
    cfg = GenConfig(args.seed, args.count, args.max_size, args.mode)
    report = run_suite(cfg, Budget(fuel=args.fuel, limit=args.limit))
    if args.json == "-":
        print(dumps(report))
    elif args.json:
        with open(args.json, "w") as f:
            f.write(dumps(report) + "\n")
    summary = report["summary"]
    out = sys.stderr if args.json == "-" else sys.stdout
    print(f"{summary['pass']} passed, {summary['fail']} failed", file=out)
    for name, counts in summary["by_check"].items():
        print(f"  {name}: {counts['pass']} pass, {counts['fail']} fail", file=out)
    return 1 if summary["fail"] else 0


COMMANDS = {
    "reduce": _reduce,
    "eval": _eval,
    "coeval": _coeval,
    "diverges": _diverges,
    "denot": _denot,
    "typecheck": _typecheck,
    "compile": _compile,
    "run": _run,
    "fuzz": _fuzz,
}


def _dispatch(args) -> int:
    try:
        return COMMANDS[args.command](args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
    return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    status = [2]

    def target() -> None:
        status[0] = _dispatch(args)

    threading.stack_size(STACK_SIZE)
    worker = threading.Thread(target=target)
    worker.start()
    worker.join()
    return status[0]


if __name__ == "__main__":
    sys.exit(main())
