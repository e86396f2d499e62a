"""The ten acceptance criteria, each printing one PASS/FAIL line.

Run with pytest, or directly: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
import time
import zlib
from functools import cache

import pytest

from lamsem import bigstep, denot, machine, smallstep, types
from lamsem.bigstep import FuelOut, Value, Wrong
from lamsem.harness.check import Budget, DivergesUpTo, classify_term, preserved_along, random_context
from lamsem.harness.gen import GenConfig, gen_terms
from lamsem.harness.suite import cps_verdict, load_corpus
from lamsem.syntax import OMEGA, Const, Term, is_cps, parse, show, to_debruijn
from lamsem.traces import bisim_to_depth

FUEL = 1000
LIMIT = 10_000
DEPTH = 200
SEED = 20261018


@cache
def any_closed(count: int = 10_000) -> tuple[Term, ...]:
    return tuple(gen_terms(GenConfig(seed=SEED, count=count, max_size=30, mode="any-closed")))


@cache
def cps_terms() -> tuple[Term, ...]:
    return tuple(gen_terms(GenConfig(seed=SEED, count=2000, max_size=30, mode="cps-closed")))


@cache
def typable_terms() -> tuple[Term, ...]:
    return tuple(gen_terms(GenConfig(seed=SEED, count=2000, max_size=30, mode="typable")))


@cache
def corpus() -> tuple[tuple[Term, ...], tuple[Term, ...]]:
    entries, values = load_corpus()
    return tuple(e.term for e in entries), tuple(values)


@cache
def diverging_terms() -> tuple[Term, ...]:
    """Every corpus or generated term classified as diverging."""
    found = []
    seen = set()
    for a in corpus()[0] + any_closed() + cps_terms() + typable_terms():
        if a in seen:
            continue
        seen.add(a)
        if not isinstance(bigstep.eval_fuel(a, FUEL), FuelOut):
            continue
        if isinstance(smallstep.classify(a, LIMIT), smallstep.StepLimit) and bigstep.diverges_approx(a, DEPTH, FUEL):
            found.append(a)
    return tuple(found)


def report(capsys, n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


# -- criteria -------------------------------------------------------------------------


def criterion_1() -> tuple[bool, str]:
    # generation is timed too
    start = time.perf_counter()
    terms = gen_terms(GenConfig(seed=SEED, count=10_000, max_size=30, mode="any-closed"))
    mismatches = 0
    for a in terms:
        r = bigstep.eval_fuel(a, FUEL)
        c = smallstep.classify(a, LIMIT)
        value_big = r.value if isinstance(r, Value) else None
        value_small = c.value if isinstance(c, smallstep.ValueReached) else None
        if value_big is not value_small:
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    return ok, f"{len(terms)} terms, {mismatches} value mismatches, {elapsed:.1f} s (limit 60 s)"


def criterion_2() -> tuple[bool, str]:
    terms = any_closed()[:1000]
    violations = 0
    for a in terms:
        results = [denot.compute(n, a) for n in range(51)]
        for n, r in enumerate(results):
            e = bigstep.eval_fuel(a, n)
            match r:
                case denot.Val(v):
                    good = isinstance(e, Value) and e.value is v
                case denot.Err():
                    good = isinstance(e, Wrong)
                case _:
                    good = isinstance(e, FuelOut)
            violations += not good
        for n in range(51):
            for m in range(n, 51):
                violations += not denot.leq(results[n], results[m])
    return violations == 0, f"{len(terms)} terms x depths 0..50, {violations} violations"


def criterion_3() -> tuple[bool, str]:
    checked = mismatches = 0
    for a in any_closed() + cps_terms() + typable_terms():
        t_big, r = bigstep.eval_trace(a, FUEL)
        if not isinstance(r, Value):
            continue
        checked += 1
        t_small, c = smallstep.reduce_with_trace(a, LIMIT)
        if not (isinstance(c, smallstep.ValueReached) and len(t_big) == len(t_small)
                and all(x is y for x, y in zip(t_big, t_small))):
            mismatches += 1
    return mismatches == 0 and checked > 0, f"{checked} terminating terms, {mismatches} trace mismatches"


def criterion_4() -> tuple[bool, str]:
    terms = diverging_terms()
    failures = 0
    for a in terms:
        try:
            same = bisim_to_depth(bigstep.diverge_trace_stream(a, FUEL), smallstep.reduct_stream(a), DEPTH)
        except bigstep.NotDiverging:
            same = False
        failures += not same
    return failures == 0 and len(terms) > 0, f"{len(terms)} diverging terms, {failures} not bisimilar to depth {DEPTH}"


def criterion_5() -> tuple[bool, str]:
    values = corpus()[1]
    omega_ok = [v for v in values if bigstep.coeval_approx(OMEGA, v, DEPTH, FUEL)]
    const_fun = parse(r"(\x. 0) @omega")
    zero = bigstep.coeval_approx(const_fun, Const(0), DEPTH, FUEL)
    one = bigstep.coeval_approx(const_fun, Const(1), DEPTH, FUEL)
    wrong_arg = parse("@omega (0 0)")
    bad = [v for v in values if bigstep.coeval_approx(wrong_arg, v, DEPTH, FUEL)]
    ok = len(omega_ok) == len(values) >= 5 and zero and not one and not bad
    detail = (
        f"omega coevaluates to {len(omega_ok)}/{len(values)} values; "
        f"(\\x. 0) omega -> 0: {zero}, -> 1: {one}; omega (0 0) coevaluates to {len(bad)} values"
    )
    return ok, detail


def criterion_6() -> tuple[bool, str]:
    terms = cps_terms() + tuple(a for a in corpus()[0] if is_cps(a))
    counts = {"converges": 0, "diverges": 0, "exempt": 0}
    failures = 0
    for b in terms:
        v = cps_verdict(b, Budget(fuel=FUEL, limit=LIMIT, coeval_depth=DEPTH))
        if not v.agreements:
            counts["exempt"] += 1
            continue
        counts["diverges" if isinstance(v.cls, DivergesUpTo) else "converges"] += 1
        failures += not v.ok
    detail = (
        f"{len(terms)} CPS terms ({counts['converges']} converging, {counts['diverges']} diverging, "
        f"{counts['exempt']} going wrong), {failures} failures"
    )
    return failures == 0 and counts["diverges"] > 0, detail


def criterion_7() -> tuple[bool, str]:
    terms = typable_terms() + tuple(a for a in corpus()[0] if types.typable(a))
    stuck = unpreserved = 0
    for a in terms:
        if isinstance(smallstep.classify(a, LIMIT), smallstep.Stuck):
            stuck += 1
        if not preserved_along(a, LIMIT):
            unpreserved += 1
    y_type = types.infer(parse("@Y"))
    y_ok = types.type_equal(y_type, types.parse_type("(('a -> 'b) -> 'a -> 'b) -> 'a -> 'b"))
    try:
        types.infer(parse("0 0"))
        ill = False
    except types.IllTyped:
        ill = True
    ok = stuck == 0 and unpreserved == 0 and y_ok and ill
    detail = (
        f"{len(terms)} typable terms, {stuck} stuck, {unpreserved} with an untypable reduct; "
        f"@Y :: {types.show_type(y_type)}; 0 0 ill-typed: {ill}"
    )
    return ok, detail


def criterion_8() -> tuple[bool, str]:
    a = parse("@Y @F 0")
    typed = types.typable(a)
    cls = classify_term(a, Budget(fuel=FUEL, limit=LIMIT)).cls
    values = corpus()[1]
    coevaluates = [
        (show(v), k) for v in values for k in (3, 4, 10, 50, DEPTH) if bigstep.coeval_approx(a, v, k, FUEL)
    ]
    ok = typed and isinstance(cls, DivergesUpTo) and not coevaluates
    detail = (
        f"@Y @F 0 typable: {typed}, class {type(cls).__name__}, "
        f"coevaluates at depth >= 3 to {len(coevaluates)} of {len(values)} corpus values"
    )
    return ok, detail


def _terminating(count: int) -> list[tuple[Term, machine.SValue]]:
    out = []
    for a in any_closed() + typable_terms() + cps_terms():
        e = machine.env_eval((), to_debruijn(a), FUEL)
        if isinstance(e, Value):
            out.append((a, e.value))
            if len(out) == count:
                break
    return out


def criterion_9() -> tuple[bool, str]:
    pairs = _terminating(5000)
    failures = 0
    for a, v in pairs:
        code = machine.compile(to_debruijn(a))
        mv = machine.compile_value(v)
        rng = random.Random(zlib.crc32(show(a).encode()))
        for _ in range(3):
            suffix, stack = random_context(rng)
            start = machine.MState(code + suffix, stack, ())
            if machine.run_until(start, machine.MState(suffix, (mv,) + stack, ()), LIMIT) is None:
                failures += 1
    example = machine.run(machine.compile(to_debruijn(parse(r"(\x. x) 7"))), 100)
    example_ok = example.steps == 5 and example.final == machine.Halt(machine.MState((), (machine.MConst(7),), ()))
    ok = len(pairs) == 5000 and failures == 0 and example_ok
    detail = (
        f"{len(pairs)} terminating terms x 3 contexts, {failures} failures; "
        f"(\\x. x) 7 halts in {example.steps} transitions"
    )
    return ok, detail


def criterion_10() -> tuple[bool, str]:
    diverging = diverging_terms()
    not_running = 0
    for a in diverging:
        r = machine.run(machine.compile(to_debruijn(a)), LIMIT)
        not_running += not (isinstance(r.final, machine.StepLimit) and r.steps == LIMIT)
    disagreements = 0
    pairs = _terminating(5000)
    for a, v in pairs:
        db = to_debruijn(a)
        plain = machine.run(machine.compile(db), 100 * LIMIT)
        nop = machine.run(machine.compile(db, nop=True), 100 * LIMIT)
        same = (
            isinstance(plain.final, machine.Halt)
            and isinstance(nop.final, machine.Halt)
            and plain.final.state.stack == (machine.compile_value(v),)
            and nop.final.state.stack == (machine.compile_value(v, nop=True),)
        )
        disagreements += not same
    ok = not_running == 0 and disagreements == 0 and len(diverging) > 0
    detail = (
        f"{len(diverging)} diverging terms, {not_running} stopped before {LIMIT} transitions; "
        f"Nop variant disagrees on {disagreements} of {len(pairs)} terminating terms"
    )
    return ok, detail


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    report(capsys, n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, criterion in enumerate(CRITERIA, 1):
        ok, detail = criterion()
        report(None, n, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
