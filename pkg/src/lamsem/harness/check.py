"""Run every semantics on one term and cross-check them."""

from __future__ import annotations

import random
import time
import zlib
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Union

from .. import bigstep, denot, machine, smallstep, types
from ..syntax import BIG_OMEGA, Term, is_cps, show, to_debruijn
from ..traces import bisim_to_depth

DEFAULT_FUEL = 1000
DEFAULT_LIMIT = 10_000
DEFAULT_BISIM_DEPTH = 200
DEFAULT_COEVAL_DEPTH = 200
MACHINE_PAIRS = 3


@dataclass(frozen=True)
class Converges:
    value: Term
    steps: int


@dataclass(frozen=True)
class DivergesUpTo:
    fuel: int


@dataclass(frozen=True)
class GoesWrong:
    stuck: Term


@dataclass(frozen=True)
class Undecided:
    """The semantics did not agree on which of the three cases applies."""

    reason: str


TermClass = Union[Converges, DivergesUpTo, GoesWrong, Undecided]


@dataclass(frozen=True)
class Budget:
    fuel: int = DEFAULT_FUEL
    limit: int = DEFAULT_LIMIT
    bisim_depth: int = DEFAULT_BISIM_DEPTH
    coeval_depth: int = DEFAULT_COEVAL_DEPTH


@dataclass
class Verdict:
    term: str
    cls: TermClass
    agreements: dict[str, bool] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.agreements.values())

    def failures(self) -> list[str]:
        return [name for name, ok in self.agreements.items() if not ok]


class _Timer:
    def __init__(self, timings: dict[str, float]):
        self.timings = timings

    def __call__(self, name: str, fn: Callable, *args):
        start = time.perf_counter()
        try:
            return fn(*args)
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


def random_context(rng: random.Random) -> tuple[machine.Code, tuple[machine.StackSlot, ...]]:
    """An arbitrary code suffix and stack to run compiled code in front of."""

    def value() -> machine.MValue:
        if rng.random() < 0.5:
            return machine.MConst(rng.randint(-5, 5))
        return machine.MClos((machine.IVar(1), machine.IRet()), tuple(
            machine.MConst(rng.randint(0, 3)) for _ in range(rng.randint(0, 2))
        ))

    instrs: list[Callable[[], machine.Instr]] = [
        lambda: machine.IVar(rng.randint(1, 3)),
        lambda: machine.IConst(rng.randint(0, 9)),
        lambda: machine.IClos((machine.IVar(1), machine.IRet())),
        machine.IApp,
        machine.IRet,
    ]
    code = tuple(rng.choice(instrs)() for _ in range(rng.randint(0, 4)))
    stack: list[machine.StackSlot] = []
    for _ in range(rng.randint(0, 3)):
        if rng.random() < 0.3:
            stack.append(machine.Frame(code[: rng.randint(0, len(code))], (value(),)))
        else:
            stack.append(value())
    return code, tuple(stack)


def preserved_along(a: Term, limit: int) -> bool:
    """Every reduct of ``a`` within ``limit`` steps has the type of ``a``."""
    return types.has_type_along(a, types.infer(a), limit)


def classify_term(a: Term, budget: Budget = Budget()) -> Verdict:
    """Run all semantics on the closed term ``a`` and record the cross-checks.

    Disagreements are recorded in ``agreements``; nothing is raised.
    """
    fuel, limit = budget.fuel, budget.limit
    timings: dict[str, float] = {}
    timed = _Timer(timings)
    checks: dict[str, bool] = {}

    ev = timed("bigstep", bigstep.eval_fuel, a, fuel)
    red = timed("smallstep", smallstep.classify, a, limit)
    den = timed("denot", denot.compute, fuel, a)

    # big-step and small-step agree on values and on going wrong
    checks["big_small_value"] = (
        isinstance(ev, bigstep.Value) == isinstance(red, smallstep.ValueReached)
        and (not isinstance(ev, bigstep.Value) or ev.value is red.value)
    )
    checks["big_small_wrong"] = isinstance(ev, bigstep.Wrong) == isinstance(red, smallstep.Stuck)

    expected = {
        bigstep.Value: denot.Val,
        bigstep.Wrong: denot.Err,
        bigstep.FuelOut: denot.Bottom,
    }[type(ev)]
    checks["denot_bigstep"] = isinstance(den, expected) and (
        not isinstance(ev, bigstep.Value) or den.value is ev.value
    )
    half = timed("denot", denot.compute, fuel // 2, a)
    checks["denot_monotone"] = denot.leq(half, den)

    half_ev = timed("bigstep", bigstep.eval_fuel, a, fuel // 2)
    checks["fuel_monotone"] = isinstance(half_ev, bigstep.FuelOut) or half_ev == ev

    diverging = False
    if isinstance(ev, bigstep.FuelOut) and isinstance(red, smallstep.StepLimit):
        diverging = timed("diverges", bigstep.diverges_approx, a, budget.bisim_depth, fuel)

    if isinstance(ev, bigstep.Value) and isinstance(red, smallstep.ValueReached):
        cls: TermClass = Converges(red.value, red.steps)
    elif isinstance(ev, bigstep.Wrong) and isinstance(red, smallstep.Stuck):
        cls = GoesWrong(red.at)
    elif diverging:
        cls = DivergesUpTo(fuel)
    else:
        cls = Undecided(f"big-step {type(ev).__name__}, small-step {type(red).__name__}")

    if isinstance(ev, bigstep.Value):
        checks["exclusive"] = not timed("diverges", bigstep.diverges_approx, a, fuel + 1, fuel)
        k = min(budget.coeval_depth, fuel)
        checks["eval_in_coeval"] = timed("coeval", bigstep.coeval_approx, a, ev.value, k, fuel)

    if isinstance(cls, Converges):
        t_big, _ = timed("traces", bigstep.eval_trace, a, fuel)
        t_small, _ = timed("traces", smallstep.reduce_with_trace, a, limit)
        checks["trace_exact"] = len(t_big) == len(t_small) and all(
            x is y for x, y in zip(t_big, t_small)
        )
    if isinstance(cls, DivergesUpTo):

        def bisim() -> bool:
            try:
                stream = bigstep.diverge_trace_stream(a, fuel)
                return bisim_to_depth(stream, smallstep.reduct_stream(a), budget.bisim_depth)
            except bigstep.NotDiverging:
                return False

        checks["trace_bisim"] = timed("traces", bisim)

    if is_cps(a):
        if isinstance(cls, Converges):
            checks["cps_coeval"] = timed(
                "coeval", bigstep.coeval_approx, a, cls.value, budget.coeval_depth, fuel
            )
        elif isinstance(cls, DivergesUpTo):
            checks["cps_coeval"] = timed(
                "coeval", bigstep.coeval_approx, a, BIG_OMEGA, budget.coeval_depth, fuel
            )

    timed("machine", _machine_checks, a, ev, cls, budget, checks)
    timed("types", _type_checks, a, red, budget, checks)
    return Verdict(show(a), cls, checks, timings)


def _machine_checks(a, ev, cls, budget: Budget, checks: dict[str, bool]) -> None:
    db = to_debruijn(a)
    env_ev = machine.env_eval((), db, budget.fuel)
    same_kind = type(env_ev) is type(ev)
    if isinstance(ev, bigstep.Value) and same_kind:
        same_kind = machine.compile_value(machine.closed_form(env_ev.value)) == machine.compile_value(
            machine.source_value(ev.value)
        )
    checks["closure_eval"] = same_kind

    if isinstance(env_ev, bigstep.Value):
        code = machine.compile(db)
        v = machine.compile_value(env_ev.value)
        rng = random.Random(zlib.crc32(show(a).encode()))
        ok = True
        for _ in range(MACHINE_PAIRS):
            suffix, stack = random_context(rng)
            start = machine.MState(code + suffix, stack, ())
            target = machine.MState(suffix, (v,) + stack, ())
            if machine.run_until(start, target, budget.limit) is None:
                ok = False
        checks["machine_terminating"] = ok

        plain = machine.run(code, budget.limit)
        nop = machine.run(machine.compile(db, nop=True), budget.limit)
        checks["machine_nop"] = (
            isinstance(plain.final, machine.Halt)
            and isinstance(nop.final, machine.Halt)
            and plain.final.state.stack == (v,)
            and nop.final.state.stack == (machine.compile_value(env_ev.value, nop=True),)
            and nop.steps == plain.steps + plain.applications
        )
    if isinstance(cls, DivergesUpTo):
        result = machine.run(machine.compile(db), budget.limit)
        checks["machine_diverging"] = isinstance(result.final, machine.StepLimit)


def _type_checks(a, red, budget: Budget, checks: dict[str, bool]) -> None:
    if not types.typable(a):
        return
    checks["type_soundness"] = not isinstance(red, smallstep.Stuck)
    checks["preservation"] = preserved_along(a, budget.limit)
