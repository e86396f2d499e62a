"""Fuel-bounded big-step evaluation and approximants of the coinductive
divergence and coevaluation judgments.

Fuel counts rule unfoldings: evaluating an application spends one unit and
evaluates each of its three premises with the remaining fuel, so
``eval_fuel(a, n)`` answers exactly when the depth-``n`` denotation does.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from typing import Union

from .syntax import (
    BIG_OMEGA,
    Abs,
    App,
    Const,
    OpenTermError,
    Term,
    Var,
    _subst,
    is_value,
)
from .traces import EMPTY, FiniteTrace, LazyTrace

DEFAULT_FUEL = 1000


@dataclass(frozen=True)
class Value:
    value: Term


@dataclass(frozen=True)
class Wrong:
    """Evaluation hit a free variable or applied a non-function ``at``."""

    at: Term


@dataclass(frozen=True)
class FuelOut:
    pass


FUEL_OUT = FuelOut()
EvalOutcome = Union[Value, Wrong, FuelOut]


class NotDiverging(Exception):
    """No divergence rule applies to ``term``."""

    def __init__(self, term: Term, reason: str):
        super().__init__(f"{term}: {reason}")
        self.term = term
        self.reason = reason


def _check_closed(a: Term) -> None:
    if a.fv:
        raise OpenTermError(min(a.fv))


def eval_fuel(a: Term, n: int = DEFAULT_FUEL) -> EvalOutcome:
    _check_closed(a)
    return _eval(a, n)


def _eval(a: Term, n: int) -> EvalOutcome:
    if n == 0:
        return FUEL_OUT
    if isinstance(a, (Const, Abs)):
        return Value(a)
    if isinstance(a, Var):
        return Wrong(a)
    n -= 1
    r1 = _eval(a.fun, n)
    if not isinstance(r1, Value):
        return r1
    r2 = _eval(a.arg, n)
    if not isinstance(r2, Value):
        return r2
    f = r1.value
    if not isinstance(f, Abs):
        return Wrong(App(f, r2.value))
    return _eval(_subst(f.body, f.param, r2.value), n)


def eval_trace(a: Term, n: int = DEFAULT_FUEL) -> tuple[FiniteTrace, EvalOutcome]:
    """Evaluate and build the reduction trace from the derivation.

    For an application the trace is ``(t1 a2).((\\x.b) t2).((\\x.b) v2).t3``;
    when evaluation stops early the trace built so far is returned.
    """
    _check_closed(a)
    return _eval_trace(a, n)


def _eval_trace(a: Term, n: int) -> tuple[FiniteTrace, EvalOutcome]:
    if n == 0:
        return EMPTY, FUEL_OUT
    if isinstance(a, (Const, Abs)):
        return EMPTY, Value(a)
    if isinstance(a, Var):
        return EMPTY, Wrong(a)
    n -= 1
    a1, a2 = a.fun, a.arg
    t1, r1 = _eval_trace(a1, n)
    left = [App(t, a2) for t in t1]
    if not isinstance(r1, Value):
        return tuple(left), r1
    f = r1.value
    t2, r2 = _eval_trace(a2, n)
    left += [App(f, t) for t in t2]
    if not isinstance(r2, Value):
        return tuple(left), r2
    redex = App(f, r2.value)
    if not isinstance(f, Abs):
        return tuple(left), Wrong(redex)
    left.append(redex)
    t3, r3 = _eval_trace(_subst(f.body, f.param, r2.value), n)
    return tuple(left) + t3, r3


def diverges_approx(a: Term, k: int, n: int = DEFAULT_FUEL) -> bool:
    """k-th approximant of the divergence judgment.

    Evaluation premises must produce a value within fuel ``n``; divergence
    premises are checked at depth ``k - 1``. Depth 0 holds for every term.
    """
    _check_closed(a)
    memo: dict[tuple[int, int], bool] = {}
    keep: list[Term] = []

    def div(a: Term, k: int) -> bool:
        if k == 0:
            return True
        if not isinstance(a, App):
            return False
        key = (id(a), k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        keep.append(a)
        a1, a2 = a.fun, a.arg
        result = div(a1, k - 1)
        if not result:
            r1 = _eval(a1, n)
            if isinstance(r1, Value):
                result = div(a2, k - 1)
                if not result and isinstance(r1.value, Abs):
                    r2 = _eval(a2, n)
                    if isinstance(r2, Value):
                        f = r1.value
                        result = div(_subst(f.body, f.param, r2.value), k - 1)
        memo[key] = result
        return result

    return div(a, k)


def diverge_trace_stream(a: Term, n: int = DEFAULT_FUEL) -> LazyTrace:
    """Infinite trace of a diverging term, assembled rule by rule.

    At each unfolding the evaluation premises are run with fuel ``n``; the
    first subterm that runs out of fuel is taken as the diverging premise.
    Raises :class:`NotDiverging` (immediately, or later from the iterator)
    when an unfolding finds a converging or failing term instead.
    """
    _check_closed(a)
    segments = _divergence_segments(a, n)
    first = next(segments)
    return _flatten(first, segments)


def _flatten(first: FiniteTrace, rest: Iterator[FiniteTrace]) -> Iterator[Term]:
    yield from first
    for segment in rest:
        yield from segment


def _divergence_segments(a: Term, n: int) -> Iterator[FiniteTrace]:
    # The evaluation context of the current diverging premise is kept as a
    # list of functions, so app-l nesting costs no generator nesting.
    ctx: list[tuple[bool, Term]] = []

    def embed(t: FiniteTrace) -> FiniteTrace:
        out = []
        for term in t:
            for hole_is_fun, other in reversed(ctx):
                term = App(term, other) if hole_is_fun else App(other, term)
            out.append(term)
        return tuple(out)

    while True:
        if not isinstance(a, App):
            raise NotDiverging(a, "not an application")
        a1, a2 = a.fun, a.arg
        # decide with the plain evaluator; traces only for premises that finish
        r1 = _eval(a1, n)
        if isinstance(r1, FuelOut):
            ctx.append((True, a2))
            a = a1
            continue
        if isinstance(r1, Wrong):
            raise NotDiverging(a, f"function part goes wrong at {r1.at}")
        f = r1.value
        t1, _ = _eval_trace(a1, n)
        head = tuple(App(t, a2) for t in t1)
        r2 = _eval(a2, n)
        t2 = _eval_trace(a2, n)[0] if isinstance(r2, Value) else EMPTY
        if isinstance(r2, FuelOut):
            yield embed(head)
            ctx.append((False, f))
            a = a2
            continue
        if isinstance(r2, Wrong):
            raise NotDiverging(a, f"argument goes wrong at {r2.at}")
        if not isinstance(f, Abs):
            raise NotDiverging(a, f"applies the constant {f}")
        redex = App(f, r2.value)
        yield embed(head + tuple(App(f, t) for t in t2) + (redex,))
        a = _subst(f.body, f.param, r2.value)


def coeval_approx(a: Term, v: Term, k: int, n: int = DEFAULT_FUEL) -> bool:
    """k-th approximant of coevaluation of ``a`` to ``v``.

    The intermediate values of an application are not searched for: each
    of the two subterms contributes the value it evaluates to within fuel
    ``n``, or the function ``\\x. omega`` if the fuel runs out. A subterm
    that goes wrong makes the check fail. This decides the relation for
    the cases that matter here (terminating terms, closed CPS terms, the
    usual counterexamples) but can miss coevaluations in general.
    """
    _check_closed(a)
    memo: dict[tuple[int, int], tuple[int, float]] = {}
    witnesses: dict[int, Term | None] = {}
    keep: list = []

    def witness(b: Term) -> Term | None:
        if id(b) in witnesses:
            return witnesses[id(b)]
        r = _eval(b, n)
        if isinstance(r, Value):
            w = r.value
        elif isinstance(r, FuelOut):
            w = BIG_OMEGA
        else:
            w = None
        keep.append(b)
        witnesses[id(b)] = w
        return w

    def coeval(a: Term, v: Term, k: int) -> bool:
        if k == 0:
            return True
        if isinstance(a, (Const, Abs)):
            return a is v
        if isinstance(a, Var):
            return False
        # approximants shrink as k grows: remember the largest depth known
        # to hold and the smallest known to fail
        key = (id(a), id(v))
        holds_to, fails_from = memo.get(key, (0, float("inf")))
        if k <= holds_to:
            return True
        if k >= fails_from:
            return False
        keep.append((a, v))
        w1 = witness(a.fun)
        w2 = witness(a.arg) if isinstance(w1, Abs) else None
        result = (
            w2 is not None
            and coeval(a.fun, w1, k - 1)
            and coeval(a.arg, w2, k - 1)
            and coeval(_subst(w1.body, w1.param, w2), v, k - 1)
        )
        holds_to, fails_from = memo.get(key, (0, float("inf")))
        memo[key] = (max(holds_to, k), fails_from) if result else (holds_to, min(fails_from, k))
        return result

    if not is_value(v):
        raise ValueError(f"coevaluation target must be a value, got {v}")
    return coeval(a, v, k)
