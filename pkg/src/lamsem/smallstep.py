"""Call-by-value small-step reduction.

``step`` is the one-step relation, read as a partial function: it returns the
reduct, or ``None`` when no rule applies. ``classify`` and
``reduce_with_trace`` produce exactly the sequence of terms obtained by
iterating ``step``, but they keep the evaluation context as a stack of
frames instead of searching for the redex from the root at every step.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from typing import Optional, Union

from .syntax import Abs, App, Term, _subst, is_value
from .traces import FiniteTrace, LazyTrace

DEFAULT_LIMIT = 10_000


@dataclass(frozen=True)
class ValueReached:
    value: Term
    steps: int


@dataclass(frozen=True)
class Stuck:
    at: Term
    steps: int


@dataclass(frozen=True)
class StepLimit:
    last: Term
    steps: int


ReductionClass = Union[ValueReached, Stuck, StepLimit]


def _contract(f: Abs, v: Term) -> Term:
    # no renaming: an open value may be captured, as with the textbook
    # substitution restricted to closed terms
    return _subst(f.body, f.param, v)


def step(a: Term) -> Optional[Term]:
    """One reduction step, or ``None`` if ``a`` is a value or stuck."""
    path: list[tuple[bool, Term]] = []
    t = a
    while True:
        if not isinstance(t, App):
            return None
        f, x = t.fun, t.arg
        if isinstance(f, Abs) and is_value(x):
            reduct = _contract(f, x)
            break
        if not is_value(f):
            path.append((True, x))
            t = f
        elif not is_value(x):
            path.append((False, f))
            t = x
        else:
            return None
    for in_fun, other in reversed(path):
        reduct = App(reduct, other) if in_fun else App(other, reduct)
    return reduct


def matching_rules(a: Term) -> list[str]:
    """Names of the reduction rules whose premises hold for ``a``."""
    if not isinstance(a, App):
        return []
    f, x = a.fun, a.arg
    rules = []
    if isinstance(f, Abs) and is_value(x):
        rules.append("beta")
    if step(f) is not None:
        rules.append("app-l")
    if is_value(f) and step(x) is not None:
        rules.append("app-r")
    return rules


# -- focused reduction -------------------------------------------------------------

# A frame is (hole_is_fun, other, parent): hole_is_fun=True stands for the
# context "[] other", False for "other []" with ``other`` a value.
Frame = Optional[tuple[bool, Term, "Frame"]]

_REDEX, _VALUE, _STUCK = range(3)


class _Reducer:
    """Term split into a focus and its evaluation context.

    Frames are interned per reducer, so a (focus, frames) pair identifies a
    state by identity and revisited states can be detected in O(1).
    """

    def __init__(self, a: Term):
        self.focus = a
        self.frames: Frame = None
        self._frames: dict[tuple, tuple] = {}

    def _push(self, hole_is_fun: bool, other: Term) -> None:
        key = (hole_is_fun, id(other), id(self.frames))
        frame = self._frames.get(key)
        if frame is None:
            frame = (hole_is_fun, other, self.frames)
            self._frames[key] = frame
        self.frames = frame

    def find(self) -> int:
        """Move the focus to the next redex; report what was found."""
        while True:
            t = self.focus
            if isinstance(t, App):
                self._push(True, t.arg)
                self.focus = t.fun
                continue
            if not is_value(t):
                return _STUCK
            top = self.frames
            if top is None:
                return _VALUE
            hole_is_fun, other, parent = top
            if hole_is_fun:
                self.frames = parent
                self._push(False, t)
                self.focus = other
                continue
            return _REDEX if isinstance(other, Abs) else _STUCK

    def contract(self) -> None:
        _, f, parent = self.frames
        self.frames = parent
        self.focus = _contract(f, self.focus)

    def state(self) -> tuple[Term, Frame]:
        return self.focus, self.frames


def plug(focus: Term, frames: Frame) -> Term:
    t = focus
    while frames is not None:
        hole_is_fun, other, frames = frames
        t = App(t, other) if hole_is_fun else App(other, t)
    return t


def classify(a: Term, limit: int = DEFAULT_LIMIT, detect_cycles: bool = True) -> ReductionClass:
    """Reduce for at most ``limit`` steps and report where reduction ended.

    With ``detect_cycles``, a reduction that revisits a state is periodic
    from then on, so the term reached after ``limit`` steps is read off the
    cycle instead of being recomputed step by step.
    """
    if limit < 0:
        raise ValueError("limit must be non-negative")
    r = _Reducer(a)
    seen: dict[tuple[int, int], int] = {}
    history: list[tuple[Term, Frame]] = []
    steps = 0
    while True:
        found = r.find()
        if found == _VALUE:
            return ValueReached(r.focus, steps)
        if found == _STUCK:
            return Stuck(plug(*r.state()), steps)
        if steps == limit:
            return StepLimit(plug(*r.state()), steps)
        if detect_cycles:
            key = (id(r.focus), id(r.frames))
            start = seen.get(key)
            if start is not None:
                period = steps - start
                return StepLimit(plug(*history[start + (limit - start) % period]), limit)
            seen[key] = steps
            history.append(r.state())
        r.contract()
        steps += 1


def reduce_with_trace(a: Term, limit: int = DEFAULT_LIMIT) -> tuple[FiniteTrace, ReductionClass]:
    """Like :func:`classify`, also returning the source term of every step."""
    if limit < 0:
        raise ValueError("limit must be non-negative")
    r = _Reducer(a)
    trace: list[Term] = []
    while True:
        found = r.find()
        if found == _VALUE:
            return tuple(trace), ValueReached(r.focus, len(trace))
        current = plug(*r.state())
        if found == _STUCK:
            return tuple(trace), Stuck(current, len(trace))
        if len(trace) == limit:
            return tuple(trace), StepLimit(current, len(trace))
        trace.append(current)
        r.contract()


def focused_reducts(a: Term, limit: int = DEFAULT_LIMIT) -> Iterator[tuple[Term, Frame]]:
    """``a`` and its reducts within ``limit`` steps, each as (focus, frames).

    ``plug`` of a pair gives the reduct. Frames are interned for the whole
    run, so equal pairs of ids mean equal reducts.
    """
    r = _Reducer(a)
    yield r.state()
    for _ in range(limit):
        if r.find() != _REDEX:
            return
        r.contract()
        yield r.state()


def reduct_stream(a: Term) -> LazyTrace:
    """``a`` followed by its successive reducts; a normal form repeats forever."""
    return _reducts(a)


def _reducts(a: Term) -> Iterator[Term]:
    t = a
    while True:
        yield t
        nxt = step(t)
        if nxt is not None:
            t = nxt
