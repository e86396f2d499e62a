"""Finite and lazy reduction traces.

A finite trace is a tuple of terms. A lazy trace is any iterator of terms
that never stops: consumers pull a prefix with :func:`take` and never
force it to the end.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from itertools import chain, islice
from typing import Union

from .syntax import App, Term, is_value

FiniteTrace = tuple[Term, ...]
LazyTrace = Iterator[Term]
Trace = Union[FiniteTrace, LazyTrace]

EMPTY: FiniteTrace = ()


def concat(t: Iterable[Term], u: Trace) -> Trace:
    if isinstance(u, tuple):
        return tuple(t) + u
    return chain(t, u)


def app_left(t: Trace, b: Term) -> Trace:
    """Put every term of ``t`` in the context ``[] b``."""
    if isinstance(t, tuple):
        return tuple(App(a, b) for a in t)
    return (App(a, b) for a in t)


def app_right(v: Term, t: Trace) -> Trace:
    """Put every term of ``t`` in the context ``v []``; ``v`` must be a value."""
    if not is_value(v):
        raise ValueError(f"app_right needs a value in function position, got {v}")
    if isinstance(t, tuple):
        return tuple(App(v, a) for a in t)
    return (App(v, a) for a in t)


def take(n: int, t: Iterable[Term]) -> FiniteTrace:
    return tuple(islice(t, n))


def constant(a: Term) -> LazyTrace:
    """The trace ``a.a.a...``."""
    while True:
        yield a


def bisim_to_depth(t1: Iterable[Term], t2: Iterable[Term], k: int) -> bool:
    """k-th approximant of trace bisimilarity: the first k elements agree.

    Terms are hash-consed, so the comparison is by identity.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    p1 = take(k, t1)
    p2 = take(k, t2)
    if len(p1) != k or len(p2) != k:
        raise ValueError("lazy trace ended before the requested depth")
    return all(a is b for a, b in zip(p1, p2))
