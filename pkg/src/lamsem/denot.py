"""Denotations as depth-indexed computations.

``compute(n, a)`` runs ``a`` with recursion depth at most ``n`` and yields
a value, ``ERR`` for a run-time error, or ``BOTTOM`` when the depth does not
suffice. Results are ordered flatly: ``BOTTOM`` is below everything and
other results are only below themselves.

Deliberately written without reusing the big-step evaluator, so the two can
be compared against each other.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Union

from .syntax import Abs, App, Const, Term, Var, _subst


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "Bottom"


@dataclass(frozen=True)
class Err:
    def __str__(self) -> str:
        return "Err"


@dataclass(frozen=True)
class Val:
    value: Term

    def __str__(self) -> str:
        return str(self.value)


BOTTOM = Bottom()
ERR = Err()
Result3 = Union[Bottom, Err, Val]


def bind(r: Result3, f: Callable[[Term], Result3]) -> Result3:
    """Monadic composition: propagate ``BOTTOM`` and ``ERR``, else continue."""
    if isinstance(r, Val):
        return f(r.value)
    return r


def leq(r1: Result3, r2: Result3) -> bool:
    return isinstance(r1, Bottom) or r1 == r2


def compute(n: int, a: Term) -> Result3:
    if n == 0:
        return BOTTOM
    match a:
        case Var():
            return ERR
        case Const() | Abs():
            return Val(a)
        case App(a1, a2):
            m = n - 1

            def apply(v1: Term) -> Result3:
                def with_arg(v2: Term) -> Result3:
                    if isinstance(v1, Abs):
                        return compute(m, _subst(v1.body, v1.param, v2))
                    return ERR

                return bind(compute(m, a2), with_arg)

            return bind(compute(m, a1), apply)
    raise TypeError(f"not a term: {a!r}")


def exec_approx(a: Term, budget: int) -> Result3:
    """Denotation of ``a`` as far as depth ``budget`` can tell.

    By monotonicity a non-bottom answer is final; ``BOTTOM`` only means no
    answer within the budget.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    return compute(budget, a)
