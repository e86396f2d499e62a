"""Terms of the call-by-value lambda-calculus with integer constants.

Named terms are hash-consed: every constructor call returns the canonical
instance for its structure, so ``==`` is identity and hashing is O(1).
Reduction shares substituted values instead of copying them, and reducts
whose tree size explodes stay small as DAGs; without interning, comparing
two of them would walk the whole tree.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "Var",
    "Const",
    "Abs",
    "App",
    "Term",
    "DbVar",
    "DbConst",
    "DbAbs",
    "DbApp",
    "DbTerm",
    "ParseError",
    "OpenTermError",
    "parse",
    "show",
    "subst",
    "is_value",
    "is_closed",
    "free_vars",
    "size",
    "to_debruijn",
    "left_app_height",
    "is_atom",
    "is_cps",
    "MACROS",
    "DELTA",
    "OMEGA",
    "BIG_OMEGA",
    "Y",
    "F",
]


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class OpenTermError(ValueError):
    """A closed term was required but ``name`` occurs free."""

    def __init__(self, name: str):
        super().__init__(f"free variable {name!r}")
        self.name = name


_EMPTY: frozenset[str] = frozenset()
_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()


class _Node:
    __slots__ = ("fv", "__weakref__")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({show(self)!r})"

    def __str__(self) -> str:
        return show(self)

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


class Var(_Node):
    __slots__ = ("name",)
    __match_args__ = ("name",)
    name: str

    def __new__(cls, name: str) -> Var:
        key = ("v", name)
        node = _table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.name = name
            node.fv = frozenset((name,))
            _table[key] = node
        return node

    def __reduce__(self):
        return (Var, (self.name,))


class Const(_Node):
    __slots__ = ("value",)
    __match_args__ = ("value",)
    value: int

    def __new__(cls, value: int) -> Const:
        key = ("c", value)
        node = _table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.value = value
            node.fv = _EMPTY
            _table[key] = node
        return node

    def __reduce__(self):
        return (Const, (self.value,))


class Abs(_Node):
    __slots__ = ("param", "body")
    __match_args__ = ("param", "body")
    param: str
    body: Term

    def __new__(cls, param: str, body: Term) -> Abs:
        key = ("l", param, id(body))
        node = _table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.param = param
            node.body = body
            node.fv = body.fv - {param} if param in body.fv else body.fv
            _table[key] = node
        return node

    def __reduce__(self):
        return (Abs, (self.param, self.body))


class App(_Node):
    __slots__ = ("fun", "arg")
    __match_args__ = ("fun", "arg")
    fun: Term
    arg: Term

    def __new__(cls, fun: Term, arg: Term) -> App:
        key = ("a", id(fun), id(arg))
        node = _table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.fun = fun
            node.arg = arg
            if not arg.fv:
                node.fv = fun.fv
            elif not fun.fv:
                node.fv = arg.fv
            else:
                node.fv = fun.fv | arg.fv
            _table[key] = node
        return node

    def __reduce__(self):
        return (App, (self.fun, self.arg))


Term = Union[Var, Const, Abs, App]


# -- de Bruijn terms ---------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DbVar:
    index: int


@dataclass(frozen=True, slots=True)
class DbConst:
    value: int


@dataclass(frozen=True, slots=True)
class DbAbs:
    body: DbTerm


@dataclass(frozen=True, slots=True)
class DbApp:
    fun: DbTerm
    arg: DbTerm


DbTerm = Union[DbVar, DbConst, DbAbs, DbApp]


# -- predicates ----------------------------------------------------------------


def is_value(a: Term) -> bool:
    return isinstance(a, (Const, Abs))


def free_vars(a: Term) -> frozenset[str]:
    return a.fv


def is_closed(a: Term) -> bool:
    return not a.fv


def size(a: Term) -> int:
    """Number of nodes in the tree view of ``a``."""
    n = 0
    stack = [a]
    while stack:
        t = stack.pop()
        n += 1
        if isinstance(t, App):
            stack.append(t.fun)
            stack.append(t.arg)
        elif isinstance(t, Abs):
            stack.append(t.body)
    return n


def left_app_height(a: Term) -> int:
    n = 0
    while isinstance(a, App):
        n += 1
        a = a.fun
    return n


def is_atom(a: Term) -> bool:
    match a:
        case Var() | Const():
            return True
        case Abs(_, body):
            return is_cps(body)
    return False


def is_cps(a: Term) -> bool:
    while isinstance(a, App):
        if not is_atom(a.arg):
            return False
        a = a.fun
    return is_atom(a)


# -- substitution --------------------------------------------------------------


def subst(a: Term, x: str, b: Term) -> Term:
    """Replace the free occurrences of ``x`` in ``a`` by the closed term ``b``.

    Subterms without a free ``x`` are returned as is, so the result shares
    structure with both ``a`` and ``b``.
    """
    if b.fv:
        raise OpenTermError(min(b.fv))
    return _subst(a, x, b)


def _subst(a: Term, x: str, b: Term) -> Term:
    # Iterative post-order walk: reducts can be deeper than the C stack allows.
    if x not in a.fv:
        return a
    out: list[Term] = []
    todo: list[tuple[Term, bool]] = [(a, False)]
    while todo:
        t, rebuild = todo.pop()
        if rebuild:
            if isinstance(t, App):
                arg = out.pop()
                out.append(App(out.pop(), arg))
            else:
                out.append(Abs(t.param, out.pop()))
        elif x not in t.fv:
            out.append(t)
        elif isinstance(t, Var):
            out.append(b)
        elif isinstance(t, App):
            todo.append((t, True))
            todo.append((t.arg, False))
            todo.append((t.fun, False))
        else:
            # Abs with x free in the body, hence param != x
            todo.append((t, True))
            todo.append((t.body, False))
    return out[0]


# -- de Bruijn conversion --------------------------------------------------------


def to_debruijn(a: Term) -> DbTerm:
    """Nameless form of a closed term; the innermost binder is index 0."""
    if a.fv:
        raise OpenTermError(min(a.fv))
    return _to_db(a, ())


def _to_db(a: Term, binders: tuple[str, ...]) -> DbTerm:
    match a:
        case Var(name):
            # binders is innermost-first
            return DbVar(binders.index(name))
        case Const(c):
            return DbConst(c)
        case Abs(x, body):
            return DbAbs(_to_db(body, (x,) + binders))
        case App(f, arg):
            return DbApp(_to_db(f, binders), _to_db(arg, binders))
    raise TypeError(f"not a term: {a!r}")


# -- printing ---------------------------------------------------------------------


def show(a: Term) -> str:
    """Canonical text with minimal parentheses.

    An abstraction in non-final position is parenthesized because its body
    would otherwise swallow what follows.
    """
    parts: list[str] = []
    # work items: a literal string, or (term, tail)
    todo: list = [(a, True)]
    while todo:
        item = todo.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        t, tail = item
        if isinstance(t, Var):
            parts.append(t.name)
        elif isinstance(t, Const):
            parts.append(str(t.value))
        elif isinstance(t, Abs):
            if tail:
                parts.append(f"\\{t.param}. ")
                todo.append((t.body, True))
            else:
                parts.append(f"(\\{t.param}. ")
                todo.append(")")
                todo.append((t.body, True))
        else:
            f, arg = t.fun, t.arg
            if isinstance(arg, App):
                todo += [")", (arg, True), " ("]
            else:
                todo += [(arg, tail), " "]
            if isinstance(f, Abs):
                todo += [")", (f, True), "("]
            else:
                todo.append((f, False))
    return "".join(parts)


# -- parsing ----------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<int>-?\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<macro>@[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[\\λ.()]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(src)))
    return tokens


def _close_group(group: list[list], found: str, pos: int) -> Term:
    # a group is a list of layers [param, applied-so-far]; each lambda
    # opens a layer whose body runs to the end of the group
    term: Optional[Term] = None
    for param, acc in reversed(group):
        if term is not None:
            acc = term if acc is None else App(acc, term)
        if acc is None:
            raise ParseError(f"expected a term, found {found or 'end of input'!r}", pos)
        term = acc if param is None else Abs(param, acc)
    return term


def parse(src: str) -> Term:
    """Read a term; ``@name`` expands a macro from :data:`MACROS`.

    Iterative, so nesting depth is not limited by the call stack.
    """
    tokens = _tokenize(src)
    groups: list[list[list]] = [[[None, None]]]
    i = 0
    while True:
        kind, value, pos = tokens[i]
        i += 1
        if kind in ("int", "ident", "macro"):
            if kind == "int":
                atom: Term = Const(int(value))
            elif kind == "ident":
                atom = Var(value)
            elif value[1:] in MACROS:
                atom = MACROS[value[1:]]
            else:
                raise ParseError(f"unknown macro {value!r}", pos)
            layer = groups[-1][-1]
            layer[1] = atom if layer[1] is None else App(layer[1], atom)
        elif value in ("\\", "λ"):
            kind, name, pos = tokens[i]
            if kind != "ident":
                raise ParseError("expected a parameter name after lambda", pos)
            kind, dot, pos = tokens[i + 1]
            if kind != "sym" or dot != ".":
                raise ParseError(f"expected '.', found {dot or 'end of input'!r}", pos)
            i += 2
            groups[-1].append([name, None])
        elif value == "(":
            groups.append([[None, None]])
        elif value == ")" or kind == "eof":
            if kind == "eof" and len(groups) > 1:
                raise ParseError("expected ')', found 'end of input'", pos)
            if value == ")" and len(groups) == 1:
                raise ParseError("unexpected ')'", pos)
            term = _close_group(groups.pop(), value, pos)
            if kind == "eof":
                return term
            layer = groups[-1][-1]
            layer[1] = term if layer[1] is None else App(layer[1], term)
        else:
            raise ParseError(f"unexpected {value!r}", pos)


# -- named terms ----------------------------------------------------------------------

DELTA = Abs("x", App(Var("x"), Var("x")))
OMEGA = App(DELTA, DELTA)
BIG_OMEGA = Abs("x", OMEGA)
Y = parse(r"\f. (\x. f (x x)) (\x. f (\y. (x x) y))")
F = parse(r"\f. \x. (\g. \y. g y) (f x)")

MACROS: dict[str, Term] = {
    "delta": DELTA,
    "omega": OMEGA,
    "Omega": BIG_OMEGA,
    "Y": Y,
    "F": F,
}
