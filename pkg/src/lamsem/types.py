"""Simple types over ``int`` and ``->`` read as possibly infinite regular trees.

Inference is unification over rational trees: there is no occurs check, so
``a = a -> b`` is solved by a cyclic graph instead of being rejected. That
makes every pure lambda-term typable (self-application included) while
constants still cannot be applied.

Types are printed with back-references for cycles: ``%1=(%1 -> int)``
denotes the type ``t`` with ``t = t -> int``. Type variables print as
``'a``, ``'b``, ...
"""

from __future__ import annotations

import itertools
import re
import weakref
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Optional

from .syntax import Abs, App, Const, Term, Var, is_value
from .smallstep import Frame, focused_reducts, step

# -- frozen type graphs ------------------------------------------------------------

# Node labels: ("int",) | ("arrow", dom, cod) | ("var", id)
Label = tuple


@dataclass(frozen=True)
class TypeGraph:
    """Rooted graph whose unfolding from ``root`` is the type."""

    nodes: tuple[Label, ...]
    root: int = 0

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if not 0 <= self.root < n:
            raise ValueError("root out of range")
        for label in self.nodes:
            if label[0] == "arrow":
                if len(label) != 3 or not (0 <= label[1] < n and 0 <= label[2] < n):
                    raise ValueError(f"bad arrow node {label}")
            elif label[0] == "var":
                if len(label) != 2:
                    raise ValueError(f"bad variable node {label}")
            elif label != ("int",):
                raise ValueError(f"unknown node label {label}")

    def __str__(self) -> str:
        return show_type(self)

    def unfold(self) -> TypeGraph:
        """The same type with its root node copied once."""
        label = self.nodes[self.root]
        return TypeGraph(self.nodes + (label,), len(self.nodes))


INT = TypeGraph((("int",),))


def arrow(dom: TypeGraph, cod: TypeGraph) -> TypeGraph:
    shift = len(dom.nodes) + 1

    def moved(label: Label, by: int) -> Label:
        if label[0] == "arrow":
            return ("arrow", label[1] + by, label[2] + by)
        return label

    nodes = [("arrow", dom.root + 1, cod.root + shift)]
    nodes += [moved(lab, 1) for lab in dom.nodes]
    nodes += [moved(lab, shift) for lab in cod.nodes]
    return TypeGraph(tuple(nodes), 0)


def tvar(ident: int) -> TypeGraph:
    return TypeGraph((("var", ident),))


def type_equal(t1: TypeGraph, t2: TypeGraph, rename: bool = True) -> bool:
    """Bisimilarity of the two unfolded trees.

    With ``rename``, type variables only need to correspond one-to-one,
    so types inferred separately compare equal up to variable names.
    """
    assumed: set[tuple[int, int]] = set()
    fwd: dict = {}
    back: dict = {}
    todo = [(t1.root, t2.root)]
    while todo:
        pair = todo.pop()
        if pair in assumed:
            continue
        assumed.add(pair)
        l1, l2 = t1.nodes[pair[0]], t2.nodes[pair[1]]
        if l1[0] != l2[0]:
            return False
        if l1[0] == "arrow":
            todo.append((l1[1], l2[1]))
            todo.append((l1[2], l2[2]))
        elif l1[0] == "var":
            if not rename:
                if l1[1] != l2[1]:
                    return False
            elif fwd.setdefault(l1[1], l2[1]) != l2[1] or back.setdefault(l2[1], l1[1]) != l1[1]:
                return False
    return True


def minimize(t: TypeGraph) -> TypeGraph:
    """Smallest graph with the same unfolding, restricted to reachable nodes."""
    reach: list[int] = []
    seen = {t.root}
    todo = [t.root]
    while todo:
        i = todo.pop()
        reach.append(i)
        label = t.nodes[i]
        if label[0] == "arrow":
            for j in (label[2], label[1]):
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
    # partition refinement
    block = {i: (t.nodes[i][0], t.nodes[i][1] if t.nodes[i][0] == "var" else None) for i in reach}
    while True:
        sig = {}
        for i in reach:
            label = t.nodes[i]
            if label[0] == "arrow":
                sig[i] = (block[i], block[label[1]], block[label[2]])
            else:
                sig[i] = (block[i],)
        if len(set(sig.values())) == len(set(block.values())):
            break
        block = sig
    # number blocks in depth-first order from the root
    order: dict = {}
    nodes: list = []
    rep: dict = {}
    todo = [t.root]
    while todo:
        i = todo.pop()
        b = block[i]
        if b in order:
            continue
        order[b] = len(nodes)
        rep[b] = i
        nodes.append(None)
        label = t.nodes[i]
        if label[0] == "arrow":
            todo.append(label[2])
            todo.append(label[1])
    names: dict = {}
    for b, k in order.items():
        label = t.nodes[rep[b]]
        if label[0] == "arrow":
            nodes[k] = ("arrow", order[block[label[1]]], order[block[label[2]]])
        elif label[0] == "var":
            nodes[k] = ("var", names.setdefault(label[1], len(names)))
        else:
            nodes[k] = label
    return TypeGraph(tuple(nodes), 0)


def _var_name(i: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return "'" + letters[i % 26] + ("" if i < 26 else str(i // 26))


def show_type(t: TypeGraph) -> str:
    t = minimize(t)

    def render(looped: set[int], found: set[int]) -> str:
        labels: dict[int, int] = {}
        active: set[int] = set()

        def go(i: int, in_dom: bool) -> str:
            label = t.nodes[i]
            if label[0] == "int":
                return "int"
            if label[0] == "var":
                return _var_name(label[1])
            if i in active:
                if i not in looped:
                    found.add(i)
                    return "?"
                return f"%{labels[i]}"
            if i in looped:
                labels.setdefault(i, len(labels) + 1)
            active.add(i)
            text = f"{go(label[1], True)} -> {go(label[2], False)}"
            active.discard(i)
            if i in looped:
                return f"%{labels[i]}=({text})"
            return f"({text})" if in_dom else text

        return go(t.root, False)

    # nodes met again while being printed get a %k label; repeat until
    # every such node is known
    looped: set[int] = set()
    while True:
        found: set[int] = set()
        text = render(looped, found)
        if not found:
            return text
        looped |= found


_TYPE_TOKEN = re.compile(r"\s*(?:(->)|(%\d+=\()|(%\d+)|('[a-z]\d*)|(int)|([()]))")


def parse_type(src: str) -> TypeGraph:
    """Read the notation produced by :func:`show_type`."""
    toks = []
    pos = 0
    src = src.strip()
    while pos < len(src):
        m = _TYPE_TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"bad type syntax at position {pos}")
        toks.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    nodes: list = []
    binders: dict[str, int] = {}
    var_ids: dict[str, int] = {}
    i = 0

    def peek() -> Optional[str]:
        return toks[i] if i < len(toks) else None

    def new(label) -> int:
        nodes.append(label)
        return len(nodes) - 1

    def ty() -> int:
        nonlocal i
        dom = atom()
        if peek() == "->":
            i += 1
            cod = ty()
            return new(("arrow", dom, cod))
        return dom

    def atom() -> int:
        nonlocal i
        tok = peek()
        if tok is None:
            raise ValueError("unexpected end of type")
        i += 1
        if tok == "int":
            return new(("int",))
        if tok.startswith("'"):
            return new(("var", var_ids.setdefault(tok, len(var_ids))))
        if tok == "(":
            inner = ty()
            if peek() != ")":
                raise ValueError("expected ')'")
            i += 1
            return inner
        if tok.endswith("=("):
            name = tok[:-2]
            slot = new(None)
            binders[name] = slot
            inner = ty()
            if peek() != ")":
                raise ValueError("expected ')'")
            i += 1
            # the binder must be the arrow itself
            nodes[slot] = nodes[inner]
            return slot
        if tok in binders:
            return binders[tok]
        raise ValueError(f"unexpected {tok!r}")

    root = ty()
    if i != len(toks):
        raise ValueError(f"trailing input in type: {toks[i]!r}")
    if any(label is None for label in nodes):
        raise ValueError("back-reference to an unfinished binder")
    return TypeGraph(tuple(nodes), root)


# -- unification -----------------------------------------------------------------------


class UnificationError(Exception):
    def __init__(self, left: str, right: str):
        super().__init__(f"cannot unify {left} with {right}")
        self.left = left
        self.right = right


class _Node:
    __slots__ = ("kind", "dom", "cod", "ident", "parent")

    def __init__(self, kind: str, dom=None, cod=None, ident: int = 0):
        self.kind = kind  # "int" | "arrow" | "var" | "rigid"
        self.dom = dom
        self.cod = cod
        self.ident = ident
        self.parent: Optional[_Node] = None


class UnificationState:
    """Mutable union-find store of type nodes."""

    def __init__(self) -> None:
        self._ids = itertools.count()

    def fresh(self) -> _Node:
        return _Node("var", ident=next(self._ids))

    def int_(self) -> _Node:
        return _Node("int")

    def arrow(self, dom: _Node, cod: _Node) -> _Node:
        return _Node("arrow", dom, cod)

    def rigid(self, ident) -> _Node:
        return _Node("rigid", ident=ident)

    @staticmethod
    def find(node: _Node) -> _Node:
        root = node
        while root.parent is not None:
            root = root.parent
        while node.parent is not None and node.parent is not root:
            node.parent, node = root, node.parent
        return root

    def unify(self, n1: _Node, n2: _Node) -> None:
        todo = [(n1, n2)]
        while todo:
            a, b = todo.pop()
            a, b = self.find(a), self.find(b)
            if a is b:
                continue
            if a.kind == "var":
                a.parent = b
                continue
            if b.kind == "var":
                b.parent = a
                continue
            if a.kind != b.kind or (a.kind == "rigid" and a.ident != b.ident):
                raise UnificationError(_describe(a), _describe(b))
            if a.kind == "arrow":
                # merge first so cyclic graphs terminate
                a.parent = b
                todo.append((a.cod, b.cod))
                todo.append((a.dom, b.dom))

    def load(self, t: TypeGraph, rigid: bool = False) -> _Node:
        """Copy a frozen graph into the store; variables are renamed apart."""
        made = [
            self.int_() if lab[0] == "int"
            else self.arrow(None, None) if lab[0] == "arrow"
            else (self.rigid(lab[1]) if rigid or _is_rigid(lab) else self.fresh())
            for lab in t.nodes
        ]
        shared: dict = {}
        for label, node in zip(t.nodes, made):
            if label[0] == "arrow":
                node.dom, node.cod = made[label[1]], made[label[2]]
            elif label[0] == "var" and not rigid and not _is_rigid(label):
                first = shared.setdefault(label[1], node)
                if first is not node:
                    node.parent = first
        return made[t.root]

    def freeze(self, node: _Node) -> TypeGraph:
        index: dict[int, int] = {}
        nodes: list = []
        order: list[_Node] = []
        todo = [node]
        while todo:
            n = self.find(todo.pop())
            if id(n) in index:
                continue
            index[id(n)] = len(order)
            order.append(n)
            if n.kind == "arrow":
                todo.append(n.cod)
                todo.append(n.dom)
        for n in order:
            if n.kind == "arrow":
                nodes.append(("arrow", index[id(self.find(n.dom))], index[id(self.find(n.cod))]))
            elif n.kind == "int":
                nodes.append(("int",))
            else:
                nodes.append(("var", n.ident))
        return minimize(TypeGraph(tuple(nodes), index[id(self.find(node))]))


def _is_rigid(label: tuple) -> bool:
    # rigid variables keep a tagged identifier through freeze and load
    return label[0] == "var" and isinstance(label[1], tuple)


def _describe(n: _Node) -> str:
    if n.kind == "arrow":
        return "a function type"
    if n.kind == "rigid":
        ident = n.ident[1] if isinstance(n.ident, tuple) else n.ident
        return _var_name(ident)
    return n.kind


def unify(t1: TypeGraph, t2: TypeGraph) -> TypeGraph:
    """Most general common instance of two types (variables renamed apart)."""
    st = UnificationState()
    n1, n2 = st.load(t1), st.load(t2)
    st.unify(n1, n2)
    return st.freeze(n1)


# -- inference ------------------------------------------------------------------------


class IllTyped(Exception):
    """Typing failed while checking ``term``."""

    def __init__(self, term: Term, detail: str):
        super().__init__(f"ill-typed at {term}: {detail}")
        self.term = term
        self.detail = detail


TypeEnv = Mapping[str, TypeGraph]


# Principal types of closed terms. A closed subterm can be given exactly the
# instances of its principal type wherever it occurs, so inference loads a
# fresh copy instead of walking the subterm again.
_closed_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _infer_node(st: UnificationState, env: TypeEnv, a: Term) -> _Node:
    loaded = {name: st.load(t) for name, t in env.items()}
    results: list[_Node] = []
    # work items: (term, scope) to visit, or (term, scope, node) to finish
    todo: list[tuple] = [(a, ())]
    while todo:
        item = todo.pop()
        t, scope = item[0], item[1]
        if len(item) == 3:
            if isinstance(t, Abs):
                body = results.pop()
                results.append(st.arrow(item[2], body))
            else:
                arg = results.pop()
                fun = results.pop()
                res = st.fresh()
                try:
                    st.unify(fun, st.arrow(arg, res))
                except UnificationError as e:
                    if not t.fv:
                        _closed_cache[t] = IllTyped(t, str(e))
                    raise IllTyped(t, str(e)) from None
                results.append(res)
            if not t.fv:
                _closed_cache[t] = st.freeze(results[-1])
            continue
        if not t.fv and isinstance(t, (Abs, App)):
            hit = _closed_cache.get(t)
            if isinstance(hit, IllTyped):
                raise IllTyped(hit.term, hit.detail)
            if hit is not None:
                results.append(st.load(hit))
                continue
        if isinstance(t, Const):
            results.append(st.int_())
        elif isinstance(t, Var):
            for name, node in scope:
                if name == t.name:
                    results.append(node)
                    break
            else:
                if t.name not in loaded:
                    raise IllTyped(t, "unbound variable")
                results.append(loaded[t.name])
        elif isinstance(t, Abs):
            param = st.fresh()
            todo.append((t, scope, param))
            todo.append((t.body, ((t.param, param),) + scope))
        else:
            todo.append((t, scope, None))
            todo.append((t.arg, scope))
            todo.append((t.fun, scope))
    return results[0]


def infer(a: Term, env: Optional[TypeEnv] = None) -> TypeGraph:
    """Principal type of ``a``; raises :class:`IllTyped`."""
    st = UnificationState()
    return st.freeze(_infer_node(st, env or {}, a))


def has_type(a: Term, t: TypeGraph, env: Optional[TypeEnv] = None) -> bool:
    """Whether ``a`` can be given exactly ``t``, whose variables are held fixed."""
    st = UnificationState()
    try:
        node = _infer_node(st, env or {}, a)
        st.unify(node, st.load(t, rigid=True))
    except (IllTyped, UnificationError):
        return False
    return True


def typable(a: Term) -> bool:
    try:
        infer(a)
    except IllTyped:
        return False
    return True


def check_preservation(a: Term, principal: bool = False) -> bool:
    """If ``a`` steps to ``b``, ``b`` still has the principal type of ``a``.

    With ``principal``, the principal types of ``a`` and ``b`` must also
    coincide, which is stronger: a step may discard an argument whose type
    constrained the result.
    """
    ta = infer(a)
    b = step(a)
    if b is None:
        return True
    if principal:
        try:
            return type_equal(infer(b), ta)
        except IllTyped:
            return False
    return has_type(b, ta)


def _canonical(t: TypeGraph) -> TypeGraph:
    """Minimal graph with variables numbered by first occurrence."""
    t = minimize(t)
    names: dict = {}
    nodes = tuple(
        ("var", names.setdefault(lab[1], len(names))) if lab[0] == "var" else lab
        for lab in t.nodes
    )
    return TypeGraph(nodes, t.root)


def has_type_along(a: Term, t: TypeGraph, limit: int) -> bool:
    """Whether every reduct of ``a`` within ``limit`` steps has type ``t``.

    Reducts are checked as a focus inside an evaluation context, going up
    from the focus: the principal type of a frame filled with a term of
    principal type T depends only on the frame and T. Results are memoized
    per (frame, T), so consecutive reducts, which share most of their
    context, are mostly answered from the table.
    """
    # (id of frame, canonical hole type) -> whether the whole term gets t
    memo: dict[tuple[int, TypeGraph], bool] = {}
    closed_types: dict[int, TypeGraph] = {}
    keep: list[Term] = []  # holds frame components alive while ids are keys

    def type_of(other: Term) -> TypeGraph:
        ty = closed_types.get(id(other))
        if ty is None:
            ty = closed_types[id(other)] = infer(other)
            keep.append(other)
        return ty

    def fits(frames: Frame, hole: Optional[TypeGraph]) -> bool:
        visited: list[tuple[int, TypeGraph]] = []
        answer = False
        while hole is not None:
            key = (id(frames), hole)
            if key in memo:
                answer = memo[key]
                break
            visited.append(key)
            st = UnificationState()
            if frames is None:
                try:
                    st.unify(st.load(hole), st.load(t, rigid=True))
                    answer = True
                except UnificationError:
                    pass
                break
            hole_is_fun, other, frames = frames
            result = st.fresh()
            try:
                if hole_is_fun:
                    st.unify(st.load(hole), st.arrow(st.load(type_of(other)), result))
                else:
                    st.unify(st.load(type_of(other)), st.arrow(st.load(hole), result))
                hole = _canonical(st.freeze(result))
            except (IllTyped, UnificationError):
                hole = None
        for key in visited:
            memo[key] = answer
        return answer

    seen: set[tuple[int, int]] = set()
    for focus, frames in focused_reducts(a, limit):
        key = (id(focus), id(frames))
        if key in seen:
            return True
        seen.add(key)
        try:
            focus_type = _canonical(infer(focus))
        except IllTyped:
            return False
        if not fits(frames, focus_type):
            return False
    return True


def check_progress(a: Term) -> bool:
    infer(a)
    return is_value(a) or step(a) is not None
