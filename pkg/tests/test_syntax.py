from __future__ import annotations

import pickle

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import closed_terms, db_subst, shift

from lamsem.syntax import (
    BIG_OMEGA,
    DELTA,
    OMEGA,
    Abs,
    App,
    Const,
    DbAbs,
    DbApp,
    DbConst,
    DbVar,
    OpenTermError,
    ParseError,
    Var,
    free_vars,
    is_atom,
    is_closed,
    is_cps,
    is_value,
    left_app_height,
    parse,
    show,
    size,
    subst,
    to_debruijn,
)


def test_parse_abstraction():
    assert parse(r"\x. x x") is Abs("x", App(Var("x"), Var("x")))


def test_parse_omega_macro():
    assert parse("@omega") is App(DELTA, DELTA)


def test_application_is_left_associative():
    assert parse("f x y") is App(App(Var("f"), Var("x")), Var("y"))


def test_parse_lambda_symbol_and_negative_constants():
    assert parse("λx. x -3") is Abs("x", App(Var("x"), Const(-3)))


@pytest.mark.parametrize("src", ["", r"\x x", "(x", "@nope", "x )", r"\. x"])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse(src)


def test_hash_consing():
    assert App(Var("x"), Const(1)) is App(Var("x"), Const(1))
    assert Const(1) is not Const(2)


def test_terms_survive_pickling():
    assert pickle.loads(pickle.dumps(BIG_OMEGA)) is BIG_OMEGA


def test_subst_examples():
    x = Var("x")
    assert subst(App(x, x), "x", DELTA) is OMEGA
    assert subst(parse(r"\x. x"), "x", Const(0)) is parse(r"\x. x")
    assert subst(Var("y"), "x", Const(0)) is Var("y")


def test_subst_rejects_open_replacement():
    with pytest.raises(OpenTermError):
        subst(Var("x"), "x", Var("y"))


def test_is_value():
    assert is_value(parse(r"\x. x"))
    assert is_value(Const(0))
    assert not is_value(parse("0 0"))


def test_to_debruijn_examples():
    assert to_debruijn(parse(r"\x. \y. x")) == DbAbs(DbAbs(DbVar(1)))
    assert to_debruijn(DELTA) == DbAbs(DbApp(DbVar(0), DbVar(0)))
    with pytest.raises(OpenTermError):
        to_debruijn(Var("z"))


def test_left_app_height_examples():
    assert left_app_height(DELTA) == 0
    assert left_app_height(OMEGA) == 1
    assert left_app_height(parse("@omega (0 0)")) == 2


def test_cps_examples():
    assert is_cps(OMEGA)
    assert not is_cps(parse("@omega (0 0)"))
    assert is_cps(DELTA)
    assert is_atom(DELTA) and not is_atom(OMEGA)


def test_show_minimal_parentheses():
    assert show(parse(r"(\x. x) (\y. y) z")) == r"(\x. x) (\y. y) z"
    assert show(parse("f (g x)")) == "f (g x)"
    assert show(parse(r"f \x. x")) == r"f \x. x"
    assert show(parse(r"(\x. x) -1")) == r"(\x. x) -1"


def test_deep_terms_do_not_overflow():
    t = Const(0)
    for _ in range(50_000):
        t = App(Abs("x", Var("x")), t)
    assert size(t) == 150_001
    assert parse(show(t)) is t


@settings(max_examples=300)
@given(closed_terms())
def test_parse_show_roundtrip(a):
    assert parse(show(a)) is a


@settings(max_examples=300)
@given(closed_terms(), closed_terms())
def test_subst_preserves_closedness(a, b):
    body = Abs("x", a)
    assert is_closed(subst(a, "x", b))
    assert free_vars(body) == frozenset()


@settings(max_examples=300)
@given(st.sampled_from("xyz"), closed_terms(scope=("x", "y", "z")), closed_terms())
def test_subst_agrees_with_nameless_substitution(x, a, b):
    # close a under lambdas so it can be translated, then substitute under them
    binders = ("z", "y", "x")
    rest = [y for y in binders if y != x]
    closed_body = Abs(rest[0], Abs(rest[1], a))
    lhs = to_debruijn(Abs(rest[0], Abs(rest[1], subst(a, x, b))))
    # the same substitution on the nameless body: x is bound outside both lambdas
    rhs_body = to_debruijn(Abs(x, closed_body)).body
    rhs = shift(db_subst(rhs_body, 0, shift(to_debruijn(b), 1)), -1)
    assert lhs == rhs


@settings(max_examples=300)
@given(closed_terms(max_depth=3, scope=("x",)), closed_terms(max_depth=3))
def test_cps_stable_under_atom_substitution(b, v):
    if is_atom(v) and is_cps(b) and is_closed(v):
        assert is_cps(subst(b, "x", v))


@given(closed_terms(), closed_terms())
def test_left_app_height_of_application(a, b):
    assert left_app_height(App(a, b)) == left_app_height(a) + 1


def test_db_terms_are_plain_values():
    assert DbConst(1) == DbConst(1)
