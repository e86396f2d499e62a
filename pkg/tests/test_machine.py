from __future__ import annotations

import random

from hypothesis import given, settings
from oracles import closed_terms

from lamsem.bigstep import FuelOut, Value, Wrong, eval_fuel
from lamsem.harness.check import random_context
from lamsem.machine import (
    Crash,
    Frame,
    Halt,
    IApp,
    IClos,
    IConst,
    INop,
    IRet,
    IVar,
    MClos,
    MConst,
    MState,
    SClos,
    SConst,
    StepLimit,
    closed_form,
    compile,
    compile_env,
    compile_value,
    env_eval,
    machine_step,
    readback,
    run,
    run_until,
    show_code,
    source_value,
)
from lamsem.syntax import DbAbs, DbApp, DbConst, DbVar, OMEGA, parse, to_debruijn

ID_BODY = DbVar(0)
ID_CODE = (IVar(1), IRet())


def test_env_eval_examples():
    assert env_eval((), DbAbs(ID_BODY), 1) == Value(SClos(ID_BODY, ()))
    for n in (1, 10, 300):
        assert isinstance(env_eval((), to_debruijn(OMEGA), n), FuelOut)
    assert env_eval((), to_debruijn(parse(r"(\x. x) 7")), 10) == Value(SConst(7))
    assert isinstance(env_eval((), to_debruijn(parse("0 0")), 10), Wrong)


def test_compile_examples():
    assert compile(DbConst(3)) == (IConst(3),)
    assert compile(DbAbs(ID_BODY)) == (IClos(ID_CODE),)
    assert compile(DbApp(DbAbs(ID_BODY), DbConst(7))) == (IClos(ID_CODE), IConst(7), IApp())
    assert compile(DbApp(DbConst(1), DbConst(2)), nop=True) == (INop(), IConst(1), IConst(2), IApp())


def test_compile_value_examples():
    assert compile_value(SConst(3)) == MConst(3)
    assert compile_value(SClos(ID_BODY, ())) == MClos(ID_CODE, ())
    assert compile_env(()) == ()


def test_machine_step_examples():
    s = machine_step(MState((IConst(5),)))
    assert s == MState((), (MConst(5),), ())
    assert machine_step(s) == Halt(s)
    f = MClos((IVar(1), IRet()), (MConst(9),))
    rest = (IConst(0),)
    env = (MConst(4),)
    applied = machine_step(MState((IApp(),) + rest, (MConst(1), f, MConst(2)), env))
    assert applied == MState(f.code, (Frame(rest, env), MConst(2)), (MConst(1), MConst(9)))
    assert isinstance(machine_step(MState((IRet(),))), Crash)
    assert isinstance(machine_step(MState((IVar(1),))), Crash)


def test_run_examples():
    r = run(compile(to_debruijn(parse(r"(\x. x) 7"))), 100)
    assert r.final == Halt(MState((), (MConst(7),), ())) and r.steps == 5
    r = run(compile(to_debruijn(OMEGA)), 10_000)
    assert isinstance(r.final, StepLimit) and r.steps == 10_000
    r = run(compile(to_debruijn(parse("0 0"))), 100)
    # Const, Const, then App finds no closure below the argument
    assert isinstance(r.final, Crash) and r.steps == 2


def test_listing_indents_closure_bodies():
    code = compile(to_debruijn(parse(r"\x. \y. x")))
    assert show_code(code) == ["Clos(", "  Clos(", "    Var(2)", "    Ret", "  )", "  Ret", ")"]


def test_readback_substitutes_the_environment():
    v = env_eval((), to_debruijn(parse(r"(\x. \y. x) 3")), 10).value
    assert v == SClos(DbVar(1), (SConst(3),))
    assert readback(v) == DbAbs(DbConst(3))
    assert closed_form(v) == SClos(DbConst(3), ())


@settings(max_examples=400)
@given(closed_terms())
def test_closure_evaluation_agrees_with_substitution(a):
    r, e = eval_fuel(a, 200), env_eval((), to_debruijn(a), 200)
    assert type(r) is type(e)
    if isinstance(r, Value):
        assert closed_form(e.value) == closed_form(source_value(r.value))


@settings(max_examples=300)
@given(closed_terms())
def test_compiled_code_reaches_the_value_in_any_context(a):
    e = env_eval((), to_debruijn(a), 200)
    if not isinstance(e, Value):
        return
    code = compile(to_debruijn(a))
    v = compile_value(e.value)
    rng = random.Random(len(code))
    for _ in range(3):
        suffix, stack = random_context(rng)
        n = run_until(MState(code + suffix, stack), MState(suffix, (v,) + stack), 10_000)
        assert n is not None


@settings(max_examples=300)
@given(closed_terms())
def test_nop_variant_takes_one_extra_step_per_application(a):
    e = env_eval((), to_debruijn(a), 200)
    if not isinstance(e, Value):
        return
    db = to_debruijn(a)
    plain, nop = run(compile(db), 100_000), run(compile(db, nop=True), 100_000)
    assert isinstance(plain.final, Halt) and isinstance(nop.final, Halt)
    assert plain.final.state.stack == (compile_value(e.value),)
    assert nop.final.state.stack == (compile_value(e.value, nop=True),)
    assert nop.steps == plain.steps + plain.applications
