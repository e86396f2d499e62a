"""Closure-based evaluation, compilation to an eval-apply machine, and the
machine itself.

Source terms here are de Bruijn terms with 0-based indices. The machine
numbers environment slots from 1 (``Var(1)`` is the most recent binding),
so compiling ``DbVar(i)`` emits ``IVar(i + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .bigstep import FUEL_OUT, EvalOutcome, Value, Wrong
from .syntax import Abs, Const, DbAbs, DbApp, DbConst, DbTerm, DbVar, Term, to_debruijn

# -- source-level closures ---------------------------------------------------------


@dataclass(frozen=True)
class SConst:
    value: int


@dataclass(frozen=True)
class SClos:
    body: DbTerm
    env: tuple[SValue, ...]


SValue = Union[SConst, SClos]
SEnv = tuple[SValue, ...]


def env_eval(e: SEnv, a: DbTerm, n: int) -> EvalOutcome:
    """Big-step evaluation of ``a`` in environment ``e`` (index 0 first)."""
    if n == 0:
        return FUEL_OUT
    match a:
        case DbVar(i):
            if i < len(e):
                return Value(e[i])
            return Wrong(a)
        case DbConst(c):
            return Value(SConst(c))
        case DbAbs(body):
            return Value(SClos(body, e))
        case DbApp(a1, a2):
            r1 = env_eval(e, a1, n - 1)
            if not isinstance(r1, Value):
                return r1
            r2 = env_eval(e, a2, n - 1)
            if not isinstance(r2, Value):
                return r2
            f = r1.value
            if not isinstance(f, SClos):
                return Wrong(a)
            return env_eval((r2.value,) + f.env, f.body, n - 1)
    raise TypeError(f"not a de Bruijn term: {a!r}")


def _close(a: DbTerm, env: SEnv, depth: int) -> DbTerm:
    match a:
        case DbVar(i):
            if i < depth:
                return a
            return readback(env[i - depth])
        case DbConst():
            return a
        case DbAbs(body):
            return DbAbs(_close(body, env, depth + 1))
        case DbApp(f, x):
            return DbApp(_close(f, env, depth), _close(x, env, depth))
    raise TypeError(f"not a de Bruijn term: {a!r}")


def readback(v: SValue) -> DbTerm:
    """The closed term a closure stands for, environment substituted in."""
    if isinstance(v, SConst):
        return DbConst(v.value)
    return DbAbs(_close(v.body, v.env, 1))


def source_value(v: Term) -> SValue:
    """Closure form of a closed named value."""
    if isinstance(v, Const):
        return SConst(v.value)
    if isinstance(v, Abs):
        return SClos(to_debruijn(v).body, ())
    raise ValueError(f"not a value: {v}")


def closed_form(v: SValue) -> SValue:
    """Equivalent closure with an empty environment."""
    if isinstance(v, SConst):
        return v
    return SClos(readback(v).body, ())


# -- instructions and compilation ------------------------------------------------------


@dataclass(frozen=True)
class IVar:
    n: int


@dataclass(frozen=True)
class IConst:
    c: int


@dataclass(frozen=True)
class IClos:
    code: Code


@dataclass(frozen=True)
class IApp:
    pass


@dataclass(frozen=True)
class IRet:
    pass


@dataclass(frozen=True)
class INop:
    pass


Instr = Union[IVar, IConst, IClos, IApp, IRet, INop]
Code = tuple[Instr, ...]


def compile(a: DbTerm, nop: bool = False) -> Code:
    match a:
        case DbVar(i):
            return (IVar(i + 1),)
        case DbConst(c):
            return (IConst(c),)
        case DbAbs(body):
            return (IClos(compile(body, nop) + (IRet(),)),)
        case DbApp(a1, a2):
            code = compile(a1, nop) + compile(a2, nop) + (IApp(),)
            return (INop(),) + code if nop else code
    raise TypeError(f"not a de Bruijn term: {a!r}")


# -- machine values and states -------------------------------------------------------------


@dataclass(frozen=True)
class MConst:
    value: int


@dataclass(frozen=True)
class MClos:
    code: Code
    env: tuple[MValue, ...]


MValue = Union[MConst, MClos]
MEnv = tuple[MValue, ...]


@dataclass(frozen=True)
class Frame:
    """Return frame: the caller's remaining code and environment."""

    code: Code
    env: MEnv


StackSlot = Union[MConst, MClos, Frame]


@dataclass(frozen=True)
class MState:
    code: Code
    stack: tuple[StackSlot, ...] = ()
    env: MEnv = ()


def compile_value(v: SValue, nop: bool = False) -> MValue:
    if isinstance(v, SConst):
        return MConst(v.value)
    return MClos(compile(v.body, nop) + (IRet(),), compile_env(v.env, nop))


def compile_env(e: SEnv, nop: bool = False) -> MEnv:
    return tuple(compile_value(v, nop) for v in e)


@dataclass(frozen=True)
class Halt:
    state: MState


@dataclass(frozen=True)
class Crash:
    state: MState
    reason: str


def machine_step(s: MState) -> Union[MState, Halt, Crash]:
    """One transition, chosen by the first instruction of the code."""
    if not s.code:
        return Halt(s)
    instr, rest = s.code[0], s.code[1:]
    stack, env = s.stack, s.env
    match instr:
        case IVar(n):
            if not 1 <= n <= len(env):
                return Crash(s, f"variable {n} not in an environment of size {len(env)}")
            return MState(rest, (env[n - 1],) + stack, env)
        case IConst(c):
            return MState(rest, (MConst(c),) + stack, env)
        case IClos(code):
            return MState(rest, (MClos(code, env),) + stack, env)
        case IApp():
            if len(stack) < 2 or isinstance(stack[0], Frame) or not isinstance(stack[1], MClos):
                return Crash(s, "App needs an argument above a closure")
            v, f = stack[0], stack[1]
            return MState(f.code, (Frame(rest, env),) + stack[2:], (v,) + f.env)
        case IRet():
            if len(stack) < 2 or isinstance(stack[0], Frame) or not isinstance(stack[1], Frame):
                return Crash(s, "Ret needs a value above a return frame")
            v, frame = stack[0], stack[1]
            return MState(frame.code, (v,) + stack[2:], frame.env)
        case INop():
            return MState(rest, stack, env)
    return Crash(s, f"unknown instruction {instr!r}")


@dataclass(frozen=True)
class StepLimit:
    state: MState


@dataclass(frozen=True)
class RunResult:
    final: Union[Halt, Crash, StepLimit]
    steps: int
    # number of App transitions performed
    applications: int = 0


def run_state(s: MState, limit: int) -> RunResult:
    """Run from ``s`` for at most ``limit`` transitions."""
    steps = apps = 0
    while True:
        if not s.code:
            return RunResult(Halt(s), steps, apps)
        if steps == limit:
            return RunResult(StepLimit(s), steps, apps)
        nxt = machine_step(s)
        if not isinstance(nxt, MState):
            return RunResult(nxt, steps, apps)
        if isinstance(s.code[0], IApp):
            apps += 1
        s = nxt
        steps += 1


def run_until(s: MState, target: MState, limit: int) -> Optional[int]:
    """Transitions needed to get from ``s`` to ``target``, if within ``limit``."""
    for steps in range(limit + 1):
        if s == target:
            return steps
        nxt = machine_step(s)
        if not isinstance(nxt, MState):
            return None
        s = nxt
    return None


def run(code: Code, limit: int = 10_000) -> RunResult:
    """Run ``code`` from an empty stack and environment."""
    return run_state(MState(code), limit)


def trace_states(code: Code, limit: int = 10_000) -> list[MState]:
    """Every state visited by :func:`run`, initial state first."""
    states = [MState(code)]
    while len(states) <= limit:
        nxt = machine_step(states[-1])
        if not isinstance(nxt, MState):
            break
        states.append(nxt)
    return states


def show_code(code: Code, indent: int = 0) -> list[str]:
    """Assembly listing, one instruction per line, closure bodies indented."""
    pad = "  " * indent
    lines: list[str] = []
    for instr in code:
        match instr:
            case IVar(n):
                lines.append(f"{pad}Var({n})")
            case IConst(c):
                lines.append(f"{pad}Const({c})")
            case IClos(body):
                lines.append(f"{pad}Clos(")
                lines += show_code(body, indent + 1)
                lines.append(f"{pad})")
            case IApp():
                lines.append(f"{pad}App")
            case IRet():
                lines.append(f"{pad}Ret")
            case INop():
                lines.append(f"{pad}Nop")
    return lines


def show_mvalue(v: MValue) -> str:
    if isinstance(v, MConst):
        return str(v.value)
    return f"<closure of {len(v.code)} instructions, env size {len(v.env)}>"


def show_state(s: MState) -> str:
    def slot(x: StackSlot) -> str:
        if isinstance(x, Frame):
            return f"({len(x.code)} instrs, env {len(x.env)})"
        return show_mvalue(x)

    code = " ".join(" ".join(line.strip() for line in show_code((i,))) for i in s.code[:4])
    if len(s.code) > 4:
        code += " ..."
    stack = ".".join(slot(x) for x in s.stack) or "e"
    return f"code: {code or 'e'} | stack: {stack} | env size: {len(s.env)}"
