"""Deterministic random generation of closed terms."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Literal

from ..syntax import Abs, App, Const, Term, Var

Mode = Literal["any-closed", "cps-closed", "typable"]
MODES: tuple[str, ...] = ("any-closed", "cps-closed", "typable")

NAMES = ("x", "y", "z", "f", "g")
CONSTANTS = (0, 1, 2, 3)
# App / Abs / Var / Const
WEIGHTS = (40, 30, 20, 10)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    count: int = 100
    max_size: int = 30
    mode: Mode = "any-closed"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_size < 1:
            raise ValueError("max_size must be at least 1")


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng

    def _kind(self, budget: int, scope: tuple[str, ...]) -> str:
        kinds, weights = [], []
        for kind, w in zip(("app", "abs", "var", "const"), WEIGHTS):
            if kind == "app" and budget < 3:
                continue
            if kind == "abs" and budget < 2:
                continue
            if kind == "var" and not scope:
                continue
            kinds.append(kind)
            weights.append(w)
        return self.rng.choices(kinds, weights)[0]

    def _leaf(self, kind: str, scope: tuple[str, ...]) -> Term:
        if kind == "var":
            return Var(self.rng.choice(scope))
        return Const(self.rng.choice(CONSTANTS))

    def _split(self, budget: int) -> tuple[int, int]:
        left = self.rng.randint(1, budget - 2)
        return left, budget - 1 - left

    def term(self, budget: int, scope: tuple[str, ...]) -> Term:
        kind = self._kind(budget, scope)
        if kind == "app":
            left, right = self._split(budget)
            return App(self.term(left, scope), self.term(right, scope))
        if kind == "abs":
            x = self.rng.choice(NAMES)
            return Abs(x, self.term(budget - 1, scope + (x,)))
        return self._leaf(kind, scope)

    def atom(self, budget: int, scope: tuple[str, ...]) -> Term:
        kind = self._kind(budget, scope)
        if kind == "abs" or (kind == "app" and budget >= 2):
            x = self.rng.choice(NAMES)
            return Abs(x, self.cps(budget - 1, scope + (x,)))
        if kind == "app":
            kind = "var" if scope else "const"
        return self._leaf(kind, scope)

    def cps(self, budget: int, scope: tuple[str, ...]) -> Term:
        """CPS term: an atom applied to zero or more atoms."""
        kind = self._kind(budget, scope)
        if kind == "app":
            left, right = self._split(budget)
            return App(self.cps(left, scope), self.atom(right, scope))
        return self.atom(budget, scope)


def gen_terms(cfg: GenConfig) -> list[Term]:
    """``cfg.count`` closed terms of size at most ``cfg.max_size``."""
    rng = random.Random(cfg.seed)
    gen = _Gen(rng)
    if cfg.mode == "any-closed":
        return [gen.term(rng.randint(1, cfg.max_size), ()) for _ in range(cfg.count)]
    if cfg.mode == "cps-closed":
        return [gen.cps(rng.randint(1, cfg.max_size), ()) for _ in range(cfg.count)]
    return _typable(gen, cfg)


def _typable(gen: _Gen, cfg: GenConfig) -> list[Term]:
    from ..types import IllTyped, infer

    out: list[Term] = []
    tries = 0
    while len(out) < cfg.count:
        tries += 1
        a = gen.term(gen.rng.randint(1, cfg.max_size), ())
        try:
            infer(a)
        except IllTyped:
            if tries >= 100 and len(out) < tries // 100:
                raise GenerationError(
                    f"typable generation rejected {tries - len(out)} of {tries} candidates"
                ) from None
            continue
        out.append(a)
    return out
