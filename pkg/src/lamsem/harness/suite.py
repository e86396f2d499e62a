"""Corpus, generated suites and JSON reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Optional

from .. import bigstep
from ..syntax import BIG_OMEGA, Term, parse, show
from .check import Budget, Converges, DivergesUpTo, GoesWrong, TermClass, Undecided, Verdict, classify_term
from .gen import GenConfig, gen_terms

# depths at which the CPS suite tests coevaluation
CPS_DEPTHS = (1, 3, 10, 50)


@dataclass(frozen=True)
class CorpusEntry:
    term: Term
    expected: str  # "diverges", "wrong <term>" or "converges <steps> <value>"

    def matches(self, cls: TermClass) -> bool:
        kind, _, rest = self.expected.partition(" ")
        match cls:
            case DivergesUpTo():
                return kind == "diverges"
            case GoesWrong(stuck):
                return kind == "wrong" and parse(rest) is stuck
            case Converges(value, steps):
                n, _, v = rest.partition(" ")
                return kind == "converges" and int(n) == steps and parse(v) is value
        return False


def load_corpus(text: Optional[str] = None) -> tuple[list[CorpusEntry], list[Term]]:
    """Regression terms with expected verdicts, and the corpus values."""
    if text is None:
        text = resources.files("lamsem.harness").joinpath("corpus.txt").read_text()
    entries: list[CorpusEntry] = []
    values: list[Term] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(" | ")]
        if len(fields) != 3:
            raise ValueError(f"corpus line {lineno}: expected 3 fields")
        kind, expected, term = fields
        if kind == "term":
            entries.append(CorpusEntry(parse(term), expected))
        elif kind == "value":
            values.append(parse(term))
        else:
            raise ValueError(f"corpus line {lineno}: unknown entry kind {kind!r}")
    return entries, values


def class_json(cls: TermClass) -> dict:
    match cls:
        case Converges(value, steps):
            return {"kind": "converges", "value": show(value), "steps": steps}
        case DivergesUpTo(fuel):
            return {"kind": "diverges_up_to", "fuel": fuel}
        case GoesWrong(stuck):
            return {"kind": "goes_wrong", "stuck": show(stuck)}
        case Undecided(reason):
            return {"kind": "undecided", "reason": reason}
    raise TypeError(cls)


def verdict_json(v: Verdict) -> dict:
    return {
        "term": v.term,
        "class": class_json(v.cls),
        "agreements": dict(sorted(v.agreements.items())),
        "timings": {k: round(t, 6) for k, t in sorted(v.timings.items())},
    }


def make_report(config: dict, verdicts: list[Verdict]) -> dict:
    """Report with verdicts sorted by term text and pass/fail counts."""
    verdicts = sorted(verdicts, key=lambda v: v.term)
    by_check: dict[str, dict[str, int]] = {}
    for v in verdicts:
        for name, ok in v.agreements.items():
            counts = by_check.setdefault(name, {"pass": 0, "fail": 0})
            counts["pass" if ok else "fail"] += 1
    passed = sum(v.ok for v in verdicts)
    return {
        "config": config,
        "verdicts": [verdict_json(v) for v in verdicts],
        "summary": {
            "pass": passed,
            "fail": len(verdicts) - passed,
            "by_check": dict(sorted(by_check.items())),
        },
    }


def run_suite(cfg: GenConfig, budget: Budget = Budget()) -> dict:
    """Classify every generated term and report all cross-checks."""
    verdicts = [classify_term(a, budget) for a in gen_terms(cfg)]
    return make_report({**asdict(cfg), **asdict(budget)}, verdicts)


def cps_verdict(b: Term, budget: Budget = Budget(), depths=CPS_DEPTHS) -> Verdict:
    """Coevaluation of a closed CPS term to its value, or to Omega if it diverges."""
    v = classify_term(b, budget)
    target = None
    if isinstance(v.cls, Converges):
        target = v.cls.value
    elif isinstance(v.cls, DivergesUpTo):
        target = BIG_OMEGA
    checks: dict[str, bool] = {}
    if target is not None:
        for k in sorted({*depths, budget.coeval_depth}):
            checks[f"coeval_k{k}"] = bigstep.coeval_approx(b, target, k, budget.fuel)
    return Verdict(v.term, v.cls, checks, v.timings)


def cps_theorem_suite(cfg: GenConfig, budget: Budget = Budget()) -> dict:
    """Generated CPS terms coevaluate to their value, or to Omega when diverging.

    Terms that go wrong are exempt and carry no checks.
    """
    if cfg.mode != "cps-closed":
        raise ValueError("the CPS suite needs mode 'cps-closed'")
    verdicts = [cps_verdict(b, budget) for b in gen_terms(cfg)]
    return make_report({**asdict(cfg), **asdict(budget)}, verdicts)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False)
