"""Similarity-based recall, precision and F1 of a mined rule set against a ground truth."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

from .core import Rule


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for n, y in enumerate(b):
            cur.append(prev[n] + 1 if x == y else max(prev[n + 1], cur[n]))
        prev = cur
    return prev[-1]


def lcs_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Edit distance with insertions and deletions only."""
    return len(a) + len(b) - 2 * lcs_length(a, b)


def pattern_sim(a: Sequence[int], b: Sequence[int]) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - lcs_distance(a, b) / (len(a) + len(b))


def rule_sim(r1: Rule, r2: Rule) -> float:
    return (0.5 * pattern_sim(r1.head + r1.tail, r2.head + r2.tail)
            + 0.25 * pattern_sim(r1.head, r2.head)
            + 0.25 * pattern_sim(r1.tail, r2.tail))


def _rules(rules: Iterable[Rule], drop_singletons: bool) -> List[Rule]:
    return [r for r in rules if not (drop_singletons and r.singleton)]


def recall(truth: Iterable[Rule], mined: Iterable[Rule], drop_singletons: bool = True) -> float:
    truth, mined = _rules(truth, drop_singletons), _rules(mined, drop_singletons)
    if not truth:
        return 1.0 if not mined else 0.0
    if not mined:
        return 0.0
    return sum(max(rule_sim(t, m) for m in mined) for t in truth) / len(truth)


def precision(truth: Iterable[Rule], mined: Iterable[Rule], drop_singletons: bool = True) -> float:
    truth, mined = _rules(truth, drop_singletons), _rules(mined, drop_singletons)
    if not mined:
        return 1.0 if not truth else 0.0
    if not truth:
        return 0.0
    best = [max(rule_sim(t, m) for t in truth) for m in mined]
    # stable sort keeps the mined order among equal similarities
    top = sorted(best, key=lambda x: -x)[:len(truth)]
    return sum(top) / len(mined)


@dataclass
class EvalReport:
    recall: float
    precision: float
    f1: float
    matches: List[Tuple[Rule, Rule, float]] = field(default_factory=list)


def f1(truth: Iterable[Rule], mined: Iterable[Rule], drop_singletons: bool = True) -> EvalReport:
    truth, mined = _rules(truth, drop_singletons), _rules(mined, drop_singletons)
    rec = recall(truth, mined, False)
    prec = precision(truth, mined, False)
    score = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    matches = []
    for t in truth:
        if mined:
            m = max(mined, key=lambda m: rule_sim(t, m))
            matches.append((t, m, rule_sim(t, m)))
    return EvalReport(rec, prec, score, matches)
