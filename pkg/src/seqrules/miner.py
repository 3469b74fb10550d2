"""Rule set search: growing a model from candidate extensions, or from given patterns."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .candgen import Candidate, cand_rules
from .codec import rule_encoded_size, total_score
from .core import Pattern, Rule, RuleIndex, RuleSet, SearchParams, SequenceDatabase, UsageError
from .cover import Cover, cover

log = logging.getLogger(__name__)

SCORE_TOL = 1e-9


def split(pattern: Sequence[int]) -> List[Rule]:
    """All rules ``p[:i] -> p[i:]`` for ``i = 0 .. |p| - 1``."""
    pattern = tuple(pattern)
    if not pattern:
        raise UsageError("cannot split an empty pattern")
    return [Rule(pattern[:i], pattern[i:]) for i in range(len(pattern))]


def gain_threshold(alpha: float) -> int:
    return math.ceil(math.log2(1.0 / alpha) - 1e-12)


def significant_gain(old_bits: float, new_bits: float, alpha: float = 0.05) -> bool:
    """No-hypercompression test: does the new model save at least log2(1/alpha) bits?"""
    return old_bits - new_bits >= gain_threshold(alpha) - SCORE_TOL


class Scorer:
    """Scores models on one database, sharing rule windows across calls."""

    def __init__(self, db: SequenceDatabase, params: Optional[SearchParams] = None):
        self.db = db
        self.params = params or SearchParams()
        self.index = RuleIndex(db, self.params)
        self.evaluations = 0
        self._candidates: Dict[Rule, List[Candidate]] = {}

    def cover(self, rules: RuleSet) -> Cover:
        return cover(self.db, rules, self.params, self.index)

    def score(self, rules: RuleSet) -> float:
        self.evaluations += 1
        return total_score(self.db, rules, self.cover(rules))

    def candidates(self, rule: Rule) -> List[Candidate]:
        cands = self._candidates.get(rule)
        if cands is None:
            cands = cand_rules(self.db, rule, self.params, self.index)
            self._candidates[rule] = cands
        return cands

    def candidate_lists(self) -> Dict[Rule, List[Candidate]]:
        """Candidate lists generated so far, keyed by parent rule."""
        return dict(self._candidates)


@dataclass
class Update:
    kind: str
    rule: Rule
    replaced: Optional[Rule]
    before: float
    after: float


@dataclass
class MiningResult:
    rules: RuleSet
    score: float
    null_score: float
    passes: int = 0
    candidates_tested: int = 0
    evaluations: int = 0
    runtime: float = 0.0
    updates: List[Update] = field(default_factory=list)
    pruned: List[Rule] = field(default_factory=list)
    converged: bool = True

    @property
    def compression(self) -> float:
        """Percentage of bits saved against the singleton-only model."""
        return 100.0 * (1.0 - self.score / self.null_score)


def prune_order(rules: RuleSet, cov: Cover) -> List[Rule]:
    canon = rules.index
    return sorted(rules.extra, key=lambda r: (cov.usage.get(r, 0), -rule_encoded_size(r, rules),
                                              len(r.tail), canon[r]))


def prune(db: SequenceDatabase, rules: RuleSet, params: Optional[SearchParams] = None,
          scorer: Optional[Scorer] = None, removed: Optional[List[Rule]] = None) -> RuleSet:
    """Drop non-singleton rules whose removal strictly lowers the total score."""
    scorer = scorer or Scorer(db, params)
    cov = scorer.cover(rules)
    current = total_score(db, rules, cov)
    for r in prune_order(rules, cov):
        trial = rules.without_rule(r)
        bits = scorer.score(trial)
        if bits < current - SCORE_TOL:
            log.debug("pruned %s (%.3f -> %.3f)", r, current, bits)
            rules, current = trial, bits
            if removed is not None:
                removed.append(r)
    return rules


def extend_order(rules: RuleSet, index: RuleIndex) -> List[Rule]:
    canon = rules.index

    def key(r):
        st = index.stats(r)
        return (-st.support, -st.confidence, -len(r.tail), -len(r.head), canon[r])

    return sorted(rules, key=key)


def mine_rules(db: SequenceDatabase, params: Optional[SearchParams] = None, pass_cap: int = 50,
               scorer: Optional[Scorer] = None) -> MiningResult:
    """Grow a rule set from the singletons by significant extensions, pruning after each update."""
    if len(db) == 0 or db.total_events == 0:
        raise UsageError("empty database")
    started = time.perf_counter()
    scorer = scorer or Scorer(db, params)
    alpha = scorer.params.alpha
    rules = RuleSet(db.alphabet_size)
    score = scorer.score(rules)
    result = MiningResult(rules, score, score)
    pruned: set = set()
    converged = False
    for npass in range(1, pass_cap + 1):
        result.passes = npass
        updated_any = False
        for r in extend_order(rules, scorer.index):
            if r not in rules:
                continue
            for cand in scorer.candidates(r):
                new = cand.rule
                if new in rules or new in pruned:
                    continue
                result.candidates_tested += 1
                trial = rules.with_rule(new)
                bits = scorer.score(trial)
                update = None
                if significant_gain(score, bits, alpha):
                    update = Update("add", new, None, score, bits)
                elif not r.singleton:
                    trial = rules.without_rule(r).with_rule(new)
                    bits = scorer.score(trial)
                    if significant_gain(score, bits, alpha):
                        update = Update("replace", new, r, score, bits)
                if update is None:
                    continue
                log.info("%s %s: %.2f -> %.2f bits", update.kind, new, score, bits)
                result.updates.append(update)
                removed: List[Rule] = []
                rules = prune(db, trial, scorer=scorer, removed=removed)
                pruned.update(removed)
                result.pruned.extend(removed)
                score = scorer.score(rules)
                updated_any = True
                break
        if not updated_any:
            converged = True
            break
    result.rules = rules
    result.score = score
    result.converged = converged
    result.evaluations = scorer.evaluations
    result.runtime = time.perf_counter() - started
    return result


def pattern_contributions(db: SequenceDatabase, patterns: Sequence[Pattern], scorer: Scorer
                          ) -> List[float]:
    """``L(D, F \\ {p}) - L(D, F)`` per pattern, with every pattern as an empty-head rule."""
    omega = db.alphabet_size
    as_rules = [Rule((), p) for p in patterns]
    full = RuleSet(omega, as_rules)
    base = scorer.score(full)
    out = []
    for r in as_rules:
        if r.singleton:
            out.append(0.0)
            continue
        out.append(scorer.score(full.without_rule(r)) - base)
    return out


def mine_from_patterns(db: SequenceDatabase, patterns: Iterable[Sequence[int]],
                       params: Optional[SearchParams] = None, scorer: Optional[Scorer] = None
                       ) -> MiningResult:
    """Turn candidate patterns into rules by keeping each pattern's best split if it helps."""
    if len(db) == 0 or db.total_events == 0:
        raise UsageError("empty database")
    started = time.perf_counter()
    scorer = scorer or Scorer(db, params)
    omega = db.alphabet_size
    uniq: List[Pattern] = []
    for p in patterns:
        p = tuple(int(e) for e in p)
        if not p:
            continue
        if any(not 0 <= e < omega for e in p):
            raise UsageError(f"pattern {p} uses events outside the alphabet")
        if p not in uniq:
            uniq.append(p)
    rules = RuleSet(omega)
    score = scorer.score(rules)
    result = MiningResult(rules, score, score)
    if uniq:
        gains = pattern_contributions(db, uniq, scorer)
        order = sorted(range(len(uniq)), key=lambda n: (-gains[n], n))
        for n in order:
            best = None
            for r in split(uniq[n]):
                if r in rules:
                    continue
                result.candidates_tested += 1
                bits = scorer.score(rules.with_rule(r))
                if best is None or bits < best[0] - SCORE_TOL:
                    best = (bits, r)
            if best is not None and best[0] < score - SCORE_TOL:
                result.updates.append(Update("add", best[1], None, score, best[0]))
                rules = rules.with_rule(best[1])
                score = best[0]
    result.passes = 1
    result.rules = rules
    result.score = score
    result.evaluations = scorer.evaluations
    result.runtime = time.perf_counter() - started
    return result
