"""Candidate rule extensions from events over-represented near rule windows."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (Rule, RuleIndex, RuleWindow, SearchParams, SequenceDatabase, UsageError,
                   embed)

SMALL_SAMPLE = 10


@dataclass(frozen=True)
class Candidate:
    rule: Rule
    parent: Rule
    position: str
    inserted: int
    p_value: float

    @property
    def slot(self) -> Tuple[str, int]:
        return self.position[0], int(self.position[1:])


def slots(rule: Rule) -> List[str]:
    """Insertion slots ``h0..h|head|`` then ``t0..t|tail|``."""
    return [f"h{n}" for n in range(len(rule.head) + 1)] + [f"t{n}" for n in range(len(rule.tail) + 1)]


def insert(rule: Rule, event: int, position: str) -> Rule:
    part, n = position[0], int(position[1:])
    if part == "h":
        return Rule(rule.head[:n] + (event,) + rule.head[n:], rule.tail)
    return Rule(rule.head, rule.tail[:n] + (event,) + rule.tail[n:])


def _head_positions(window: RuleWindow, db: SequenceDatabase) -> Tuple[int, ...]:
    return embed(window.rule.head, db.occurrences(window.seq_index), window.i, window.j)


def gap_region(window: RuleWindow, position: str, db: SequenceDatabase,
               params: Optional[SearchParams] = None) -> List[int]:
    """Positions of ``window``'s gap at insertion slot ``position``."""
    params = params or SearchParams()
    rule = window.rule
    n_events = len(db.sequences[window.seq_index])
    reach = math.ceil(params.max_gap) + 1
    part, n = position[0], int(position[1:])
    head_len, tail_len = len(rule.head), len(rule.tail)
    if part == "h" and not 0 <= n <= head_len or part == "t" and not 0 <= n <= tail_len:
        raise UsageError(f"slot {position} does not exist for {rule}")
    first = window.k if rule.empty_head else window.i

    if part == "h" and n == 0 or rule.empty_head and part == "t" and n == 0:
        return list(range(max(1, first - reach), first))
    if part == "t" and n == tail_len:
        return list(range(window.l + 1, min(n_events, window.l + reach) + 1))
    if part == "h" and n == head_len or part == "t" and n == 0:
        return list(range(window.j + 1, window.k))
    if part == "h":
        pos = _head_positions(window, db)
    else:
        pos = window.positions
    return list(range(pos[n - 1] + 1, pos[n]))


def occurrence_probability(event: int, region_length: int, db: SequenceDatabase) -> float:
    """Chance that ``event`` shows up at least once among ``region_length`` random events."""
    if region_length < 0:
        raise UsageError("region_length must be >= 0")
    n_total = db.total_events
    supp = int(db.frequencies[event])
    if supp > n_total:
        raise UsageError("event support exceeds the number of events")
    return _occurrence_probability(supp / n_total, region_length)


def _occurrence_probability(rate: float, region_length) -> float:
    return 1.0 - (1.0 - rate) ** region_length


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def significance_test(count: int, probs: Sequence[float], alpha: float = 0.05) -> Tuple[bool, float]:
    """Is ``count`` significantly above the Poisson-binomial expectation of ``probs``?

    Above ten trials this uses the continuity-corrected normal approximation;
    otherwise the count must exceed the expectation by more than one, and the
    reported p-value is 0 (significant) or 1.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0:
        raise UsageError("significance_test needs at least one trial")
    if count > probs.size:
        raise UsageError("count exceeds the number of trials")
    mu = float(probs.sum())
    if probs.size <= SMALL_SAMPLE:
        hit = count > mu + 1
        return hit, 0.0 if hit else 1.0
    var = float((probs * (1.0 - probs)).sum())
    if var <= 0.0:
        hit = count > mu
        return hit, 0.0 if hit else 1.0
    p = normal_sf((count - 0.5 - mu) / math.sqrt(var))
    return p < alpha, p


def cand_rules(db: SequenceDatabase, rule: Rule, params: Optional[SearchParams] = None,
               index: Optional[RuleIndex] = None) -> List[Candidate]:
    """Significant single-event insertions into ``rule``, ordered by p-value."""
    if index is None:
        index = RuleIndex(db, params)
    params = index.params
    windows = index.best_windows(rule)
    if not windows:
        return []
    omega = db.alphabet_size
    rates = db.frequencies / max(db.total_events, 1)
    found = []
    for slot_no, position in enumerate(slots(rule)):
        hits = np.zeros(omega, dtype=np.int64)
        lengths = np.zeros(len(windows), dtype=np.int64)
        for n, w in enumerate(windows):
            region = gap_region(w, position, db, params)
            lengths[n] = len(region)
            if region:
                seq = db.sequences[w.seq_index]
                for e in {seq[p - 1] for p in region}:
                    hits[e] += 1
        events = np.flatnonzero(hits)
        if events.size == 0:
            continue
        # per window x event probabilities of appearing in the region
        probs = 1.0 - (1.0 - rates[events])[None, :] ** lengths[:, None]
        for col, e in enumerate(events.tolist()):
            ok, p = significance_test(int(hits[e]), probs[:, col], params.alpha)
            if ok:
                found.append((p, slot_no, e, position))
    found.sort()
    out = []
    seen = {rule}
    for p, _, e, position in found:
        new = insert(rule, e, position)
        if new in seen:
            continue
        seen.add(new)
        out.append(Candidate(new, rule, position, e, p))
    return out
