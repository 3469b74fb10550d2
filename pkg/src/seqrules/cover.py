"""Greedy cover of a database by rule windows."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import count
from typing import Dict, List, Optional

import numpy as np

from .core import Rule, RuleIndex, RuleSet, RuleStats, RuleWindow, SearchParams, SequenceDatabase


def window_order_key(window: RuleWindow, stats: RuleStats, canonical_index: int = 0) -> tuple:
    """Sort key realising the window order; smaller keys are selected first."""
    return (-len(window.rule.tail), -stats.confidence, -stats.support, window.slack, window.k,
            window.seq_index, window.i or 0, canonical_index)


@dataclass
class Cover:
    db: SequenceDatabase
    rules: RuleSet
    selected: List[RuleWindow]
    singleton_masks: List[np.ndarray]
    usage: Dict[Rule, int]
    delay_total: Dict[Rule, int]
    gap_total: Dict[Rule, int]
    triggers: Dict[Rule, int]
    _windows: Optional[List[RuleWindow]] = field(default=None, repr=False)

    @property
    def windows(self) -> List[RuleWindow]:
        """Every window of the cover, singleton fills included, ordered by (sequence, k)."""
        if self._windows is None:
            wins = list(self.selected)
            for s, mask in enumerate(self.singleton_masks):
                seq = self.db.sequences[s]
                for p in np.flatnonzero(mask).tolist():
                    e = seq[p - 1]
                    wins.append(RuleWindow(Rule((), (e,)), s, None, None, p, p, (p,)))
            wins.sort(key=lambda w: (w.seq_index, w.k))
            self._windows = wins
        return self._windows

    @property
    def covered(self) -> List[np.ndarray]:
        """Per sequence, the index into :attr:`windows` covering each position (slot 0 unused)."""
        out = [np.full(len(s) + 1, -1, dtype=np.int64) for s in self.db.sequences]
        for n, w in enumerate(self.windows):
            out[w.seq_index][list(w.positions)] = n
        return out


def cover(db: SequenceDatabase, rules: RuleSet, params: Optional[SearchParams] = None,
          index: Optional[RuleIndex] = None) -> Cover:
    """Select rule windows greedily in window order until every event is covered."""
    if index is None:
        index = RuleIndex(db, params)
    canon = rules.index
    groups: Dict[tuple, List[Rule]] = {}
    for r in rules:
        st = index.stats(r)
        groups.setdefault((-len(r.tail), -st.confidence, -st.support), []).append(r)

    covered = [bytearray(len(s) + 1) for s in db.sequences]
    masks = [np.zeros(len(s) + 1, dtype=bool) for s in db.sequences]
    remaining = db.total_events
    selected: List[RuleWindow] = []
    usage: Dict[Rule, int] = {}
    delays: Dict[Rule, int] = {}
    gaps: Dict[Rule, int] = {}
    batch: List[int] = []

    def flush():
        # singleton windows cover one position each and have no fallback,
        # so a run of singleton-only groups selects exactly the uncovered
        # occurrences of their events, whatever the order inside the run
        nonlocal remaining
        if not batch:
            return
        everything = len(batch) == db.alphabet_size
        syms = np.asarray(batch)
        total = np.zeros(db.alphabet_size, dtype=np.int64)
        for s, arr in enumerate(db.arrays):
            cov = np.frombuffer(covered[s], dtype=np.uint8)
            free = cov[1:] == 0
            if not everything:
                free &= np.isin(arr, syms)
            if not free.any():
                continue
            total += np.bincount(arr[free], minlength=db.alphabet_size)
            cov[1:][free] = 1
            masks[s][1:] |= free
        for e in np.flatnonzero(total).tolist():
            usage[Rule((), (e,))] = usage.get(Rule((), (e,)), 0) + int(total[e])
        remaining -= int(total.sum())
        batch.clear()

    tie = count()
    for gk in sorted(groups):
        if remaining <= 0:
            break
        members = groups[gk]
        if all(r.singleton for r in members):
            batch.extend(r.tail[0] for r in members)
            continue
        flush()
        heap = []
        for r in members:
            ci = canon[r]
            heap.extend((sl, k, sq, i, ci, next(tie), w) for sl, k, sq, i, w in index.heap_entries(r))
        heapq.heapify(heap)
        while heap and remaining > 0:
            item = heapq.heappop(heap)
            w = item[-1]
            cov = covered[item[2]]
            if any(cov[p] for p in w.positions):
                nw = index.next_best_window(w, cov.__getitem__)
                if nw is not None:
                    heapq.heappush(heap, (nw.slack, nw.k, nw.seq_index, nw.i or 0, item[4], next(tie), nw))
                continue
            for p in w.positions:
                cov[p] = 1
            remaining -= len(w.positions)
            selected.append(w)
            r = w.rule
            usage[r] = usage.get(r, 0) + 1
            if w.j is not None:
                delays[r] = delays.get(r, 0) + w.k - w.j - 1
            gaps[r] = gaps.get(r, 0) + w.l - w.k + 1 - len(w.positions)
    flush()
    triggers = {r: index.trigger_count(r) for r in rules.extra if not r.empty_head}
    return Cover(db, rules, selected, masks, usage, delays, gaps, triggers)
