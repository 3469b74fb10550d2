"""Domain types and window semantics for sequential rules.

Positions are 1-based in every public structure: ``S[p]`` is ``seq[p - 1]``.
A pattern is a plain tuple of integer event ids.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

Pattern = Tuple[int, ...]
Occurrences = Dict[int, List[int]]

BEST_WINDOW_MODES = ("min-gaps", "nearest")


class UsageError(ValueError):
    """Raised when an operation is called outside its contract."""


@dataclass(frozen=True)
class Rule:
    head: Pattern
    tail: Pattern

    def __post_init__(self):
        if not self.tail:
            raise UsageError("rule tail must be non-empty")
        object.__setattr__(self, "head", tuple(int(e) for e in self.head))
        object.__setattr__(self, "tail", tuple(int(e) for e in self.tail))
        object.__setattr__(self, "_hash", hash((self.head, self.tail)))

    def __hash__(self):
        return self._hash

    @property
    def empty_head(self) -> bool:
        return not self.head

    @property
    def singleton(self) -> bool:
        return not self.head and len(self.tail) == 1

    def __len__(self):
        return len(self.head) + len(self.tail)

    def format(self, tokens: Optional[Sequence[str]] = None) -> str:
        def fmt(p):
            if not p:
                return "-"
            return " ".join(tokens[e] if tokens is not None else str(e) for e in p)

        return f"{fmt(self.head)} -> {fmt(self.tail)}"

    def __repr__(self):
        return f"Rule({self.format()})"


@lru_cache(maxsize=None)
def singleton(e: int) -> Rule:
    return Rule((), (e,))


@lru_cache(maxsize=64)
def _singletons(alphabet_size: int) -> Tuple[Rule, ...]:
    return tuple(singleton(e) for e in range(alphabet_size))


@dataclass(frozen=True)
class SearchParams:
    max_gap: float = 2.0
    max_delay: float = 2.0
    alpha: float = 0.05
    best_window: str = "min-gaps"

    def __post_init__(self):
        if self.max_gap < 0 or self.max_delay < 0:
            raise UsageError("max_gap and max_delay must be non-negative")
        if not 0 < self.alpha < 1:
            raise UsageError("alpha must lie in (0, 1)")
        if self.best_window not in BEST_WINDOW_MODES:
            raise UsageError(f"best_window must be one of {BEST_WINDOW_MODES}")

    def gap_budget(self, length: int) -> int:
        return math.floor(self.max_gap * length + 1e-9)

    def delay_budget(self, length: int) -> int:
        return math.floor(self.max_delay * length + 1e-9)


@dataclass(frozen=True)
class RuleStats:
    trigger_count: int
    support: int
    confidence: float


@dataclass(frozen=True)
class RuleWindow:
    """One placement ``S[i,j;k,l]`` of a rule; ``i``/``j`` are None for empty heads.

    ``positions`` are the positions inside ``[k, l]`` matched by the tail
    symbols, i.e. the positions this window covers.
    """

    rule: Rule
    seq_index: int
    i: Optional[int]
    j: Optional[int]
    k: int
    l: int
    positions: Tuple[int, ...]

    @property
    def covered_positions(self) -> Tuple[int, ...]:
        return self.positions

    @property
    def delay(self) -> int:
        return 0 if self.j is None else self.k - self.j - 1

    @property
    def gaps(self) -> int:
        return self.l - self.k + 1 - len(self.rule.tail)

    @property
    def slack(self) -> int:
        """Delay plus tail gaps, i.e. ``l - j - |tail|`` (tail gaps for empty heads)."""
        return self.delay + self.gaps


class SequenceDatabase:
    """Ordered collection of integer-coded event sequences.

    ``tokens[e]`` is the external name of event ``e``; the alphabet is
    ``range(len(tokens))`` and may contain events that never occur.
    """

    def __init__(self, sequences: Iterable[Sequence[int]], tokens: Optional[Sequence[str]] = None,
                 alphabet_size: Optional[int] = None):
        self.sequences: List[Tuple[int, ...]] = [tuple(int(e) for e in s) for s in sequences]
        if tokens is None:
            top = max((max(s) for s in self.sequences if s), default=-1)
            size = alphabet_size if alphabet_size is not None else top + 1
            tokens = [str(e) for e in range(size)]
        self.tokens: List[str] = list(tokens)
        self.token_ids = {t: e for e, t in enumerate(self.tokens)}
        if len(self.token_ids) != len(self.tokens):
            raise UsageError("duplicate tokens in alphabet")
        for s in self.sequences:
            for e in s:
                if not 0 <= e < len(self.tokens):
                    raise UsageError(f"event id {e} outside alphabet of size {len(self.tokens)}")
        self.arrays = [np.asarray(s, dtype=np.int64) for s in self.sequences]
        self._occ: List[Optional[Occurrences]] = [None] * len(self.sequences)
        self._freq: Optional[np.ndarray] = None

    @classmethod
    def from_tokens(cls, sequences: Iterable[Sequence[str]], tokens: Optional[Sequence[str]] = None):
        sequences = [list(s) for s in sequences]
        if tokens is None:
            seen = {}
            for s in sequences:
                for t in s:
                    seen.setdefault(t, len(seen))
            tokens = list(seen)
        ids = {t: e for e, t in enumerate(tokens)}
        try:
            coded = [[ids[t] for t in s] for s in sequences]
        except KeyError as exc:
            raise UsageError(f"unknown token {exc.args[0]!r}") from None
        return cls(coded, tokens)

    @property
    def alphabet_size(self) -> int:
        return len(self.tokens)

    @property
    def total_events(self) -> int:
        return sum(len(s) for s in self.sequences)

    def __len__(self):
        return len(self.sequences)

    def __eq__(self, other):
        return (isinstance(other, SequenceDatabase) and self.sequences == other.sequences
                and self.tokens == other.tokens)

    def occurrences(self, seq_index: int) -> Occurrences:
        occ = self._occ[seq_index]
        if occ is None:
            occ = _occurrences(self.sequences[seq_index])
            self._occ[seq_index] = occ
        return occ

    @property
    def frequencies(self) -> np.ndarray:
        if self._freq is None:
            freq = np.zeros(self.alphabet_size, dtype=np.int64)
            for a in self.arrays:
                freq += np.bincount(a, minlength=self.alphabet_size)
            self._freq = freq
        return self._freq

    def encode(self, tokens: Sequence[str]) -> Pattern:
        try:
            return tuple(self.token_ids[t] for t in tokens)
        except KeyError as exc:
            raise UsageError(f"unknown token {exc.args[0]!r}") from None

    def decode(self, pattern: Sequence[int]) -> List[str]:
        return [self.tokens[e] for e in pattern]


def _occurrences(seq: Sequence[int]) -> Occurrences:
    occ: Occurrences = {}
    for p, e in enumerate(seq, start=1):
        occ.setdefault(e, []).append(p)
    return occ


# ---------------------------------------------------------------------------
# pattern windows


def _minimal_windows(pattern: Pattern, occ: Occurrences, max_gaps: Optional[int]) -> List[Tuple[int, int]]:
    m = len(pattern)
    ends = occ.get(pattern[-1])
    if not ends:
        return []
    lists = []
    for e in pattern[:-1]:
        lst = occ.get(e)
        if not lst:
            return []
        lists.append(lst)
    lists.reverse()
    out = []
    prev_start = 0
    for j in ends:
        # latest start i such that pattern occurs in S[i, j]
        p = j
        for lst in lists:
            idx = bisect_left(lst, p) - 1
            if idx < 0:
                p = 0
                break
            p = lst[idx]
        if p == 0:
            continue
        if p > prev_start:
            prev_start = p
            if max_gaps is None or j - p + 1 - m <= max_gaps:
                out.append((p, j))
    return out


def minimal_windows(pattern: Sequence[int], seq: Sequence[int], max_gap: Optional[float] = None
                    ) -> List[Tuple[int, int]]:
    """Minimal windows ``(i, j)`` of ``pattern`` in ``seq``, left to right.

    Windows with more than ``max_gap * |pattern|`` gap events are dropped;
    ``max_gap=None`` keeps all of them.
    """
    pattern = tuple(pattern)
    if not pattern:
        raise UsageError("minimal_windows needs a non-empty pattern")
    budget = None if max_gap is None else math.floor(max_gap * len(pattern) + 1e-9)
    return _minimal_windows(pattern, _occurrences(seq), budget)


def embed(pattern: Sequence[int], occ: Occurrences, start: int, limit: int,
          blocked: Optional[Callable[[int], bool]] = None) -> Optional[Tuple[int, ...]]:
    """Leftmost embedding of ``pattern`` anchored at ``start`` and ending by ``limit``.

    ``S[start]`` must equal ``pattern[0]``; positions for which ``blocked``
    returns True are skipped.
    """
    pos = [start]
    p = start
    for e in pattern[1:]:
        lst = occ.get(e)
        if not lst:
            return None
        idx = bisect_right(lst, p)
        if blocked is not None:
            while idx < len(lst) and blocked(lst[idx]):
                idx += 1
        if idx >= len(lst) or lst[idx] > limit:
            return None
        p = lst[idx]
        pos.append(p)
    return tuple(pos)


def is_subsequence(pattern: Sequence[int], seq: Sequence[int]) -> bool:
    it = iter(seq)
    return all(any(e == x for x in it) for e in pattern)


# ---------------------------------------------------------------------------
# rule windows


class RuleIndex:
    """Per-database cache of rule windows and statistics.

    Windows depend only on the rule, the data and the search parameters, so
    they are computed once per rule and reused across covers.
    """

    def __init__(self, db: SequenceDatabase, params: Optional[SearchParams] = None):
        self.db = db
        self.params = params or SearchParams()
        self._triggers: Dict[Pattern, List[List[Tuple[int, int]]]] = {}
        self._tails: Dict[Pattern, List[Tuple[List[int], List[Tuple[int, ...]]]]] = {}
        self._windows: Dict[Rule, List[RuleWindow]] = {}
        self._stats: Dict[Rule, RuleStats] = {}
        self._heap: Dict[Rule, List[tuple]] = {}

    def triggers(self, head: Pattern) -> List[List[Tuple[int, int]]]:
        """Head minimal windows per sequence, subject to the head gap budget."""
        out = self._triggers.get(head)
        if out is None:
            budget = self.params.gap_budget(len(head))
            out = [_minimal_windows(head, self.db.occurrences(s), budget) for s in range(len(self.db))]
            self._triggers[head] = out
        return out

    def tail_windows(self, tail: Pattern):
        """Per sequence: (sorted starts, matched positions) of tail minimal windows within the gap budget."""
        out = self._tails.get(tail)
        if out is None:
            budget = self.params.gap_budget(len(tail))
            out = []
            for s in range(len(self.db)):
                occ = self.db.occurrences(s)
                wins = _minimal_windows(tail, occ, budget)
                starts = [k for k, _ in wins]
                placed = [embed(tail, occ, k, l) for k, l in wins]
                out.append((starts, placed))
            self._tails[tail] = out
        return out

    def trigger_count(self, rule: Rule) -> int:
        if rule.empty_head:
            return self.db.total_events
        return sum(len(t) for t in self.triggers(rule.head))

    def best_windows(self, rule: Rule) -> List[RuleWindow]:
        wins = self._windows.get(rule)
        if wins is None:
            wins = self._best_windows(rule)
            self._windows[rule] = wins
        return wins

    def _best_windows(self, rule: Rule) -> List[RuleWindow]:
        tails = self.tail_windows(rule.tail)
        out = []
        if rule.empty_head:
            for s, (starts, placed) in enumerate(tails):
                for pos in placed:
                    out.append(RuleWindow(rule, s, None, None, pos[0], pos[-1], pos))
            return out
        m = len(rule.tail)
        max_d = self.params.delay_budget(m)
        nearest = self.params.best_window == "nearest"
        for s, trig in enumerate(self.triggers(rule.head)):
            starts, placed = tails[s]
            if not starts:
                continue
            for i, j in trig:
                lo = bisect_left(starts, j + 1)
                hi = bisect_right(starts, j + 1 + max_d)
                if lo >= hi:
                    continue
                if nearest:
                    pos = placed[lo]
                else:
                    # fewest gaps, then lowest delay (= earliest start)
                    pos = min(placed[lo:hi], key=lambda p: p[-1] - p[0])
                out.append(RuleWindow(rule, s, i, j, pos[0], pos[-1], pos))
        return out

    def heap_entries(self, rule: Rule) -> List[tuple]:
        """``(slack, k, seq_index, i, window)`` for every best window, for the cover's heap."""
        out = self._heap.get(rule)
        if out is None:
            out = [(w.slack, w.k, w.seq_index, w.i or 0, w) for w in self.best_windows(rule)]
            self._heap[rule] = out
        return out

    def stats(self, rule: Rule) -> RuleStats:
        st = self._stats.get(rule)
        if st is None:
            trig = self.trigger_count(rule)
            supp = len(self.best_windows(rule))
            st = RuleStats(trig, supp, supp / trig if trig else 0.0)
            self._stats[rule] = st
        return st

    def next_best_window(self, window: RuleWindow, blocked: Callable[[int], bool]) -> Optional[RuleWindow]:
        """Best tail placement for the window's trigger avoiding blocked positions."""
        rule = window.rule
        m = len(rule.tail)
        occ = self.db.occurrences(window.seq_index)
        if rule.empty_head:
            lo = hi = window.k
        else:
            lo = window.j + 1
            hi = window.j + 1 + self.params.delay_budget(m)
        pos = _place_tail(rule.tail, occ, lo, hi, self.params.gap_budget(m), blocked,
                          self.params.best_window == "nearest")
        if pos is None:
            return None
        return RuleWindow(rule, window.seq_index, window.i, window.j, pos[0], pos[-1], pos)


def _place_tail(tail: Pattern, occ: Occurrences, lo: int, hi: int, max_g: int,
                blocked: Callable[[int], bool], nearest: bool) -> Optional[Tuple[int, ...]]:
    m = len(tail)
    firsts = occ.get(tail[0], [])
    start = bisect_left(firsts, lo)
    cands = []
    for idx in range(start, len(firsts)):
        k = firsts[idx]
        if k > hi:
            break
        if blocked(k):
            continue
        pos = embed(tail, occ, k, k + m - 1 + max_g, blocked)
        if pos is not None:
            cands.append((idx, pos))
    if not cands:
        return None
    if not nearest:
        return min((pos for _, pos in cands), key=lambda p: p[-1] - p[0])
    for idx, pos in cands:
        l = pos[-1]
        minimal = True
        for k2 in firsts[idx + 1:]:
            if k2 > l:
                break
            if blocked(k2):
                continue
            if embed(tail, occ, k2, l, blocked) is not None:
                minimal = False
                break
        if minimal:
            return pos
    return None


def _blocker(covered) -> Callable[[int], bool]:
    if isinstance(covered, (set, frozenset)):
        return covered.__contains__
    return lambda p: bool(covered[p])


# ---------------------------------------------------------------------------
# functional API


def trigger_count(rule: Rule, db: SequenceDatabase, params: Optional[SearchParams] = None) -> int:
    return RuleIndex(db, params).trigger_count(rule)


def best_rule_windows(rule: Rule, db: SequenceDatabase, params: Optional[SearchParams] = None
                      ) -> List[RuleWindow]:
    return RuleIndex(db, params).best_windows(rule)


def rule_stats(rule: Rule, db: SequenceDatabase, params: Optional[SearchParams] = None) -> RuleStats:
    """Trigger count, support and confidence of ``rule`` on ``db``.

    Empty-head rules trigger at every event, so their confidence is their
    support relative to ``||D||``.
    """
    return RuleIndex(db, params).stats(rule)


def next_best_window(window: RuleWindow, covered, db: SequenceDatabase,
                     params: Optional[SearchParams] = None) -> Optional[RuleWindow]:
    """Next placement of ``window``'s tail whose matched positions are all uncovered.

    ``covered`` is a set of positions in the window's sequence, or anything
    indexable by position returning a truthy value for covered positions.
    """
    return RuleIndex(db, params).next_best_window(window, _blocker(covered))


class RuleSet:
    """A model: every singleton rule plus non-singleton rules in insertion order.

    Iteration follows the canonical order (singletons by event id, then the
    other rules as inserted). Instances are treated as immutable; ``with_rule``
    and ``without_rule`` return new sets.
    """

    def __init__(self, alphabet_size: int, rules: Iterable[Rule] = ()):
        self.alphabet_size = int(alphabet_size)
        extra: List[Rule] = []
        seen = set()
        for r in rules:
            if r.singleton:
                if r.tail[0] >= self.alphabet_size:
                    raise UsageError(f"singleton {r} outside alphabet")
                continue
            if any(e >= self.alphabet_size or e < 0 for e in r.head + r.tail):
                raise UsageError(f"rule {r} uses events outside the alphabet")
            if r not in seen:
                seen.add(r)
                extra.append(r)
        self.extra: Tuple[Rule, ...] = tuple(extra)
        self._order: Optional[Dict[Rule, int]] = None

    @property
    def singletons(self) -> Tuple[Rule, ...]:
        return _singletons(self.alphabet_size)

    def __iter__(self):
        yield from self.singletons
        yield from self.extra

    def __len__(self):
        return self.alphabet_size + len(self.extra)

    def __contains__(self, rule):
        if rule.singleton:
            return rule.tail[0] < self.alphabet_size
        return rule in self.index

    def __eq__(self, other):
        return (isinstance(other, RuleSet) and self.alphabet_size == other.alphabet_size
                and set(self.extra) == set(other.extra))

    def __hash__(self):
        return hash((self.alphabet_size, frozenset(self.extra)))

    def __repr__(self):
        return f"RuleSet(|Ω|={self.alphabet_size}, extra={list(self.extra)})"

    @property
    def index(self) -> Dict[Rule, int]:
        """Canonical rule index."""
        if self._order is None:
            self._order = {r: n for n, r in enumerate(self)}
        return self._order

    def with_rule(self, rule: Rule) -> "RuleSet":
        return RuleSet(self.alphabet_size, self.extra + (rule,))

    def without_rule(self, rule: Rule) -> "RuleSet":
        if rule.singleton:
            raise UsageError("singleton rules cannot be removed")
        return RuleSet(self.alphabet_size, [r for r in self.extra if r != rule])
