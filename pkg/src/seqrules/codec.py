"""Description lengths: model cost L(R), data cost L(D|R) and the code streams.

Data is described by three streams of per-rule symbols: trigger codes
(hit/miss, or a selector for empty-head rules), delay codes (start/delay)
and gap codes (fill/gap). Every code is charged with a prequential code
whose alphabet is fixed by the model, so the decoder can reproduce it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .core import (Pattern, Rule, RuleIndex, RuleSet, RuleWindow, SearchParams,
                   SequenceDatabase, UsageError)

C0 = 2.865064
LOG2_C0 = math.log2(C0)
PREQUENTIAL_C = 0.5
_LN2 = math.log(2.0)

HIT, MISS, SELECT = "hit", "miss", "select"
START, DELAY = "start", "delay"
FILL, GAP = "fill", "gap"


class CorruptStream(ValueError):
    """Raised by the decoder when the streams do not describe a database."""


def universal_int(n: int) -> float:
    """Bits for ``n >= 1`` under the universal code for integers."""
    if n < 1:
        raise UsageError(f"universal_int needs n >= 1, got {n}")
    bits = LOG2_C0
    x = math.log2(n)
    while x > 0:
        bits += x
        x = math.log2(x)
    return bits


def prequential_length(stream: Iterable[Hashable], alphabet_size: int,
                       alphabet: Optional[Iterable[Hashable]] = None) -> float:
    """Code length of ``stream`` under the prequential plug-in code with c = 0.5.

    Symbol ``i`` (1-based) costs ``-log2((n_before + c) / (i - 1 + U * c))``.
    """
    if alphabet_size < 1:
        raise UsageError("alphabet_size must be >= 1")
    allowed = None if alphabet is None else set(alphabet)
    counts: Counter = Counter()
    bits = 0.0
    for i, s in enumerate(stream):
        if allowed is not None and s not in allowed:
            raise UsageError(f"symbol {s!r} outside the declared alphabet")
        if s not in counts and len(counts) >= alphabet_size:
            raise UsageError("stream uses more distinct symbols than alphabet_size")
        bits -= math.log2((counts[s] + PREQUENTIAL_C) / (i + alphabet_size * PREQUENTIAL_C))
        counts[s] += 1
    return bits


def prequential_from_counts(counts: Iterable[int], alphabet_size: int) -> float:
    """Same length as :func:`prequential_length`, from symbol counts alone.

    For a fixed alphabet size the prequential code length does not depend on
    the order of the symbols.
    """
    c = PREQUENTIAL_C
    total = 0
    nats = 0.0
    lg_c = math.lgamma(c)
    for n in counts:
        if n:
            nats += math.lgamma(n + c) - lg_c
            total += n
    if not total:
        return 0.0
    uc = alphabet_size * c
    nats -= math.lgamma(total + uc) - math.lgamma(uc)
    return -nats / _LN2


# ---------------------------------------------------------------------------
# model cost


@dataclass(frozen=True)
class ModelCost:
    l_patterns: float
    l_rules: float

    @property
    def total(self) -> float:
        return self.l_patterns + self.l_rules


def pattern_set(rules: Iterable[Rule]) -> set:
    """Non-empty heads and tails of length at least two."""
    out = set()
    for r in rules:
        if len(r.head) > 1:
            out.add(r.head)
        if len(r.tail) > 1:
            out.add(r.tail)
    return out


def _pattern_bits(p: Pattern, log_omega: float) -> float:
    return universal_int(len(p)) + len(p) * log_omega


def model_length(rules: RuleSet, alphabet_size: Optional[int] = None) -> ModelCost:
    omega = rules.alphabet_size if alphabet_size is None else alphabet_size
    log_omega = math.log2(omega) if omega > 0 else 0.0
    patterns = pattern_set(rules.extra)
    l_p = universal_int(len(patterns) + 1) + sum(_pattern_bits(p, log_omega) for p in patterns)
    n = len(rules)
    choices = len(patterns) + omega
    l_r = universal_int(n + 1) + n * (math.log2(choices + 1) + math.log2(choices))
    return ModelCost(l_p, l_r)


def rule_encoded_size(rule: Rule, rules: RuleSet) -> float:
    """Bits attributable to ``rule``: its own pattern terms plus its two choices."""
    omega = rules.alphabet_size
    log_omega = math.log2(omega) if omega > 0 else 0.0
    bits = 0.0
    for p in (rule.head, rule.tail):
        if len(p) > 1:
            bits += _pattern_bits(p, log_omega)
    choices = len(pattern_set(rules.extra)) + omega
    return bits + math.log2(choices + 1) + math.log2(choices)


# ---------------------------------------------------------------------------
# data cost


@dataclass(frozen=True)
class DataCost:
    l_counts: float
    l_t: float
    l_d: float
    l_g: float

    @property
    def total(self) -> float:
        return self.l_counts + self.l_t + self.l_d + self.l_g


def stream_alphabet_sizes(rules: Iterable[Rule]) -> Tuple[int, int, int]:
    """Alphabet sizes of the selector sub-stream and of each per-rule delay and gap sub-stream."""
    empty = sum(1 for r in rules if r.empty_head)
    return empty, 2, 2


def length_counts(db: SequenceDatabase) -> float:
    if len(db) == 0:
        raise UsageError("empty database")
    bits = universal_int(len(db))
    for s in db.sequences:
        if not s:
            raise UsageError("sequences must contain at least one event")
        bits += universal_int(len(s))
    return bits


def data_length(db: SequenceDatabase, rules: RuleSet, cover) -> DataCost:
    """L(D|R) of ``cover``, computed from per-rule code counts.

    Selectors of empty-head rules share one sub-stream of C_t; every other
    code is read in the context of a known rule, so each rule has its own
    binary hit/miss, start/delay and fill/gap sub-streams.
    """
    selects: List[int] = []
    l_t = l_d = l_g = 0.0
    for r in rules:
        used = cover.usage.get(r, 0)
        if r.empty_head:
            selects.append(used)
        else:
            l_t += prequential_from_counts((used, cover.triggers[r] - used), 2)
            l_d += prequential_from_counts((used, cover.delay_total.get(r, 0)), 2)
        if len(r.tail) > 1:
            l_g += prequential_from_counts((used * (len(r.tail) - 1), cover.gap_total.get(r, 0)), 2)
    l_t += prequential_from_counts(selects, len(selects))
    return DataCost(length_counts(db), l_t, l_d, l_g)


def total_score(db: SequenceDatabase, rules: RuleSet, cover) -> float:
    """L(R) + L(D|R) in bits."""
    return model_length(rules).total + data_length(db, rules, cover).total


# ---------------------------------------------------------------------------
# streams


@dataclass
class CodeStreams:
    trigger: List[Tuple[Rule, str]] = field(default_factory=list)
    delay: List[Tuple[Rule, str]] = field(default_factory=list)
    gap: List[Tuple[Rule, str]] = field(default_factory=list)


def substreams(stream: Iterable[Tuple[Rule, str]]) -> Dict[object, List[Tuple[Rule, str]]]:
    """Split a stream into the selector sub-stream and one sub-stream per rule."""
    out: Dict[object, List[Tuple[Rule, str]]] = {}
    for sym in stream:
        key = SELECT if sym[1] == SELECT else sym[0]
        out.setdefault(key, []).append(sym)
    return out


def stream_lengths(streams: CodeStreams, rules: RuleSet) -> Tuple[float, float, float]:
    """Prequential lengths of the three streams, evaluated symbol by symbol."""
    n_empty = stream_alphabet_sizes(rules)[0]
    out = []
    for stream in (streams.trigger, streams.delay, streams.gap):
        bits = 0.0
        for key, sub in substreams(stream).items():
            bits += prequential_length(sub, n_empty if key == SELECT else 2)
        out.append(bits)
    return tuple(out)


def serialize_streams(db: SequenceDatabase, rules: RuleSet, windows: Sequence[RuleWindow],
                      params: Optional[SearchParams] = None) -> CodeStreams:
    """Encode ``db`` with the cover ``windows`` into the three code streams."""
    params = params or SearchParams()
    index = RuleIndex(db, params)
    canon = rules.index
    conditional = [r for r in rules if not r.empty_head]
    streams = CodeStreams()
    by_seq: Dict[int, List[RuleWindow]] = {}
    for w in windows:
        if w.rule not in canon:
            raise UsageError(f"cover uses rule {w.rule} outside the model")
        by_seq.setdefault(w.seq_index, []).append(w)
    for s, seq in enumerate(db.sequences):
        n = len(seq)
        owner = [None] * (n + 1)
        hits: Dict[Tuple[Rule, int, int], RuleWindow] = {}
        starts: Dict[int, RuleWindow] = {}
        for w in by_seq.get(s, []):
            for p in w.positions:
                if not 1 <= p <= n or owner[p] is not None:
                    raise UsageError(f"cover is not exact at sequence {s}, position {p}")
                owner[p] = w
            if w.rule.empty_head:
                starts[w.k] = w
            else:
                hits[(w.rule, w.i, w.j)] = w
        if any(o is None for o in owner[1:]):
            raise UsageError(f"cover leaves positions of sequence {s} uncovered")
        ends: Dict[int, List[Tuple[Rule, int]]] = {}
        for r in conditional:
            for i, j in index.triggers(r.head)[s]:
                ends.setdefault(j, []).append((r, i))
        pending: List[RuleWindow] = []
        started: List[List] = []  # [window, index of next tail symbol]
        for p in range(1, n + 1):
            writer = None
            newly = None
            still = []
            for w in pending:
                if w.k == p:
                    streams.delay.append((w.rule, START))
                    writer = w
                    if len(w.positions) > 1:
                        newly = [w, 1]
                else:
                    streams.delay.append((w.rule, DELAY))
                    still.append(w)
            pending = still
            keep = []
            for item in started:
                w, nxt = item
                if w.positions[nxt] == p:
                    streams.gap.append((w.rule, FILL))
                    writer = w
                    item[1] += 1
                    if item[1] < len(w.positions):
                        keep.append(item)
                else:
                    streams.gap.append((w.rule, GAP))
                    keep.append(item)
            started = keep
            if writer is None:
                w = starts.get(p)
                if w is None or owner[p] is not w:
                    raise UsageError(f"position {p} of sequence {s} is written by no rule")
                streams.trigger.append((w.rule, SELECT))
                writer = w
                if len(w.positions) > 1:
                    newly = [w, 1]
            if writer is not owner[p]:
                raise UsageError(f"cover ordering conflict at sequence {s}, position {p}")
            if newly is not None:
                started.append(newly)
            for r, i in ends.get(p, ()):
                w = hits.get((r, i, p))
                if w is None:
                    streams.trigger.append((r, MISS))
                else:
                    streams.trigger.append((r, HIT))
                    pending.append(w)
        if pending or started:
            raise UsageError(f"unfinished rule instances at the end of sequence {s}")
    return streams


def _head_window_ending(head: Pattern, occ: Dict[int, List[int]], p: int) -> Optional[int]:
    """Start of the minimal window of ``head`` ending at ``p`` in the prefix indexed by ``occ``."""

    def latest_start(end):
        q = end
        for e in reversed(head[:-1]):
            lst = occ.get(e, ())
            prev = [x for x in lst if x < q]
            if not prev:
                return None
            q = prev[-1]
        return q

    ends = occ.get(head[-1], ())
    if not ends or ends[-1] != p:
        return None
    i = latest_start(p)
    if i is None:
        return None
    if len(ends) > 1:
        i_prev = latest_start(ends[-2])
        if i_prev is not None and i_prev >= i:
            return None
    return i


def decode(streams: CodeStreams, rules: RuleSet, seq_lengths: Sequence[int],
           params: Optional[SearchParams] = None, tokens: Optional[Sequence[str]] = None
           ) -> SequenceDatabase:
    """Rebuild the database from its code streams."""
    params = params or SearchParams()
    canon = rules.index
    conditional = [r for r in rules if not r.empty_head]
    t_it, d_it, g_it = iter(streams.trigger), iter(streams.delay), iter(streams.gap)

    def read(it, name, rule=None):
        try:
            sym = next(it)
        except StopIteration:
            raise CorruptStream(f"{name} stream exhausted") from None
        if sym[0] not in canon or (rule is not None and sym[0] != rule):
            raise CorruptStream(f"unexpected {name} symbol {sym!r}")
        return sym

    out = []
    for n in seq_lengths:
        seq: List[int] = []
        occ: Dict[int, List[int]] = {}
        pending: List[Rule] = []
        started: List[List] = []  # [rule, index of next tail symbol]
        for p in range(1, n + 1):
            written = []
            newly = None
            still = []
            for r in pending:
                _, code = read(d_it, "delay", r)
                if code == START:
                    written.append(r.tail[0])
                    if len(r.tail) > 1:
                        newly = [r, 1]
                elif code == DELAY:
                    still.append(r)
                else:
                    raise CorruptStream(f"bad delay code {code!r}")
            pending = still
            keep = []
            for item in started:
                r, nxt = item
                _, code = read(g_it, "gap", r)
                if code == FILL:
                    written.append(r.tail[nxt])
                    item[1] += 1
                    if item[1] < len(r.tail):
                        keep.append(item)
                elif code == GAP:
                    keep.append(item)
                else:
                    raise CorruptStream(f"bad gap code {code!r}")
            started = keep
            if not written:
                r, code = read(t_it, "trigger")
                if code != SELECT or not r.empty_head:
                    raise CorruptStream(f"expected a selector, got {(r, code)!r}")
                written.append(r.tail[0])
                if len(r.tail) > 1:
                    newly = [r, 1]
            if len(written) != 1:
                raise CorruptStream(f"{len(written)} rules write position {p}")
            if newly is not None:
                started.append(newly)
            e = written[0]
            seq.append(e)
            occ.setdefault(e, []).append(p)
            for r in conditional:
                i = _head_window_ending(r.head, occ, p)
                if i is None or (p - i + 1) - len(r.head) > params.gap_budget(len(r.head)):
                    continue
                _, code = read(t_it, "trigger", r)
                if code == HIT:
                    pending.append(r)
                elif code != MISS:
                    raise CorruptStream(f"bad trigger code {code!r}")
        if pending or started:
            raise CorruptStream("rule instances left unfinished at end of sequence")
        out.append(seq)
    for name, it in (("trigger", t_it), ("delay", d_it), ("gap", g_it)):
        if next(it, None) is not None:
            raise CorruptStream(f"trailing symbols in {name} stream")
    return SequenceDatabase(out, tokens, alphabet_size=rules.alphabet_size if tokens is None else None)
