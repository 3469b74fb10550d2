"""Synthetic event sequences with planted rules."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Rule, RuleSet, RuleWindow, SearchParams, SequenceDatabase, _minimal_windows, _occurrences


class GenerationError(ValueError):
    pass


@dataclass
class GenConfig:
    alphabet_size: int = 500
    num_rules: int = 20
    head_size: int = 2
    tail_size: int = 2
    confidence: Union[float, Sequence[float]] = 0.75
    heads_as_patterns: bool = True
    initial_length: int = 10000
    noise_fraction: float = 0.5
    delay_prob: float = 0.2
    gap_prob: float = 0.1
    destructive_noise_prob: float = 0.0
    num_sequences: int = 1
    lexicographic: bool = False
    max_gap: float = 2.0
    max_delay: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.confidence, (list, tuple)):
            self.confidence = tuple(float(c) for c in self.confidence)
        self.validate()

    def validate(self):
        probs = {"noise_fraction": self.noise_fraction, "delay_prob": self.delay_prob,
                 "gap_prob": self.gap_prob, "destructive_noise_prob": self.destructive_noise_prob}
        confs = self.confidence if isinstance(self.confidence, tuple) else (self.confidence,)
        checks = list(probs.items()) + [("confidence", c) for c in confs]
        for name, v in checks:
            if not 0.0 <= v <= 1.0:
                raise GenerationError(f"{name} must lie in [0, 1], got {v}")
        if isinstance(self.confidence, tuple) and len(self.confidence) != self.num_rules:
            raise GenerationError("need one confidence per rule")
        if self.delay_prob >= 1.0 or self.gap_prob >= 1.0:
            raise GenerationError("delay_prob and gap_prob must be below 1")
        if self.alphabet_size < 1 or self.tail_size < 1 or self.head_size < 0:
            raise GenerationError("alphabet_size and tail_size must be >= 1, head_size >= 0")
        if self.head_size == 0 and self.tail_size < 2:
            raise GenerationError("empty-head rules need tails of length >= 2")
        if self.num_rules < 0 or self.initial_length < 1 or self.num_sequences < 1:
            raise GenerationError("num_rules >= 0, initial_length >= 1 and num_sequences >= 1 required")

    def rule_confidence(self, n: int) -> float:
        return self.confidence[n] if isinstance(self.confidence, tuple) else float(self.confidence)

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.confidence, tuple):
            d["confidence"] = list(self.confidence)
        return d


@dataclass
class GroundTruth:
    rules: RuleSet
    confidences: Dict[Rule, float]
    planted_windows: List[RuleWindow] = field(default_factory=list)
    outcomes: Dict[Rule, List[int]] = field(default_factory=dict)  # rule -> [hits, triggers]
    noise_events: int = 0
    initial_events: int = 0

    def realized_confidence(self, rule: Rule) -> Optional[float]:
        hits, trig = self.outcomes.get(rule, (0, 0))
        return hits / trig if trig else None


def _rng(config: GenConfig, rng):
    return rng if rng is not None else np.random.default_rng(config.seed)


def gen_ruleset(config: GenConfig, rng: Optional[np.random.Generator] = None) -> GroundTruth:
    """Random rules with heads and tails drawn uniformly with replacement."""
    rng = _rng(config, rng)
    omega = config.alphabet_size
    rules: List[Rule] = []
    confs: Dict[Rule, float] = {}
    n = 0
    attempts = 0
    while n < config.num_rules:
        attempts += 1
        if attempts > 1000 * max(config.num_rules, 1):
            raise GenerationError("cannot draw enough distinct rules; enlarge the alphabet")
        head = rng.integers(0, omega, config.head_size).tolist()
        tail = rng.integers(0, omega, config.tail_size).tolist()
        if config.lexicographic:
            head, tail = sorted(head), sorted(tail)
        r = Rule(tuple(head), tuple(tail))
        if r in confs or r.singleton:
            continue
        rules.append(r)
        confs[r] = config.rule_confidence(n)
        n += 1
        if config.heads_as_patterns and len(r.head) > 1:
            pattern = Rule((), r.head)
            if pattern not in confs:
                rules.append(pattern)
                confs[pattern] = 1.0
    return GroundTruth(RuleSet(omega, rules), confs)


def _geometric(rng, p: float, cap: int) -> int:
    """Number of skipped positions: skip one more while a coin with bias ``p`` says so."""
    n = 0
    while n < cap and rng.random() < p:
        n += 1
    return n


def _plant_block(rng, tail: Tuple[int, ...], config: GenConfig, params: SearchParams):
    """Tail symbols with random gap events between them; returns (events, tail offsets)."""
    budget = params.gap_budget(len(tail))
    events = [tail[0]]
    offsets = [0]
    for e in tail[1:]:
        g = _geometric(rng, config.gap_prob, budget)
        budget -= g
        events.extend(rng.integers(0, config.alphabet_size, g).tolist())
        offsets.append(len(events))
        events.append(e)
    return events, offsets


def gen_data(config: GenConfig, truth: GroundTruth, rng: Optional[np.random.Generator] = None
             ) -> Tuple[SequenceDatabase, GroundTruth]:
    """Generate sequences for ``truth``: noise plus planted patterns, then tails after triggers."""
    rng = _rng(config, rng)
    params = SearchParams(max_gap=config.max_gap, max_delay=config.max_delay)
    omega = config.alphabet_size
    patterns = [r for r in truth.rules.extra if r.empty_head]
    conditional = [r for r in truth.rules.extra if not r.empty_head]
    truth = GroundTruth(truth.rules, dict(truth.confidences))
    sequences = []
    for s in range(config.num_sequences):
        length = config.initial_length
        n_noise = int(round(config.noise_fraction * length)) if patterns else length
        units: List[Tuple[List[int], Optional[Rule], List[int]]] = []
        for e in rng.integers(0, omega, n_noise).tolist():
            units.append(([e], None, []))
        filled = 0
        while filled < length - n_noise:
            r = patterns[int(rng.integers(len(patterns)))]
            events, offsets = _plant_block(rng, r.tail, config, params)
            units.append((events, r, offsets))
            filled += len(events)
        seq: List[int] = []
        planted: List[Tuple[Rule, List[int]]] = []
        for n in rng.permutation(len(units)).tolist():
            events, r, offsets = units[n]
            if r is not None:
                planted.append((r, [len(seq) + 1 + o for o in offsets]))
            seq.extend(events)
        truth.noise_events += n_noise
        truth.initial_events += len(seq)

        # tails are inserted after original positions: (anchor, trigger no, order, event)
        inserts: List[Tuple[int, int, int, int]] = []
        instances = []  # (rule, i, j, insert ids, head positions)
        occ = _occurrences(seq)
        n_orig = len(seq)
        trig_no = 0
        for r in conditional:
            hits_trigs = truth.outcomes.setdefault(r, [0, 0])
            wins = _minimal_windows(r.head, occ, params.gap_budget(len(r.head)))
            conf = truth.confidences[r]
            for i, j in wins:
                hits_trigs[1] += 1
                if rng.random() >= conf:
                    continue
                hits_trigs[0] += 1
                anchor = min(j + _geometric(rng, config.delay_prob, params.delay_budget(len(r.tail))), n_orig)
                ids = []
                budget = params.gap_budget(len(r.tail))
                for t, e in enumerate(r.tail):
                    if t:
                        g = _geometric(rng, config.gap_prob, budget)
                        budget -= g
                        anchor = min(anchor + g, n_orig)
                    ids.append(len(inserts))
                    inserts.append((anchor, trig_no, t, e))
                instances.append((r, i, j, ids))
                trig_no += 1

        order = sorted(range(len(inserts)), key=lambda n: inserts[n][:3])
        final: List[int] = []
        orig_pos = [0] * (n_orig + 1)
        ins_pos = [0] * len(inserts)
        ptr = 0
        for p in range(0, n_orig + 1):
            if p:
                final.append(seq[p - 1])
                orig_pos[p] = len(final)
            while ptr < len(order) and inserts[order[ptr]][0] == p:
                n = order[ptr]
                final.append(inserts[n][3])
                ins_pos[n] = len(final)
                ptr += 1

        for r, pos in planted:
            fp = tuple(orig_pos[p] for p in pos)
            truth.planted_windows.append(RuleWindow(r, s, None, None, fp[0], fp[-1], fp))
        for r, i, j, ids in instances:
            fp = tuple(ins_pos[n] for n in ids)
            truth.planted_windows.append(RuleWindow(r, s, orig_pos[i], orig_pos[j], fp[0], fp[-1], fp))

        if config.destructive_noise_prob > 0:
            arr = np.asarray(final)
            flip = rng.random(arr.size) < config.destructive_noise_prob
            arr[flip] = rng.integers(0, omega, int(flip.sum()))
            final = arr.tolist()
        sequences.append(final)
    tokens = [f"e{e}" for e in range(omega)]
    return SequenceDatabase(sequences, tokens), truth


def generate(config: GenConfig) -> Tuple[SequenceDatabase, GroundTruth]:
    rng = np.random.default_rng(config.seed)
    truth = gen_ruleset(config, rng)
    return gen_data(config, truth, rng)
