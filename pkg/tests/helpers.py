"""Random instances and cover checks shared by the unit and acceptance tests."""
import random

from oracles import minimal_windows

from seqrules import Rule, RuleSet, SearchParams, SequenceDatabase


def random_db(rng: random.Random, max_len=30, max_alphabet=5, max_seqs=3):
    omega = rng.randint(1, max_alphabet)
    seqs = [[rng.randrange(omega) for _ in range(rng.randint(1, max_len))]
            for _ in range(rng.randint(1, max_seqs))]
    return SequenceDatabase(seqs, alphabet_size=omega)


def random_pattern(rng: random.Random, omega: int, lo=1, hi=4):
    return tuple(rng.randrange(omega) for _ in range(rng.randint(lo, hi)))


def random_rule(rng: random.Random, omega: int, empty_head_prob=0.3):
    head = () if rng.random() < empty_head_prob else random_pattern(rng, omega, 1, 3)
    tail = random_pattern(rng, omega, 1 if head else 2, 3)
    return Rule(head, tail)


def frequent_rule(rng: random.Random, db: SequenceDatabase):
    """A rule cut out of a random stretch of the data, so that it actually fires."""
    s = db.sequences[rng.randrange(len(db))]
    if len(s) < 2:
        return random_rule(rng, db.alphabet_size)
    a = rng.randrange(len(s) - 1)
    b = rng.randint(a + 2, min(len(s), a + 5))
    piece = list(s[a:b])
    # optionally drop one inner symbol so gaps show up
    if len(piece) > 2 and rng.random() < 0.5:
        del piece[rng.randrange(1, len(piece) - 1)]
    cut = rng.randrange(len(piece))
    return Rule(tuple(piece[:cut]), tuple(piece[cut:]))


def random_model(rng: random.Random, db: SequenceDatabase, max_rules=5):
    rules = []
    for _ in range(rng.randint(0, max_rules)):
        rules.append(frequent_rule(rng, db) if rng.random() < 0.7 else random_rule(rng, db.alphabet_size))
    return RuleSet(db.alphabet_size, rules)


def random_params(rng: random.Random):
    return SearchParams(max_gap=rng.choice([0, 0.5, 1, 2]), max_delay=rng.choice([0, 1, 2]),
                        best_window=rng.choice(["min-gaps", "nearest"]))


def cover_problems(db: SequenceDatabase, cov, params: SearchParams):
    """Every violation of cover exactness and window budgets; empty when the cover is valid."""
    problems = []
    counts = [[0] * (len(s) + 1) for s in db.sequences]
    for w in cov.windows:
        r, seq = w.rule, db.sequences[w.seq_index]
        m = len(r.tail)
        pos = w.positions
        for p in pos:
            counts[w.seq_index][p] += 1
        if len(pos) != m or pos[0] != w.k or pos[-1] != w.l or list(pos) != sorted(set(pos)):
            problems.append(f"{w}: positions inconsistent with k, l")
        elif [seq[p - 1] for p in pos] != list(r.tail):
            problems.append(f"{w}: positions do not spell the tail")
        if (w.l - w.k + 1) - m > params.gap_budget(m):
            problems.append(f"{w}: tail gap budget exceeded")
        if r.head:
            if (w.i, w.j) not in minimal_windows(r.head, seq, params.max_gap):
                problems.append(f"{w}: head window is not a trigger")
            if not w.j < w.k:
                problems.append(f"{w}: tail does not follow head")
            elif w.k - w.j - 1 > params.delay_budget(m):
                problems.append(f"{w}: delay budget exceeded")
    for s, row in enumerate(counts):
        for p in range(1, len(row)):
            if row[p] != 1:
                problems.append(f"sequence {s} position {p} covered {row[p]} times")
    return problems
