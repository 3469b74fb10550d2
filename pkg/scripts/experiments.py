"""Reproduce the synthetic experiments as TSV tables.

    python3 scripts/experiments.py sanity
    python3 scripts/experiments.py noise --levels 0.2 0.6 1.0 --seeds 3
    python3 scripts/experiments.py confidence --levels 0.1 0.5 0.9
    python3 scripts/experiments.py random-trigger
    python3 scripts/experiments.py no-structure --seeds 20

Sizes default to the desk-scale setting (3000 events, 150 symbols, 8 rules);
pass ``--length``/``--alphabet-size``/``--num-rules`` for the full-size runs.
"""
import argparse
import sys

import numpy as np

from seqrules import GenConfig, Rule, RuleSet, SequenceDatabase, Scorer, f1, generate, mine_rules


def sanity(args):
    print("seed\ttruth\tX,Y\tXY\tX,XY\ttruth_best")
    for seed in range(args.seeds):
        db, truth = generate(GenConfig(num_rules=6, seed=seed))
        conds = [r for r in truth.rules.extra if r.head]
        alts = [
            [x for r in conds for x in (Rule((), r.head), Rule((), r.tail))],
            [Rule((), r.head + r.tail) for r in conds],
            [x for r in conds for x in (Rule((), r.head), Rule((), r.head + r.tail))],
        ]
        sc = Scorer(db)
        base = sc.score(truth.rules)
        scores = [sc.score(RuleSet(db.alphabet_size, a)) for a in alts]
        cells = "\t".join(f"{s:.1f}" for s in [base] + scores)
        print(f"{seed}\t{cells}\t{all(s > base for s in scores)}", flush=True)


def _sweep(args, name, make):
    print(f"{name}\tseed\tF1\trules\tcompression")
    for level in args.levels:
        for seed in range(args.seeds):
            db, truth = generate(make(level, seed))
            res = mine_rules(db)
            rep = f1(truth.rules, res.rules)
            print(f"{level}\t{seed}\t{rep.f1:.3f}\t{len(res.rules.extra)}\t{res.compression:.2f}", flush=True)


def _base(args, **kw):
    return dict(alphabet_size=args.alphabet_size, num_rules=args.num_rules,
                initial_length=args.length, **kw)


def noise(args):
    _sweep(args, "noise", lambda lv, s: GenConfig(**_base(args, destructive_noise_prob=lv, seed=s)))


def confidence(args):
    _sweep(args, "confidence", lambda lv, s: GenConfig(**_base(args, confidence=lv, seed=s)))


def random_trigger(args):
    # heads are never planted, so every trigger is a chance occurrence
    _sweep(args, "confidence", lambda lv, s: GenConfig(**_base(
        args, confidence=lv, head_size=1, tail_size=1, heads_as_patterns=False, seed=s)))


def no_structure(args):
    print("run\tlength\trules\tmax_confidence")
    for run in range(args.seeds):
        rng = np.random.default_rng(1000 + run)
        n = int(rng.integers(5000, 15001))
        db = SequenceDatabase([rng.integers(0, 500, n).tolist()], alphabet_size=500)
        sc = Scorer(db)
        res = mine_rules(db, scorer=sc)
        conf = max((sc.index.stats(r).confidence for r in res.rules.extra), default=0.0)
        print(f"{run}\t{n}\t{len(res.rules.extra)}\t{conf:.2f}", flush=True)


EXPERIMENTS = {"sanity": sanity, "noise": noise, "confidence": confidence,
               "random-trigger": random_trigger, "no-structure": no_structure}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--levels", type=float, nargs="+", default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--length", type=int, default=3000)
    p.add_argument("--alphabet-size", type=int, default=150)
    p.add_argument("--num-rules", type=int, default=8)
    args = p.parse_args(argv)
    EXPERIMENTS[args.experiment](args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
