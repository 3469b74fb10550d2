"""Command-line interface: ``seqrules {mine,candidates,score,cover,gen,eval}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from .codec import data_length, model_length
from .core import Rule, RuleSet, SearchParams, SequenceDatabase
from .evaluation import f1
from .io import (ModelFile, RuleRecord, format_model, read_database, read_model, read_patterns,
                 remap_rules, write_database, write_model)
from .miner import MiningResult, Scorer, mine_from_patterns, mine_rules
from .synth import GenConfig, generate

log = logging.getLogger("seqrules")

DEFAULT_SEED = 0


def model_report(db: SequenceDatabase, rules: RuleSet, scorer: Scorer) -> ModelFile:
    """A model file for ``rules`` with per-rule stats and description lengths."""
    cov = scorer.cover(rules)
    l_model = model_length(rules).total
    l_data = data_length(db, rules, cov).total
    null = scorer.score(RuleSet(db.alphabet_size))
    total = l_model + l_data
    stats = {}
    for r in rules.extra:
        st = scorer.index.stats(r)
        stats[r] = RuleRecord(st.support, st.confidence, cov.usage.get(r, 0))
    footer = {"L(R)": l_model, "L(D|R)": l_data, "total": total,
              "%L": 100.0 * (1.0 - total / null)}
    return ModelFile(list(db.tokens), rules, stats, footer)


def _params(args) -> SearchParams:
    return SearchParams(max_gap=args.max_gap, max_delay=args.max_delay, alpha=args.alpha,
                        best_window=args.best_window)


def _emit(model: ModelFile, out: Optional[str]):
    if out:
        write_model(model, out)
    else:
        sys.stdout.write(format_model(model))


def _summary(result: MiningResult, model: ModelFile):
    print(f"passes\t{result.passes}\ncandidates_tested\t{result.candidates_tested}\n"
          f"runtime_s\t{result.runtime:.2f}\nrules\t{len(result.rules.extra)}\n"
          f"%L\t{model.footer['%L']:.3f}", file=sys.stderr)


def cmd_mine(args) -> int:
    db = read_database(args.database)
    scorer = Scorer(db, _params(args))
    result = mine_rules(db, pass_cap=args.pass_cap, scorer=scorer)
    model = model_report(db, result.rules, scorer)
    _emit(model, args.output)
    _summary(result, model)
    if args.dump_candidates:
        _dump_candidates(scorer, db, args.dump_candidates)
    return 0


def _dump_candidates(scorer: Scorer, db: SequenceDatabase, path: str):
    """Every candidate list generated during the run, as TSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("parent\tcandidate\tslot\tinserted\tp_value\n")
        for parent, cands in scorer.candidate_lists().items():
            for c in cands:
                fh.write(f"{parent.format(db.tokens)}\t{c.rule.format(db.tokens)}\t{c.position}\t"
                         f"{db.tokens[c.inserted]}\t{c.p_value:.6g}\n")


def cmd_candidates(args) -> int:
    db = read_database(args.database)
    patterns = read_patterns(args.patterns, db)
    scorer = Scorer(db, _params(args))
    result = mine_from_patterns(db, patterns, scorer=scorer)
    model = model_report(db, result.rules, scorer)
    _emit(model, args.output)
    _summary(result, model)
    return 0


def _load_pair(args):
    db = read_database(args.database)
    rules = remap_rules(read_model(args.model), db)
    return db, rules


def cmd_score(args) -> int:
    db, rules = _load_pair(args)
    model = model_report(db, rules, Scorer(db, _params(args)))
    for key, value in model.footer.items():
        print(f"{key}\t{value:.4f}")
    return 0


def cmd_cover(args) -> int:
    db, rules = _load_pair(args)
    cov = Scorer(db, _params(args)).cover(rules)
    print("seq_index\trule\ti\tj\tk\tl")
    for w in cov.windows:
        i = "-" if w.i is None else w.i
        j = "-" if w.j is None else w.j
        print(f"{w.seq_index}\t{w.rule.format(db.tokens)}\t{i}\t{j}\t{w.k}\t{w.l}")
    return 0


def cmd_gen(args) -> int:
    config = GenConfig(
        alphabet_size=args.alphabet_size, num_rules=args.num_rules, head_size=args.head_size,
        tail_size=args.tail_size, confidence=args.confidence,
        heads_as_patterns=not args.no_head_patterns, initial_length=args.length,
        noise_fraction=args.noise_fraction, delay_prob=args.delay_prob, gap_prob=args.gap_prob,
        destructive_noise_prob=args.destructive_noise, num_sequences=args.num_sequences,
        lexicographic=args.lexicographic, max_gap=args.max_gap, max_delay=args.max_delay,
        seed=args.seed)
    db, truth = generate(config)
    write_database(db, f"{args.prefix}.db")
    write_model(ModelFile(list(db.tokens), truth.rules), f"{args.prefix}.truth")
    with open(f"{args.prefix}.json", "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.prefix}.db ({db.total_events} events), {args.prefix}.truth "
          f"({len(truth.rules.extra)} rules), {args.prefix}.json", file=sys.stderr)
    return 0


def _as_token_rules(model: ModelFile) -> List[tuple]:
    return [(tuple(model.tokens[e] for e in r.head), tuple(model.tokens[e] for e in r.tail))
            for r in model.rules.extra]


def cmd_eval(args) -> int:
    mined, truth = read_model(args.mined), read_model(args.truth)
    ids: dict = {}

    def code(pairs):
        return [Rule(tuple(ids.setdefault(t, len(ids)) for t in h),
                     tuple(ids.setdefault(t, len(ids)) for t in tl)) for h, tl in pairs]

    t_rules = code(_as_token_rules(truth))
    m_rules = code(_as_token_rules(mined))
    rep = f1(t_rules, m_rules)
    print("recall\tprecision\tF1")
    print(f"{rep.recall:.4f}\t{rep.precision:.4f}\t{rep.f1:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--max-gap", type=float, default=2.0, help="gap budget ratio (default 2)")
    shared.add_argument("--max-delay", type=float, default=2.0, help="delay budget ratio (default 2)")
    shared.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    shared.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default 0)")
    shared.add_argument("--best-window", choices=("min-gaps", "nearest"), default="min-gaps")
    shared.add_argument("--pass-cap", type=int, default=50, help="maximum search passes")
    shared.add_argument("-v", "--verbose", action="store_true", help="log search progress")

    parser = argparse.ArgumentParser(prog="seqrules",
                                     description="Mine compressing sequential rules from event sequences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", parents=[shared], help="mine a rule set from a database")
    p.add_argument("database")
    p.add_argument("-o", "--output", help="model file (default: stdout)")
    p.add_argument("--dump-candidates", metavar="PATH",
                   help="write every generated candidate with its p-value as TSV (debugging)")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("candidates", parents=[shared], help="turn candidate patterns into rules")
    p.add_argument("database")
    p.add_argument("patterns", help="one pattern per line")
    p.add_argument("-o", "--output", help="model file (default: stdout)")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("score", parents=[shared], help="description lengths of a model")
    p.add_argument("database")
    p.add_argument("model")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("cover", parents=[shared], help="print the cover of a database as TSV")
    p.add_argument("database")
    p.add_argument("model")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("gen", parents=[shared], help="generate synthetic data with planted rules")
    p.add_argument("prefix", help="writes PREFIX.db, PREFIX.truth and PREFIX.json")
    p.add_argument("--alphabet-size", type=int, default=500)
    p.add_argument("--num-rules", type=int, default=20)
    p.add_argument("--head-size", type=int, default=2)
    p.add_argument("--tail-size", type=int, default=2)
    p.add_argument("--confidence", type=float, default=0.75)
    p.add_argument("--no-head-patterns", action="store_true",
                   help="do not plant heads as separate patterns")
    p.add_argument("--length", type=int, default=10000, help="events before tail insertion")
    p.add_argument("--noise-fraction", type=float, default=0.5)
    p.add_argument("--delay-prob", type=float, default=0.2)
    p.add_argument("--gap-prob", type=float, default=0.1)
    p.add_argument("--destructive-noise", type=float, default=0.0)
    p.add_argument("--num-sequences", type=int, default=1)
    p.add_argument("--lexicographic", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="recall, precision and F1 of a mined model against a truth model")
    p.add_argument("mined")
    p.add_argument("truth")
    p.set_defaults(func=cmd_eval, verbose=False)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except (OSError, ValueError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"seqrules: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
