"""Plain-text database, pattern and model files.

Database files hold one sequence per line as whitespace-separated tokens.
Lines starting with ``#`` are comments, except an optional
``# alphabet: t1 t2 ...`` header that fixes the token order (and may list
tokens that never occur) so a database survives a write/read cycle exactly.

Model files list the non-singleton rules, one per line, with optional stats
and an optional footer of description lengths::

    # alphabet: a b c d e
    rule  a b -> c d  supp=1  conf=0.5  usage=1
    L(R)    123.4
    L(D|R)  567.8
    total   691.2
    %L      3.5

Fields are tab separated. Singletons are implicit in every model.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .core import Rule, RuleSet, SequenceDatabase, UsageError

PathLike = Union[str, "os.PathLike[str]"]
ALPHABET_HEADER = "# alphabet:"
RESERVED = {"-", "->"}
FOOTER_KEYS = ("L(R)", "L(D|R)", "total", "%L")


class ParseError(ValueError):
    """Malformed input file; the message names the file and line."""

    def __init__(self, message: str, source: str = "<input>", line: Optional[int] = None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source, self.line = source, line


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        yield n, raw.strip()


def _check_token(tok: str, source: str, n: int):
    if tok in RESERVED:
        raise ParseError(f"token {tok!r} is reserved", source, n)


# ---------------------------------------------------------------------------
# databases


def parse_database(text: str, source: str = "<input>") -> SequenceDatabase:
    alphabet: Optional[List[str]] = None
    sequences: List[List[str]] = []
    for n, line in _lines(text):
        if line.startswith(ALPHABET_HEADER):
            if alphabet is not None or sequences:
                raise ParseError("alphabet header must come first and only once", source, n)
            alphabet = line[len(ALPHABET_HEADER):].split()
            for t in alphabet:
                _check_token(t, source, n)
            if len(set(alphabet)) != len(alphabet):
                raise ParseError("duplicate token in alphabet header", source, n)
            continue
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        for t in toks:
            _check_token(t, source, n)
            if alphabet is not None and t not in alphabet:
                raise ParseError(f"token {t!r} not in the alphabet header", source, n)
        sequences.append(toks)
    if not sequences:
        raise ParseError("empty database", source)
    return SequenceDatabase.from_tokens(sequences, alphabet)


def format_database(db: SequenceDatabase) -> str:
    out = [f"{ALPHABET_HEADER} {' '.join(db.tokens)}"]
    out.extend(" ".join(db.tokens[e] for e in s) for s in db.sequences)
    return "\n".join(out) + "\n"


def read_database(path: PathLike) -> SequenceDatabase:
    return parse_database(_read(path), str(path))


def write_database(db: SequenceDatabase, path: PathLike):
    _write(path, format_database(db))


def parse_patterns(text: str, db: SequenceDatabase, source: str = "<input>") -> List[Tuple[int, ...]]:
    """One pattern per line, tokens of ``db``; comments and blank lines skipped."""
    out = []
    for n, line in _lines(text):
        if not line or line.startswith("#"):
            continue
        try:
            out.append(db.encode(line.split()))
        except (KeyError, UsageError):
            bad = [t for t in line.split() if t not in db.token_ids]
            raise ParseError(f"unknown token {bad[0]!r}", source, n) from None
    return out


def read_patterns(path: PathLike, db: SequenceDatabase) -> List[Tuple[int, ...]]:
    return parse_patterns(_read(path), db, str(path))


# ---------------------------------------------------------------------------
# models


@dataclass
class RuleRecord:
    support: int
    confidence: float
    usage: int


@dataclass
class ModelFile:
    tokens: List[str]
    rules: RuleSet
    stats: Dict[Rule, RuleRecord] = field(default_factory=dict)
    footer: Dict[str, float] = field(default_factory=dict)

    def __eq__(self, other):
        return (isinstance(other, ModelFile) and self.tokens == other.tokens
                and list(self.rules.extra) == list(other.rules.extra)
                and self.stats == other.stats and self.footer == other.footer)


def format_model(model: ModelFile) -> str:
    out = [f"{ALPHABET_HEADER} {' '.join(model.tokens)}"]
    for r in model.rules.extra:
        fields = ["rule", r.format(model.tokens)]
        rec = model.stats.get(r)
        if rec is not None:
            fields += [f"supp={rec.support}", f"conf={rec.confidence!r}", f"usage={rec.usage}"]
        out.append("\t".join(fields))
    for key in FOOTER_KEYS:
        if key in model.footer:
            out.append(f"{key}\t{model.footer[key]!r}")
    return "\n".join(out) + "\n"


def _parse_pattern(text: str, ids: Dict[str, int], source: str, n: int) -> Tuple[int, ...]:
    toks = text.split()
    if toks == ["-"]:
        return ()
    out = []
    for t in toks:
        if t not in ids:
            raise ParseError(f"unknown token {t!r}", source, n)
        out.append(ids[t])
    return tuple(out)


def parse_model(text: str, source: str = "<input>") -> ModelFile:
    tokens: Optional[List[str]] = None
    rules: List[Rule] = []
    stats: Dict[Rule, RuleRecord] = {}
    footer: Dict[str, float] = {}
    ids: Dict[str, int] = {}
    for n, line in _lines(text):
        if line.startswith(ALPHABET_HEADER):
            if tokens is not None:
                raise ParseError("duplicate alphabet header", source, n)
            tokens = line[len(ALPHABET_HEADER):].split()
            ids = {t: e for e, t in enumerate(tokens)}
            if len(ids) != len(tokens):
                raise ParseError("duplicate token in alphabet header", source, n)
            continue
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        key = fields[0].strip()
        if tokens is None:
            raise ParseError("missing alphabet header", source, n)
        if key == "rule":
            if len(fields) < 2 or "->" not in fields[1]:
                raise ParseError("expected 'rule<TAB>head -> tail'", source, n)
            head_s, tail_s = fields[1].split("->", 1)
            head = _parse_pattern(head_s, ids, source, n)
            tail = _parse_pattern(tail_s, ids, source, n)
            if not tail:
                raise ParseError("rule tail must be non-empty", source, n)
            rule = Rule(head, tail)
            rules.append(rule)
            if len(fields) > 2:
                kv = {}
                for f in fields[2:]:
                    name, _, value = f.partition("=")
                    kv[name.strip()] = value.strip()
                try:
                    stats[rule] = RuleRecord(int(kv["supp"]), float(kv["conf"]), int(kv["usage"]))
                except (KeyError, ValueError):
                    raise ParseError("rule stats must be supp=<int> conf=<float> usage=<int>",
                                     source, n) from None
        elif key in FOOTER_KEYS:
            try:
                footer[key] = float(fields[1])
            except (IndexError, ValueError):
                raise ParseError(f"bad value for {key}", source, n) from None
        else:
            raise ParseError(f"unrecognised line starting with {key!r}", source, n)
    if tokens is None:
        raise ParseError("missing alphabet header", source)
    return ModelFile(tokens, RuleSet(len(tokens), rules), stats, footer)


def read_model(path: PathLike) -> ModelFile:
    return parse_model(_read(path), str(path))


def write_model(model: ModelFile, path: PathLike):
    _write(path, format_model(model))


def remap_rules(model: ModelFile, db: SequenceDatabase) -> RuleSet:
    """The model's rules re-coded into ``db``'s token ids."""
    def recode(p):
        try:
            return tuple(db.token_ids[model.tokens[e]] for e in p)
        except KeyError as exc:
            raise UsageError(f"model token {exc.args[0]!r} does not occur in the database") from None

    return RuleSet(db.alphabet_size, [Rule(recode(r.head), recode(r.tail)) for r in model.rules.extra])


# ---------------------------------------------------------------------------


def _read(path: PathLike) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: PathLike, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
