import json
import subprocess
import sys

import numpy as np
import pytest

from seqrules.cli import main
from seqrules.io import read_database, read_model


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    d = tmp_path_factory.mktemp("gen")
    prefix = str(d / "toy")
    assert main(["gen", prefix, "--alphabet-size", "40", "--num-rules", "2", "--length", "800",
                 "--seed", "3"]) == 0
    return d, prefix


def test_gen_writes_three_files(generated):
    d, prefix = generated
    db = read_database(prefix + ".db")
    truth = read_model(prefix + ".truth")
    config = json.loads(open(prefix + ".json").read())
    assert db.total_events > 800
    assert len(truth.rules.extra) == 4
    assert config["seed"] == 3 and config["alphabet_size"] == 40


def test_gen_is_reproducible(generated, tmp_path):
    _, prefix = generated
    again = str(tmp_path / "again")
    main(["gen", again, "--alphabet-size", "40", "--num-rules", "2", "--length", "800", "--seed", "3"])
    assert open(again + ".db").read() == open(prefix + ".db").read()


def test_gen_rejects_bad_probability(tmp_path, capsys):
    assert main(["gen", str(tmp_path / "x"), "--noise-fraction", "1.5"]) != 0
    err = capsys.readouterr().err.strip()
    assert err.startswith("seqrules: error:") and "\n" not in err


def test_mine_score_cover_eval(generated, tmp_path, capsys):
    _, prefix = generated
    model_path = str(tmp_path / "toy.model")
    dump = str(tmp_path / "cands.tsv")
    assert main(["mine", prefix + ".db", "-o", model_path, "--dump-candidates", dump]) == 0
    summary = capsys.readouterr().err
    assert "passes" in summary and "candidates_tested" in summary
    model = read_model(model_path)
    assert model.footer["%L"] >= 0
    assert open(dump).readline().startswith("parent\tcandidate")

    assert main(["score", prefix + ".db", model_path]) == 0
    lines = dict(line.split("\t") for line in capsys.readouterr().out.strip().splitlines())
    assert float(lines["%L"]) == pytest.approx(model.footer["%L"], abs=1e-3)

    assert main(["cover", prefix + ".db", model_path]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "seq_index\trule\ti\tj\tk\tl"
    db = read_database(prefix + ".db")
    assert sum(len(r.split("\t")[1].split("->")[1].split()) for r in rows[1:]) == db.total_events

    assert main(["eval", model_path, prefix + ".truth"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "recall\tprecision\tF1"
    assert 0.0 <= float(out[1].split("\t")[2]) <= 1.0


def test_singleton_model_scores_zero_percent(generated, tmp_path, capsys):
    _, prefix = generated
    db = read_database(prefix + ".db")
    path = tmp_path / "null.model"
    path.write_text("# alphabet: " + " ".join(db.tokens) + "\n")
    assert main(["score", prefix + ".db", str(path)]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.strip().splitlines())
    assert float(out["%L"]) == 0.0


def test_eval_identical_and_two_rule_case(tmp_path, capsys):
    truth = tmp_path / "t.model"
    truth.write_text("# alphabet: a b\nrule\ta -> b\n")
    mined = tmp_path / "m.model"
    mined.write_text("# alphabet: a b c d\nrule\ta -> b\nrule\tc -> d\n")
    main(["eval", str(truth), str(truth)])
    assert capsys.readouterr().out.splitlines()[1] == "1.0000\t1.0000\t1.0000"
    main(["eval", str(mined), str(truth)])
    rec, prec, f1 = map(float, capsys.readouterr().out.splitlines()[1].split("\t"))
    assert (rec, prec, f1) == (1.0, 0.5, pytest.approx(0.6667, abs=1e-4))


def test_error_paths(tmp_path, capsys):
    empty = tmp_path / "empty.db"
    empty.write_text("# nothing here\n")
    assert main(["mine", str(empty)]) != 0
    assert "empty database" in capsys.readouterr().err

    assert main(["eval", str(tmp_path / "missing"), str(empty)]) != 0
    assert "No such file" in capsys.readouterr().err

    db = tmp_path / "d.db"
    db.write_text("a b c\n")
    model = tmp_path / "bad.model"
    model.write_text("# alphabet: a b zz\nrule\ta -> zz\n")
    assert main(["score", str(db), str(model)]) != 0
    assert "zz" in capsys.readouterr().err


def test_candidates_subcommand(tmp_path, capsys):
    rng = np.random.default_rng(0)
    filler = [f"w{n}" for n in range(30)]
    words = []
    for _ in range(150):
        words.extend(rng.choice(filler, 4).tolist())
        words.extend(["support", "vector"])
        if rng.random() < 0.6:
            words.append("machine")
    db = tmp_path / "text.db"
    db.write_text(" ".join(words) + "\n")
    pats = tmp_path / "p.txt"
    pats.write_text("support vector machine\n")
    out = tmp_path / "svm.model"
    assert main(["candidates", str(db), str(pats), "-o", str(out)]) == 0
    (rule,) = read_model(str(out)).rules.extra
    assert rule.head + rule.tail == tuple(read_model(str(out)).tokens.index(t)
                                          for t in ("support", "vector", "machine"))
    capsys.readouterr()

    pats.write_text("# no patterns\n")
    assert main(["candidates", str(db), str(pats), "-o", str(out)]) == 0
    assert read_model(str(out)).rules.extra == ()

    pats.write_text("support banana\n")
    assert main(["candidates", str(db), str(pats)]) != 0
    assert "p.txt:1" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    db = tmp_path / "d.db"
    db.write_text("a b a b a b\n")
    proc = subprocess.run([sys.executable, "-m", "seqrules.cli", "mine", str(db)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("# alphabet: a b")
    proc = subprocess.run([sys.executable, "-m", "seqrules.cli", "mine", str(tmp_path / "nope.db")],
                          capture_output=True, text=True)
    assert proc.returncode != 0 and len(proc.stderr.strip().splitlines()) == 1
