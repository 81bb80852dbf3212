import json
import subprocess
import sys

import pytest

from reda.cli import main
from reda.pipeline import PairExample, read_corpus, write_corpus


@pytest.fixture
def toy(tmp_path, capsys):
    data, lex = tmp_path / "toy.tsv", tmp_path / "lex.tsv"
    assert main(["toygen", "--out", str(data), "--n", "600", "--lex-out", str(lex), "--seed", "1"]) == 0
    capsys.readouterr()
    return data, lex


def test_augment_output_is_superset(toy, tmp_path, capsys):
    data, lex = toy
    out = tmp_path / "aug.tsv"
    assert main(["augment", "--in", str(data), "--out", str(out), "--lex", str(lex), "--ops", "sr,rd"]) == 0
    text = capsys.readouterr().out
    assert "input_pairs 600" in text and "sr.produced" in text and "rm.produced" not in text
    original, augmented = read_corpus(data).examples, read_corpus(out).examples
    assert augmented[:len(original)] == original
    assert len(original) < len(augmented) <= len(original) * (1 + 2 * 2 * 2)
    report = (tmp_path / "aug.tsv.report.csv").read_text().splitlines()
    assert report[0].startswith("op,") and len(report) == 3


def test_augment_is_reproducible(toy, tmp_path):
    data, lex = toy
    outs = []
    for i, jobs in enumerate(("1", "2")):
        out = tmp_path / f"aug{i}.tsv"
        main(["augment", "--in", str(data), "--out", str(out), "--lex", str(lex), "--seed", "7",
              "--jobs", jobs])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_stats_output(tmp_path, capsys):
    path = tmp_path / "c.tsv"
    write_corpus([PairExample(f"q{i}", f"r{i}", i % 2) for i in range(12_500)], path)
    assert main(["stats", "--in", str(path)]) == 0
    assert capsys.readouterr().out == "total 12500 matched 6250 mismatched 6250\n"


def test_malformed_input_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.tsv"
    path.write_text("a\tb\t1\nc\td\t0\nbroken line\n", encoding="utf-8")
    assert main(["stats", "--in", str(path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("reda: error:") and "bad.tsv:3:" in err


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["stats", "--in", str(tmp_path / "nope.tsv")]) == 1
    assert "reda: error:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["augment", "--in", "x", "--out", "y", "--bogus"],
    ["augment", "--in", "x", "--out", "y", "--ops", "sr,zz"],
    ["augment", "--in", "x", "--out", "y", "--rate-sr", "2"],
    ["split", "--in", "x", "--out", "y", "--sizes", "1,2"],
    ["nosuchcommand"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_split_writes_balanced_files(toy, tmp_path, capsys):
    data, _ = toy
    out = tmp_path / "splits"
    assert main(["split", "--in", str(data), "--out", str(out), "--sizes", "200,100,100"]) == 0
    assert "test total 100 matched 50 mismatched 50" in capsys.readouterr().out
    for name, n in (("train", 200), ("dev", 100), ("test", 100)):
        assert len(read_corpus(out / f"{name}.tsv")) == n


def test_split_insufficient_is_runtime_error(toy, tmp_path, capsys):
    data, _ = toy
    assert main(["split", "--in", str(data), "--out", str(tmp_path / "s"), "--sizes", "600,100,100"]) == 1


def test_augment_train_eval_round_trip(toy, tmp_path, capsys):
    data, lex = toy
    splits = tmp_path / "s"
    main(["split", "--in", str(data), "--out", str(splits), "--sizes", "300,100,100"])
    aug = tmp_path / "aug.tsv"
    main(["augment", "--in", str(splits / "train.tsv"), "--out", str(aug), "--lex", str(lex)])
    model, metrics = tmp_path / "m.npz", tmp_path / "metrics.json"
    assert main(["train", "--in", str(aug), "--dev", str(splits / "dev.tsv"), "--out", str(model),
                 "--epochs", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1].startswith("epoch 2 train_loss") and "dev_accuracy" in lines[-1]
    assert main(["eval", "--in", str(splits / "test.tsv"), "--model", str(model), "--out", str(metrics)]) == 0
    printed = capsys.readouterr().out
    d = json.loads(metrics.read_text())
    assert 0 <= d["accuracy"] <= 1 and f"accuracy {d['accuracy']:.6f}" in printed


def test_sweep_writes_reproducible_outputs(toy, tmp_path, capsys):
    data, lex = toy
    blobs = []
    for i in range(2):
        out = tmp_path / f"sweep{i}.csv"
        assert main(["sweep", "--in", str(data), "--out", str(out), "--lex", str(lex), "--sizes", "50,100",
                     "--dev-size", "100", "--test-size", "100", "--epochs", "1"]) == 0
        blobs.append(out.read_bytes())
        assert (tmp_path / f"sweep{i}.sizes.csv").exists()
        meta = json.loads((tmp_path / f"sweep{i}.meta.json").read_text())
        assert meta["n_aug"] == {"50": 2, "100": 2}
    assert blobs[0] == blobs[1]
    assert "+ REDA" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "reda", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("reda ")
