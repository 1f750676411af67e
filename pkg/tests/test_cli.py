import numpy as np
import pytest

from rboost.cli import main
from rboost.datasets import make_blobs


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    ds = make_blobs(n_samples=240, n_classes=3, n_features=3, seed=9)
    letters = np.array(["x", "y", "z"])
    for name, rows in (("train.csv", slice(0, 160)), ("test.csv", slice(160, None))):
        with open(d / name, "w") as fh:
            for x, y in zip(ds.features[rows], ds.labels[rows]):
                fh.write(",".join(format(v, ".17g") for v in x) + f",{letters[y]}\n")
    return d


def _train(files, out, *extra):
    return main(["train", "--data", str(files / "train.csv"), "--format", "csv",
                 "--algo", "abc-logit", "--trees", "4", "--shrinkage", "0.1", "--iters", "12",
                 "--test", str(files / "test.csv"), "--model-out", str(out), *extra])


def test_train_predict_eval_flow(files, tmp_path, capsys):
    model = tmp_path / "m.txt"
    curves = tmp_path / "c.csv"
    assert _train(files, model, "--curves", str(curves), "--eval-stride", "5") == 0
    assert "test_errors" in capsys.readouterr().out
    rows = curves.read_text().splitlines()
    assert rows[0] == "iteration,train_loss,test_errors,seconds"
    assert [r.split(",")[0] for r in rows[1:]] == ["5", "10", "12"]

    out = tmp_path / "pred.csv"
    assert main(["predict", "--model", str(model), "--data", str(files / "test.csv"),
                 "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 80
    label, *probs = lines[0].split(",")
    assert label in ("x", "y", "z") and len(probs) == 3
    assert sum(map(float, probs)) == pytest.approx(1.0)

    assert main(["eval", "--model", str(model), "--data", str(files / "test.csv"),
                 "--format", "csv"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("errors ") and " n 80 " in text


def test_cli_runs_are_deterministic(files, tmp_path):
    for name in ("a", "b"):
        assert _train(files, tmp_path / name, "--seed", "4", "--curves", str(tmp_path / f"{name}.csv")) == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    strip = lambda p: [r.rsplit(",", 1)[0] for r in p.read_text().splitlines()]  # drop timing
    assert strip(tmp_path / "a.csv") == strip(tmp_path / "b.csv")


def test_eval_pvalue(capsys):
    assert main(["eval", "--pvalue", "2815", "2440", "60000"]) == 0
    p = float(capsys.readouterr().out)
    assert 5.5e-8 <= p <= 6.5e-8


def test_missing_model_exits_2(files, tmp_path, capsys):
    code = main(["predict", "--model", str(tmp_path / "missing.bin"), "--data",
                 str(files / "test.csv"), "--format", "csv", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "missing.bin" in capsys.readouterr().err


def test_bad_data_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.libsvm"
    bad.write_text("1 1:1\n2 x:1\n")
    code = main(["train", "--data", str(bad), "--format", "libsvm", "--algo", "mart",
                 "--trees", "2", "--shrinkage", "0.1", "--iters", "1", "--model-out",
                 str(tmp_path / "m")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["train", "--bogus"],
    ["train", "--data", "x", "--format", "csv", "--algo", "adaboost", "--trees", "2",
     "--shrinkage", "0.1", "--iters", "1", "--model-out", "m"],
    ["train", "--data", "x", "--format", "csv", "--algo", "mart", "--trees", "1",
     "--shrinkage", "0.1", "--iters", "1", "--model-out", "m"],
    ["eval"],
    ["eval", "--pvalue", "0", "0", "10"],
    ["predict", "--model", "m", "--data", "d", "--out", "o"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.strip() and len(err.strip().splitlines()) == 1
