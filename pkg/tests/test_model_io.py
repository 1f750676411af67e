import numpy as np
import pytest

from rboost.boost import TrainConfig, predict_model, train
from rboost.model_io import ModelFormatError, dumps_model, load_model, loads_model, save_model


@pytest.fixture(scope="module", params=["mart", "abc-logit"])
def trained(request, blobs4):
    cfg = TrainConfig(algorithm=request.param, n_leaves=6, shrinkage=0.1, n_iter=15)
    return train(blobs4, None, cfg)[0]


def test_roundtrip_identical_predictions(tmp_path, trained):
    path = tmp_path / "m.txt"
    save_model(trained, path)
    loaded = load_model(path)
    X = np.random.default_rng(5).standard_normal((100, 4)) * 2
    np.testing.assert_array_equal(loaded.decision_function(X), trained.decision_function(X))
    for x in X[:10]:
        a, b = predict_model(trained, x), predict_model(loaded, x)
        np.testing.assert_array_equal(a[0], b[0])
        assert a[2] == b[2]
    assert dumps_model(loaded) == dumps_model(trained)


def test_header_names_format_and_version(trained):
    text = dumps_model(trained)
    assert text.splitlines()[0] == "rboost-model v1"
    with pytest.raises(ModelFormatError, match="version"):
        loads_model(text.replace("rboost-model v1", "rboost-model v9", 1))
    with pytest.raises(ModelFormatError):
        loads_model("something else\n")


def test_truncated_file_names_byte_offset(trained):
    raw = dumps_model(trained).encode()
    cut = raw[: len(raw) * 2 // 3]
    with pytest.raises(ModelFormatError, match="byte"):
        loads_model(cut)


def test_non_finite_value_rejected(trained):
    lines = dumps_model(trained).splitlines()
    i = next(i for i, line in enumerate(lines) if line.startswith("L "))
    lines[i] = "L nan"
    with pytest.raises(ModelFormatError, match="finite"):
        loads_model("\n".join(lines) + "\n")


def test_missing_file_reported(tmp_path):
    with pytest.raises(ModelFormatError, match="cannot read"):
        load_model(tmp_path / "missing.bin")


def test_repeated_training_gives_identical_files(tmp_path, blobs4):
    cfg = TrainConfig(algorithm="abc-mart", n_leaves=5, n_iter=8, seed=3)
    for name in ("a", "b"):
        save_model(train(blobs4, None, cfg)[0], tmp_path / name)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
