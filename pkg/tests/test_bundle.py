import json

import numpy as np
import pytest
from conftest import data_file

from fuzzybayes.bundle import BundleError, load_bundle, save_bundle
from fuzzybayes.config import RunConfig
from fuzzybayes.evalharness.datasets import make_student_dataset


@pytest.fixture(scope="module")
def fitted():
    X, y, _ = make_student_dataset(1500, seed=4)
    return RunConfig.load(data_file("student.toml")).classifier().fit(X, y), X


def test_roundtrip_predictions_identical(fitted, tmp_path):
    model, X = fitted
    save_bundle(model, tmp_path / "b", extra={"seed": 7})
    back, manifest = load_bundle(tmp_path / "b")
    assert np.array_equal(back.predict_proba(X), model.predict_proba(X))
    assert np.array_equal(back.predict(X), model.predict(X))
    assert back.rules_ == model.rules_ and back.cpt_ == model.cpt_
    assert manifest["seed"] == 7 and manifest["format"] == "fuzzybayes-bundle"
    assert manifest["training"]["iterations"][0]["iteration"] == 1


def test_save_is_deterministic(fitted, tmp_path):
    model, _ = fitted
    save_bundle(model, tmp_path / "a")
    save_bundle(model, tmp_path / "b")
    for name in ("manifest.json", "cpt.tsv", "rules.tsv", "prior.tsv", "indicators.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bad_bundles(fitted, tmp_path):
    with pytest.raises(BundleError):
        load_bundle(tmp_path / "nothing")
    model, _ = fitted
    save_bundle(model, tmp_path / "v")
    m = json.loads((tmp_path / "v" / "manifest.json").read_text())
    m["version"] = 99
    (tmp_path / "v" / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(BundleError, match="version"):
        load_bundle(tmp_path / "v")
    (tmp_path / "v" / "manifest.json").write_text("{not json")
    with pytest.raises(BundleError):
        load_bundle(tmp_path / "v")
