from dataclasses import replace

import numpy as np
import pytest
from conftest import data_file

from fuzzybayes.evalharness.benchmark import BenchmarkConfig, make_nb, run_benchmark
from fuzzybayes.evalharness.datasets import DatasetSchema, load_dataset

IRIS = DatasetSchema(label="species", classes=("setosa", "versicolor", "virginica"))


@pytest.fixture(scope="module")
def iris():
    return load_dataset(data_file("iris.csv"), IRIS)


def test_two_models_on_iris(iris):
    table = run_benchmark({"iris": iris}, 3, BenchmarkConfig(trials=3))
    row = table.rows[0]
    assert row.ok and set(row.ranks.values()) == {1, 2}
    assert len(row.trial_cep["FBN"]) == 3
    assert all(0 <= v <= 1 for v in row.mean_cep.values())
    text = table.to_text().splitlines()
    assert text[0].split() == ["Dataset", "FBN", "NB"]
    assert text[2].startswith("iris") and text[3].startswith("Rank")
    assert table.to_tsv().splitlines()[0].split("\t")[:3] == ["dataset", "model", "mean_cep"]


def test_identical_models_tie_by_registration_order(iris):
    models = {"NB_a": make_nb, "NB_b": make_nb}
    row = run_benchmark({"iris": iris}, 2, BenchmarkConfig(trials=2), models=models).rows[0]
    assert row.mean_cep["NB_a"] == row.mean_cep["NB_b"]
    assert row.ranks == {"NB_a": 1, "NB_b": 2}


def test_failing_dataset_does_not_abort(iris, tmp_path):
    def broken():
        raise FileNotFoundError("gone.csv")

    table = run_benchmark({"missing": broken, "iris": iris}, 2, BenchmarkConfig(trials=2))
    assert [r.name for r in table.rows] == ["missing", "iris"]
    assert list(table.failures) == ["missing"] and table.rows[1].ok
    assert "failed" in table.to_text() and "failed" in table.to_tsv()


def test_parallel_equals_serial(iris):
    serial = run_benchmark({"iris": iris}, 3, BenchmarkConfig(trials=3))
    parallel = run_benchmark({"iris": iris}, 3, BenchmarkConfig(trials=3, n_jobs=2))
    assert serial.to_tsv() == parallel.to_tsv()


def test_unknown_model_and_bad_trials():
    with pytest.raises(ValueError):
        run_benchmark({}, 1, BenchmarkConfig(trials=1, models=("SVM",)))
    with pytest.raises(ValueError):
        BenchmarkConfig(trials=0)


def test_impute_drop_mode(iris):
    X = iris.X.copy()
    X[::10, 0] = np.nan
    holey = replace(iris, X=X)
    table = run_benchmark({"iris": holey}, 2, BenchmarkConfig(trials=2, impute="drop"))
    assert table.rows[0].ok
