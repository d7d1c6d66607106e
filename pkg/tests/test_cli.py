import json
import math
import subprocess
import sys

import numpy as np
import pytest
from conftest import data_file

from fuzzybayes.bnet import infer_crisp
from fuzzybayes.bundle import load_bundle
from fuzzybayes.cli import EXIT_BENCHMARK, EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from fuzzybayes.config import RunConfig
from fuzzybayes.core import DEFAULT_SCALE, GradeDistribution
from fuzzybayes.rulebase import enumerate_antecedents

CENTERS = np.array([40.0, 60.0, 75.0, 90.0])


def write_csv(path, header, rows):
    path.write_text(",".join(header) + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
    return str(path)


@pytest.fixture(scope="module")
def stationary(tmp_path_factory):
    """Scores at level centers; grade is the floored mean level of (A, P, M)."""
    d = tmp_path_factory.mktemp("stationary")
    rng = np.random.default_rng(0)
    lv = rng.integers(0, 4, size=(64_000, 3))
    grades = np.array(list("pmge"))[np.floor(lv.mean(axis=1)).astype(int)]
    rows = [(*CENTERS[r].astype(int), g) for r, g in zip(lv, grades)]
    train = write_csv(d / "train.csv", ["A", "P", "M", "grade"], rows)
    (d / "run.toml").write_text("seed = 3\n[learn]\nbatch_size = 4000\n")
    return d, train, str(d / "run.toml")


def test_fuzzify_worked_example(tmp_path, capsys):
    src = write_csv(tmp_path / "in.csv", ["A", "P", "M"], [(85, 90, 75)])
    assert main(["fuzzify", src]) == EXIT_OK
    header, row = capsys.readouterr().out.splitlines()
    cols = header.split("\t")
    vals = row.split("\t")
    assert cols[:3] == ["A", "P", "M"] and vals[:3] == ["85", "90", "75"] and len(cols) == 15
    for d, x in enumerate((85, 90, 75)):
        vec = [float(v) for v in vals[3 + 4 * d : 7 + 4 * d]]
        raw = [math.exp(-((x - c) ** 2) / 200) for c in CENTERS]
        assert vec == pytest.approx([r / sum(raw) for r in raw], abs=5e-7)
        assert sum(vec) == pytest.approx(1.0, abs=4e-6)


def test_fuzzify_empty_and_header_only(tmp_path, capsys):
    (tmp_path / "e.csv").write_text("")
    out = tmp_path / "o.tsv"
    assert main(["fuzzify", str(tmp_path / "e.csv"), "--out", str(out)]) == EXIT_OK
    assert out.read_text() == ""
    (tmp_path / "h.csv").write_text("A,P,M\n")
    assert main(["fuzzify", str(tmp_path / "h.csv")]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 1


def test_fuzzify_non_numeric_cell(tmp_path, capsys):
    src = write_csv(tmp_path / "in.csv", ["A", "P", "M"], [(85, 90, 75), (70, "n/a", 60)])
    assert main(["fuzzify", src]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "in.csv:3" in err and "'P'" in err


def test_usage_and_config_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == EXIT_CONFIG
    src = write_csv(tmp_path / "in.csv", ["A", "P", "M"], [(1, 2, 3)])
    assert main(["fuzzify", src, "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    bad = tmp_path / "bad.toml"
    bad.write_text("[fusion]\nalpha = 3\n")
    assert main(["fuzzify", src, "--config", str(bad)]) == EXIT_CONFIG
    assert main(["fuzzify", str(tmp_path / "absent.csv")]) == EXIT_DATA


def test_train_converges_and_writes_bundle(stationary, tmp_path, capsys):
    _, train, conf = stationary
    assert main(["train", train, "--config", conf, "--out", str(tmp_path / "m")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("iter=1\t")
    final = [line for line in out.splitlines() if line.startswith("final delta=")][0]
    assert "(converged)" in final and float(final.split()[1].split("=")[1]) < 0.001
    manifest = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert manifest["seed"] == 3 and len(manifest["config_hash"]) == 64
    assert manifest["training"]["final_delta"] < 0.001 and manifest["training"]["converged"]


def test_retrain_is_byte_identical(stationary, tmp_path):
    _, train, conf = stationary
    for name in ("a", "b"):
        assert main(["train", train, "--config", conf, "--out", str(tmp_path / name)]) == EXIT_OK
    for f in ("manifest.json", "cpt.tsv", "rules.tsv", "prior.tsv", "indicators.tsv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    main(["train", train, "--config", conf, "--seed", "4", "--out", str(tmp_path / "c")])
    assert (tmp_path / "a" / "cpt.tsv").read_bytes() != (tmp_path / "c" / "cpt.tsv").read_bytes()


def test_train_errors(tmp_path, capsys):
    unlabeled = write_csv(tmp_path / "u.csv", ["A", "P", "M"], [(1, 2, 3)])
    assert main(["train", unlabeled]) == EXIT_DATA
    blank = write_csv(tmp_path / "b.csv", ["A", "P", "M", "grade"], [(1, 2, 3, "")])
    assert main(["train", blank]) == EXIT_DATA
    unknown = write_csv(tmp_path / "k.csv", ["A", "P", "M", "grade"], [(1, 2, 3, "A+")])
    assert main(["train", unknown]) == EXIT_DATA
    conf = tmp_path / "x.toml"
    conf.write_text('[[expert]]\nantecedent = ["e", "e", "q"]\nweight = 0.5\n')
    ok = write_csv(tmp_path / "ok.csv", ["A", "P", "M", "grade"], [(90, 90, 90, "e"), (40, 40, 40, "p")])
    assert main(["train", ok, "--config", str(conf)]) == EXIT_CONFIG
    assert "expert" in capsys.readouterr().err


def test_alpha_one_full_coverage_bundle_weights(tmp_path):
    rng = np.random.default_rng(5)
    tuples = enumerate_antecedents([DEFAULT_SCALE] * 3)
    weights = {t: round(float(w), 6) for t, w in zip(tuples, rng.uniform(size=64))}
    lines = ["[fusion]", "alpha = 1.0"]
    for t, w in weights.items():
        lines += ["[[expert]]", f"antecedent = {json.dumps(list(t))}", f"weight = {w!r}"]
    conf = tmp_path / "full.toml"
    conf.write_text("\n".join(lines) + "\n")
    train = write_csv(tmp_path / "t.csv", ["A", "P", "M", "grade"], [(90, 90, 90, "e"), (40, 40, 40, "p"), (60, 75, 60, "m")])
    assert main(["train", train, "--config", str(conf), "--out", str(tmp_path / "m")]) == EXIT_OK
    body = [line.split("\t") for line in (tmp_path / "m" / "rules.tsv").read_text().splitlines() if not line.startswith("#")]
    assert [float(w) for _, _, w in body] == [weights[t] for t in tuples]


@pytest.fixture(scope="module")
def bundle(stationary):
    d, train, conf = stationary
    main(["train", train, "--config", conf, "--out", str(d / "model")])
    return d / "model"


def test_infer_rows_in_order(bundle, tmp_path, capsys):
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 100, size=(25, 3)).round(1)
    src = write_csv(tmp_path / "x.csv", ["A", "P", "M"], X.tolist())
    assert main(["infer", str(bundle), src]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == ["record", "P(p)", "P(m)", "P(g)", "P(e)", "predicted"]
    assert len(lines) == 26 and [ln.split("\t")[0] for ln in lines[1:]] == [str(i) for i in range(1, 26)]
    model, _ = load_bundle(bundle)
    proba = model.predict_proba(X)
    for line, p, label in zip(lines[1:], proba, model.predict(X)):
        cells = line.split("\t")
        assert cells[1:5] == [f"{v:.4f}" for v in p] and cells[5] == label


def test_infer_table_layout_and_ids(bundle, tmp_path, capsys):
    src = write_csv(tmp_path / "x.csv", ["id", "A", "P", "M"], [("s1", 85, 90, 75), ("s2", 40, 40, 40)])
    assert main(["infer", str(bundle), src, "--layout", "table"]) == EXIT_OK
    blocks = capsys.readouterr().out.strip().split("\n\n")
    assert len(blocks) == 2
    first = blocks[0].splitlines()
    assert first[0] == "# record s1" and first[1] == "grade\tprobability"
    assert [row.split("\t")[0] for row in first[2:6]] == ["p", "m", "g", "e"]
    assert all(len(row.split("\t")[1].split(".")[1]) == 4 for row in first[2:6])
    assert first[6].startswith("predicted\t")


def test_infer_one_hot_record_matches_crisp_inference(stationary, tmp_path, capsys):
    _, train, _ = stationary
    sharp = tmp_path / "sharp.toml"
    sharp.write_text("[indicators.default]\nsigma = 0.01\n")
    assert main(["train", train, "--config", str(sharp), "--out", str(tmp_path / "m")]) == EXIT_OK
    src = write_csv(tmp_path / "x.csv", ["A", "P", "M"], [(90, 40, 75)])
    capsys.readouterr()
    main(["infer", str(tmp_path / "m"), src])
    cells = capsys.readouterr().out.splitlines()[1].split("\t")
    model, _ = load_bundle(tmp_path / "m")
    assert np.array_equal(model.dimension_memberships(np.array([[90.0, 40.0, 75.0]]))[0], np.eye(4)[[3, 0, 2]])
    prior = GradeDistribution(model.network_.output, tuple(model.prior_))
    crisp = infer_crisp(model.network_, model.cpt_, prior, ("e", "p", "g"))
    assert cells[1:5] == [f"{v:.4f}" for v in crisp.probs]


def test_infer_roundtrip_equals_in_memory(stationary, tmp_path, capsys):
    d, train, conf = stationary
    rows = np.loadtxt(train, delimiter=",", skiprows=1, usecols=(0, 1, 2), max_rows=4000)
    labels = np.loadtxt(train, delimiter=",", skiprows=1, usecols=(3,), dtype=str, max_rows=4000)
    src = write_csv(tmp_path / "x.csv", ["A", "P", "M"], [(85, 90, 75), (61, 58, 99)])
    small = write_csv(tmp_path / "small.csv", ["A", "P", "M", "grade"], [(*r.astype(int), g) for r, g in zip(rows, labels)])
    main(["train", small, "--out", str(tmp_path / "m")])
    capsys.readouterr()
    main(["infer", str(tmp_path / "m"), src])
    cli_out = capsys.readouterr().out
    model = RunConfig.from_dict({}).classifier().fit(rows, labels)
    X = np.array([[85.0, 90, 75], [61, 58, 99]])
    expected = [f"{i}\t" + "\t".join(f"{v:.4f}" for v in p) + f"\t{lab}" for i, (p, lab) in enumerate(zip(model.predict_proba(X), model.predict(X)), 1)]
    assert cli_out.splitlines()[1:] == expected


def test_infer_errors(bundle, tmp_path):
    src = write_csv(tmp_path / "x.csv", ["A", "Q", "M"], [(1, 2, 3)])
    assert main(["infer", str(bundle), src]) == EXIT_DATA
    good = write_csv(tmp_path / "g.csv", ["A", "P", "M"], [(1, 2, 3)])
    assert main(["infer", str(tmp_path / "nobundle"), good]) == EXIT_CONFIG
    empty = write_csv(tmp_path / "e.csv", ["A", "P", "M"], [])
    assert main(["infer", str(bundle), empty]) == EXIT_OK


def iris_config(tmp_path, files=("iris",), tau=None):
    lines = ["seed = 0", "[benchmark]", "trials = 10", 'models = ["FBN", "NB"]']
    if tau is not None:
        lines += ["[learn]", f"tau = {tau}"]
    for name in files:
        lines += [f"[benchmark.datasets.{name}]", f'file = "{name}.csv"', 'label = "species"']
    p = tmp_path / "bench.toml"
    p.write_text("\n".join(lines) + "\n")
    return str(p)


def test_benchmark_iris_structure(tmp_path, capsys):
    conf = iris_config(tmp_path)
    out = tmp_path / "out"
    data_dir = str(data_file("iris.csv")).rsplit("/", 1)[0]
    assert main(["benchmark", data_dir, "--config", conf, "--out", str(out)]) == EXIT_OK
    text = (out / "benchmark.txt").read_text().splitlines()
    assert text[0].split() == ["Dataset", "FBN", "NB"]
    assert text[2].split()[0] == "iris" and sorted(text[3].split()[1:]) == ["1", "2"]
    tsv = (out / "benchmark.tsv").read_text().splitlines()
    assert len(tsv) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["trial_seeds"] == list(range(10)) and manifest["datasets"]["iris"]["status"] == "ok"
    assert set(manifest["versions"]) == {"fuzzybayes", "numpy", "scikit-learn", "python"}
    capsys.readouterr()


def test_benchmark_hash_changes_with_tau(tmp_path):
    data_dir = str(data_file("iris.csv")).rsplit("/", 1)[0]
    hashes = []
    for tau in (0.001, 0.002):
        sub = tmp_path / str(tau)
        sub.mkdir()
        main(["benchmark", data_dir, "--config", iris_config(sub, tau=tau), "--out", str(sub / "o"), "--trials", "1"])
        hashes.append(json.loads((sub / "o" / "manifest.json").read_text())["config_hash"])
    assert hashes[0] != hashes[1]


def test_benchmark_partial_and_total_failure(tmp_path):
    data_dir = str(data_file("iris.csv")).rsplit("/", 1)[0]
    conf = iris_config(tmp_path, files=("iris", "wine"))
    assert main(["benchmark", data_dir, "--config", conf, "--out", str(tmp_path / "p"), "--trials", "2"]) == EXIT_OK
    manifest = json.loads((tmp_path / "p" / "manifest.json").read_text())
    assert manifest["datasets"]["wine"]["status"] == "failed" and manifest["datasets"]["iris"]["status"] == "ok"
    assert manifest["datasets"]["wine"]["sha256"] is None
    assert main(["benchmark", str(tmp_path), "--config", conf, "--out", str(tmp_path / "f"), "--trials", "2"]) == EXIT_BENCHMARK


def test_benchmark_without_datasets_is_config_error(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text("[benchmark]\ntrials = 2\n")
    assert main(["benchmark", "--config", str(conf)]) == EXIT_CONFIG


def test_console_script_entry_point(tmp_path):
    src = write_csv(tmp_path / "in.csv", ["A", "P", "M"], [(85, 90, 75)])
    res = subprocess.run([sys.executable, "-m", "fuzzybayes.cli", "fuzzify", src], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.count("\n") == 2
    res = subprocess.run([sys.executable, "-m", "fuzzybayes.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "fuzzybayes" in res.stdout
