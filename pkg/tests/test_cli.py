"""End-to-end command-line behavior on synthetic CSV fixtures."""

import json

import pytest

from fagc.cli import main
from fagc.datastore import load_features, save_features, save_labels
from fagc.synthetic import make_arc_dataset


@pytest.fixture
def dataset_files(tmp_path):
    data = make_arc_dataset(seed=0)
    hardness = 260.0 - 1.1 * data.labels  # second property, also monotone
    features = tmp_path / "features.csv"
    labels = tmp_path / "labels.csv"
    save_features(features, data.ids, data.features)
    save_labels(labels, data.ids, conductivity_iacs=data.labels,
                hardness_hv=hardness)
    return features, labels, tmp_path


def run(args):
    return main([str(a) for a in args])


class TestAugmentCommand:
    def test_writes_generated_files(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["augment", "--features", features, "--labels", labels,
                  "--k-generated", "100", "--seed", "0", "--out", out])
        assert rc == 0
        generated = load_features(out / "generated_features.csv")
        assert generated.n == 100
        assert generated.feature_dim == 32
        label_lines = (out / "generated_labels.csv").read_text().splitlines()
        assert label_lines[0] == "id,conductivity_iacs,hardness_hv"
        assert len(label_lines) == 101

    def test_k_zero_is_usage_error(self, dataset_files):
        features, labels, tmp = dataset_files
        with pytest.raises(SystemExit) as exc:
            run(["augment", "--features", features, "--labels", labels,
                 "--k-generated", "0", "--out", tmp / "out"])
        assert exc.value.code == 2

    def test_rerun_is_byte_identical(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        args = ["augment", "--features", features, "--labels", labels,
                "--k-generated", "25", "--seed", "7", "--out", out]
        assert run(args) == 0
        first = (out / "generated_features.csv").read_bytes()
        first_labels = (out / "generated_labels.csv").read_bytes()
        assert run(args) == 0
        assert (out / "generated_features.csv").read_bytes() == first
        assert (out / "generated_labels.csv").read_bytes() == first_labels

    def test_missing_dataset_exits_nonzero(self, tmp_path):
        rc = run(["augment", "--features", tmp_path / "nope.csv",
                  "--labels", tmp_path / "nope2.csv", "--out", tmp_path])
        assert rc == 1


class TestEvaluateCommand:
    def test_full_model_set_with_and_without_fagc(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["evaluate", "--features", features, "--labels", labels,
                  "--k-generated", "20", "--folds", "6", "--seed", "0",
                  "--out", out])
        assert rc == 0
        doc = json.loads((out / "report.json").read_text())
        aggregates = doc["aggregates"]
        assert len(aggregates) == 12  # six models, baseline + augmented
        baselines = [a for a in aggregates if a["teacher"] is None]
        assert len(baselines) == 6
        assert all(a["k_generated"] == 0 for a in baselines)
        assert doc["seed"] == 0
        rows = (out / "report.csv").read_text().splitlines()
        assert len(rows) == 1 + 12 * 6

    def test_properties_give_independent_reports(self, dataset_files):
        features, labels, tmp = dataset_files
        out_c = tmp / "out_c"
        out_h = tmp / "out_h"
        base = ["evaluate", "--features", features, "--labels", labels,
                "--model", "decision_tree", "--k-generated", "15",
                "--seed", "1"]
        assert run(base + ["--property", "conductivity", "--out", out_c]) == 0
        assert run(base + ["--property", "hardness", "--out", out_h]) == 0
        doc_c = json.loads((out_c / "report.json").read_text())
        doc_h = json.loads((out_h / "report.json").read_text())
        assert doc_c["property"] == "conductivity"
        assert doc_h["property"] == "hardness"
        assert doc_c["rows"] != doc_h["rows"]

    def test_config_file_supplies_flags(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        config = tmp / "config.json"
        config.write_text(json.dumps({
            "features": str(features), "labels": str(labels),
            "model": "decision_tree", "k_generated": 10, "seed": 3,
            "out": str(out),
        }))
        assert run(["evaluate", "--config", config]) == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["seed"] == 3
        assert {a["model"] for a in doc["aggregates"]} == {"decision_tree"}

    def test_flags_override_config(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        config = tmp / "config.json"
        config.write_text(json.dumps({
            "features": str(features), "labels": str(labels),
            "model": "decision_tree", "k_generated": 10, "seed": 3,
            "out": str(out),
        }))
        assert run(["evaluate", "--config", config, "--seed", "9"]) == 0
        assert json.loads((out / "report.json").read_text())["seed"] == 9


class TestSweepCommand:
    def test_default_grid_has_seven_k_values(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["sweep", "--features", features, "--labels", labels,
                  "--model", "decision_tree", "--seed", "0", "--out", out])
        assert rc == 0
        doc = json.loads((out / "sweep.json").read_text())
        assert doc["k_values"] == [10, 20, 40, 100, 200, 400, 1000]
        ks = {a["k_generated"] for a in doc["aggregates"]}
        assert ks == {10, 20, 40, 100, 200, 400, 1000}

    def test_explicit_grid(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["sweep", "--features", features, "--labels", labels,
                  "--model", "decision_tree", "--k-grid", "5,10,20",
                  "--seed", "0", "--out", out])
        assert rc == 0
        doc = json.loads((out / "sweep.json").read_text())
        assert doc["k_values"] == [5, 10, 20]

    def test_sweep_csv_shape(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        assert run(["sweep", "--features", features, "--labels", labels,
                    "--model", "decision_tree", "--model", "knn",
                    "--k-grid", "5,10", "--folds", "6", "--seed", "0",
                    "--out", out]) == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 2 * 6


class TestTeacherGridCommand:
    def test_grid_and_baseline(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["teacher-grid", "--features", features, "--labels", labels,
                  "--model", "decision_tree", "--teachers", "knn,linear",
                  "--k-generated", "10", "--seed", "0", "--out", out])
        assert rc == 0
        doc = json.loads((out / "teacher_grid.json").read_text())
        teachers = {a["teacher"] for a in doc["aggregates"]}
        assert teachers == {None, "knn", "linear"}
        assert set(doc["teacher_quality"]) == {"knn", "linear"}


class TestHeatmapCommand:
    def test_four_by_four_outputs(self, dataset_files, rng):
        features, labels, tmp = dataset_files
        patches = tmp / "patches.csv"
        save_features(patches, [f"p{i}" for i in range(16)],
                      rng.normal(size=(16, 32)))
        out = tmp / "out"
        rc = run(["heatmap", "--features", features, "--labels", labels,
                  "--patches", patches, "--model", "decision_tree",
                  "--k-generated", "20", "--seed", "0", "--out", out])
        assert rc == 0
        csv_rows = (out / "heatmap.csv").read_text().splitlines()
        assert len(csv_rows) == 4 and all(len(r.split(",")) == 4 for r in csv_rows)
        pgm = (out / "heatmap.pgm").read_text().splitlines()
        assert pgm[0] == "P2" and pgm[1] == "4 4" and pgm[2] == "255"

    def test_without_augmentation(self, dataset_files, rng):
        features, labels, tmp = dataset_files
        patches = tmp / "patches.csv"
        save_features(patches, [f"p{i}" for i in range(16)],
                      rng.normal(size=(16, 32)))
        out = tmp / "out"
        rc = run(["heatmap", "--features", features, "--labels", labels,
                  "--patches", patches, "--model", "knn",
                  "--k-generated", "0", "--out", out])
        assert rc == 0


class TestEmbedCommand:
    def test_sources_and_endpoints(self, dataset_files):
        features, labels, tmp = dataset_files
        out = tmp / "out"
        rc = run(["embed", "--features", features, "--labels", labels,
                  "--k-generated", "30", "--folds", "6", "--fold", "2",
                  "--seed", "0", "--out", out])
        assert rc == 0
        lines = (out / "embedding.csv").read_text().splitlines()
        assert lines[0] == "id,x,y,source"
        sources = [line.split(",")[3] for line in lines[1:]]
        assert sources.count("train") == 15
        assert sources.count("test") == 3
        assert sources.count("generated") == 30
        assert sources.count("endpoint") == 2
