"""Tests for the experiment harness, result reporting, and the CLI."""

import csv
import os

import numpy as np
import pytest

from l1pcanet import cli, dataio, harness, network as nw, report
from l1pcanet.errors import InvalidParameterError
from l1pcanet.synth import make_synthetic_dataset, write_synthetic_dataset


def _tiny_dataset(classes=3, per_class=4, size=(12, 12), seed=60):
    return make_synthetic_dataset(classes=classes, per_class=per_class,
                                  size=size, seed=seed)


def _tiny_cfg(variant="L1-2D2PCANet"):
    return nw.NetworkConfig(variant=variant, k=3, l1=2, l2=2, block_grid=(2, 2))


# --- rmse + table ------------------------------------------------------------

def test_rmse_examples():
    assert harness.rmse([0.9, 0.9]) == 0.0
    assert harness.rmse([0.8, 1.0]) == pytest.approx(0.1, abs=1e-12)


def test_result_row_recomputation():
    row = harness.ResultRow(variant="PCANet", parameter="i=2",
                            per_run=[0.5, 0.7, 0.9])
    assert row.mean == pytest.approx(0.7, abs=1e-12)
    v = np.array(row.per_run)
    assert row.rmse == pytest.approx(
        float(np.sqrt(((v - v.mean()) ** 2).mean())), abs=1e-12)


# --- run_single ----------------------------------------------------------------

def test_run_single_memorizes_training_set():
    ds = _tiny_dataset()
    acc = harness.run_single(_tiny_cfg(), ds, ds, "linear", epochs=300)
    assert acc == 1.0


def test_run_single_rejects_empty_sets():
    ds = _tiny_dataset()
    empty = dataio.LabeledDataset([], [], ds.class_names)
    with pytest.raises(InvalidParameterError):
        harness.run_single(_tiny_cfg(), ds, empty)


def test_run_single_beats_chance():
    ds = make_synthetic_dataset(classes=10, per_class=12, size=(32, 32), seed=42)
    train, test = dataio.split_random_per_class(ds, 6, seed=0)
    acc = harness.run_single(nw.NetworkConfig(), train, test, "linear")
    assert acc > 0.5  # chance is 0.1


def test_run_single_nearest_classifier():
    ds = _tiny_dataset()
    train, test = dataio.split_random_per_class(ds, 2, seed=0)
    acc = harness.run_single(_tiny_cfg(), train, test, "nearest")
    assert 0.0 <= acc <= 1.0


# --- run_experiment -------------------------------------------------------------

def _spec(ds, **kw):
    kw.setdefault("configs", [_tiny_cfg("PCANet"), _tiny_cfg("L1-2D2PCANet")])
    kw.setdefault("train_per_class", 2)
    kw.setdefault("repeats", 2)
    return harness.ExperimentSpec(dataset=ds, **kw)


def test_run_experiment_shape_and_determinism():
    ds = _tiny_dataset()
    spec = _spec(ds)
    t1 = harness.run_experiment(spec)
    t2 = harness.run_experiment(spec)
    assert len(t1.rows) == 2
    for a, b in zip(t1.rows, t2.rows):
        assert a.per_run == b.per_run
        assert len(a.per_run) == 2


def test_run_experiment_with_occlusion_parameter_label():
    ds = _tiny_dataset()
    table = harness.run_experiment(_spec(ds, occlusion=0.3))
    assert all(r.parameter == "i=2,q=0.3" for r in table.rows)


def test_block_size_sweep_rows():
    ds = _tiny_dataset()
    spec = _spec(ds, configs=[_tiny_cfg("PCANet")],
                 block_size_sweep=[(2, 2), (4, 4)])
    table = harness.run_block_size_sweep(spec)
    assert len(table.rows) == 2
    assert table.rows[0].parameter.endswith("B=2x2")
    assert table.rows[1].parameter.endswith("B=4x4")


def test_spec_file_parsing_and_overrides(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(
        "[experiment]\n"
        "variants = PCANet, L1-PCANet\n"
        "k = 3\nl1 = 2\nl2 = 2\nblocks = 2x2\n"
        "train-per-class = 3\nrepeats = 4\nseed = 17\n"
    )
    spec = harness.read_spec_file(str(path))
    assert [c.variant for c in spec.configs] == ["PCANet", "L1-PCANet"]
    assert spec.train_per_class == 3 and spec.repeats == 4
    assert spec.master_seed == 17
    spec2 = harness.read_spec_file(str(path), {"repeats": "2", "seed": None})
    assert spec2.repeats == 2 and spec2.master_seed == 17


# --- report ---------------------------------------------------------------------

def test_format_cell_paper_style():
    assert report.format_cell(0.99666, 0.0009) == "99.67 ± 0.09"
    assert report.format_cell(0.9, 0.1) == "90.00 ± 10.00"


def test_emit_results_files(tmp_path):
    table = harness.ResultTable(rows=[
        harness.ResultRow(variant="PCANet", parameter="i=2",
                          per_run=[0.8, 1.0]),
    ])
    paths = report.emit_results(table, str(tmp_path))
    assert [os.path.basename(p) for p in paths] == [
        "results.csv", "results.txt", "results.png"]
    with open(paths[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["variant", "parameter", "mean", "rmse", "per_run"]
    assert rows[1][0] == "PCANet"
    assert float(rows[1][2]) == pytest.approx(0.9)
    assert float(rows[1][3]) == pytest.approx(0.1)
    text = open(paths[1]).read()
    assert "90.00 ± 10.00" in text
    assert os.path.getsize(paths[2]) > 0


def test_emit_results_without_figures(tmp_path):
    table = harness.ResultTable(rows=[
        harness.ResultRow(variant="PCANet", parameter="i=2", per_run=[1.0]),
    ])
    paths = report.emit_results(table, str(tmp_path), figures=False)
    assert len(paths) == 2
    assert not os.path.exists(os.path.join(str(tmp_path), "results.png"))


def test_emit_results_empty_table(tmp_path):
    with pytest.raises(InvalidParameterError):
        report.emit_results(harness.ResultTable(), str(tmp_path))


# --- CLI ------------------------------------------------------------------------

def test_cli_synth_train_extract_eval(tmp_path, capsys):
    data = str(tmp_path / "data")
    model = str(tmp_path / "model.bin")
    feats = str(tmp_path / "features.csv")

    assert cli.main(["synth", "--classes", "3", "--per-class", "4",
                     "--size", "12x12", "--seed", "1", "--out", data]) == 0
    assert cli.main(["train", "--data", data, "--variant", "L1-2D2PCANet",
                     "--k", "3", "--l1", "2", "--l2", "2", "--blocks", "2x2",
                     "--out", model]) == 0
    assert cli.main(["extract", "--model", model, "--data", data,
                     "--out", feats]) == 0
    with open(feats) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 12
    assert len(rows[0]) == 2 + 2 ** 2 * 2 * 4  # path, label, feature values

    assert cli.main(["eval", "--model", model, "--data", data]) == 0
    out = capsys.readouterr().out
    assert "accuracy: 1.0000" in out  # training set memorized

    assert cli.main(["eval", "--model", model, "--data", data,
                     "--occlusion", "0.3", "--seed", "2"]) == 0


def test_cli_experiment_determinism(tmp_path, capsys):
    data = str(tmp_path / "data")
    cli.main(["synth", "--classes", "3", "--per-class", "4",
              "--size", "12x12", "--seed", "2", "--out", data])
    args = ["experiment", "--data", data, "--variants", "PCANet",
            "--k", "3", "--l1", "2", "--l2", "2", "--blocks", "2x2",
            "--train-per-class", "2", "--repeats", "2", "--seed", "5"]
    out1 = str(tmp_path / "out1")
    out2 = str(tmp_path / "out2")
    assert cli.main(args + ["--out", out1]) == 0
    assert cli.main(args + ["--out", out2, "--no-figures"]) == 0
    csv1 = open(os.path.join(out1, "results.csv"), "rb").read()
    csv2 = open(os.path.join(out2, "results.csv"), "rb").read()
    assert csv1 == csv2
    assert os.path.exists(os.path.join(out1, "results.png"))
    assert not os.path.exists(os.path.join(out2, "results.png"))


def test_cli_exit_codes(tmp_path):
    data = str(tmp_path / "d")
    write_synthetic_dataset(data, classes=2, per_class=2, size=(10, 10), seed=3)
    # usage: unknown variant
    assert cli.main(["train", "--data", data, "--variant", "bogus",
                     "--out", str(tmp_path / "m.bin")]) == 1
    # usage: malformed flags caught by argparse
    assert cli.main(["train", "--nonsense"]) == 1
    # data: missing dataset root
    assert cli.main(["train", "--data", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "m.bin")]) == 2
    # data: model file does not exist
    assert cli.main(["eval", "--model", str(tmp_path / "missing.bin"),
                     "--data", data]) == 2
    # numeric: constant images make the solver degenerate
    flat = str(tmp_path / "flat")
    for cls in ("a", "b"):
        os.makedirs(os.path.join(flat, cls))
        for i in range(2):
            dataio.write_pgm(np.zeros((10, 10)),
                             os.path.join(flat, cls, f"{i}.pgm"))
    assert cli.main(["train", "--data", flat, "--k", "3", "--l1", "2",
                     "--l2", "2", "--out", str(tmp_path / "m2.bin")]) == 3


def test_cli_oracle_check_small(capsys):
    code = cli.main(["oracle-check", "--trials", "20", "--seed", "101"])
    out = capsys.readouterr().out
    assert "[PASS]" in out or "[FAIL]" in out
    assert code in (0, 3)
