import csv
import json

import numpy as np
import pytest

from liesym import algebras
from liesym.cli import main, read_config_file
from liesym.generator import GaussianCoefficients, LieBasis, load_basis, save_basis


def _rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_gen_discrete_rotation_shape_and_checksum(tmp_path):
    args = ["gen", "discrete_rotation", "--k", "7", "--count", "20000", "--seed", "1"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    rows = _rows(tmp_path / "a" / "data.csv")
    assert len(rows) == 20000 and all(len(r) == 4 for r in rows)
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert ma["artifacts"]["data.csv"] == mb["artifacts"]["data.csv"]
    assert ma["generator"] == "discrete_rotation" and ma["samples"] == 20000
    assert ma["params"] == {"task.count": 20000, "task.k": 7} and ma["seed"] == 1


def test_gen_two_body_has_trajectory_columns(tmp_path):
    assert main(["gen", "two_body", "--count", "1000", "--seed", "3", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "data.csv")
    assert len(rows) == 1000 and len(rows[0]) == (5 + 5) * 8
    schema = json.loads((tmp_path / "manifest.json").read_text())["schema"]
    assert schema["n"] == 40 and schema["m"] == 40 and schema["step_dim"] == 8


def test_gen_unknown_generator_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["gen", "three_body", "--out", str(tmp_path)])
    assert err.value.code == 2


def test_bad_override_is_usage_error(tmp_path):
    assert main(["gen", "su2", "--count", "5", "--set", "nope.key=1", "--out", str(tmp_path)]) == 2
    assert main(["gen", "su2", "--count", "5", "--set", "train.lam=abc", "--out", str(tmp_path)]) == 2


def test_config_file_sections_and_dotted_keys(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text("seed = 4\ntrain.lam = 0.5\n[disc]\nhidden = 16\n")
    assert read_config_file(p) == {"seed": "4", "train.lam": "0.5", "disc.hidden": "16"}


def test_discover_epochs_zero_keeps_initialization(tmp_path):
    out = tmp_path / "run"
    args = ["discover", "discrete_rotation", "--count", "64", "--epochs", "0", "--seed", "2",
            "--set", "disc.hidden=8", "--out", str(out)]
    assert main(args) == 0
    basis, dist = load_basis(out / "basis.json")
    init = LieBasis.random(1, 3, np.random.default_rng(2))
    np.testing.assert_array_equal(basis.params, init.params)
    assert dist.to_dict()["kind"] == "int_grid"
    assert (out / "history.csv").read_text() == "epoch,d_loss,g_loss,reg,chreg\n"


def test_discover_history_is_reproducible(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[disc]\nhidden = 16\n[train]\nbatch_size = 32\n")
    for name in ("a", "b"):
        assert main(["discover", "discrete_rotation", "--count", "128", "--epochs", "2",
                     "--seed", "5", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "history.csv").read_bytes()
    assert a == (tmp_path / "b" / "history.csv").read_bytes()
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert m["config"]["disc.hidden"] == 16 and m["training"]["batch_size"] == 32
    assert set(m["artifacts"]) >= {"basis.json", "history.csv", "config.txt"}


def test_discover_divergence_exit_code(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("1,2,nan,0.5\n" * 8)
    args = ["discover", "--set", f"task.csv={data}", "--set", "task.n=3", "--set", "task.m=1",
            "--set", "generator.dim=3", "--set", "disc.hidden=8", "--epochs", "1",
            "--out", str(tmp_path / "o")]
    assert main(args) == 3


def test_discover_from_csv_with_complex_field(tmp_path):
    assert main(["gen", "su2", "--count", "64", "--out", str(tmp_path / "g")]) == 0
    args = ["discover", "--set", f"task.csv={tmp_path / 'g' / 'data.csv'}", "--set", "task.n=4",
            "--set", "task.m=1", "--set", "task.field=complex", "--set", "generator.dim=2",
            "--set", "generator.in_blocks=2", "--set", "generator.channels=3",
            "--set", "generator.complex=true", "--set", "train.eta=0.1",
            "--set", "disc.hidden=8", "--epochs", "1", "--out", str(tmp_path / "o")]
    assert main(args) == 0
    basis, _ = load_basis(tmp_path / "o" / "basis.json")
    assert basis.is_complex and basis.channels == 3


def test_analyze_so13_fixture(tmp_path):
    path = tmp_path / "so13.json"
    save_basis(path, LieBasis.from_matrices(algebras.so13()))
    args = ["analyze", "--basis", str(path), "--truth", str(path), "--set", "metric.lr=1e-3",
            "--set", "metric.steps=5000", "--out", str(tmp_path / "o")]
    assert main(args) == 0
    J = np.array(json.loads((tmp_path / "o" / "metric.json").read_text())["rows"])
    cos = np.sum(J * np.diag([1, -1, -1, -1])) / (np.linalg.norm(J) * 2)
    assert abs(cos) >= 0.999
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["subspace_score"] == pytest.approx(1.0)
    assert len(_rows(tmp_path / "o" / "residuals.csv")) == 7


def test_analyze_errors(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"k": 3, "params": [], "channels": 0}))
    assert main(["analyze", "--basis", str(empty), "--out", str(tmp_path / "o")]) == 2
    assert main(["analyze", "--basis", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 2
    zero = tmp_path / "zero.json"
    save_basis(zero, LieBasis(np.zeros((1, 3, 3)), 3))
    assert main(["analyze", "--basis", str(zero), "--out", str(tmp_path / "o")]) == 3


def test_augment_eval_with_true_rotation(tmp_path):
    assert main(["augment-eval", "--seed", "1", "--set", "eval.count=400",
                 "--set", "eval.mlp_epochs=20", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "eval.json").read_text())
    assert res["predictor"] == "mlp" and res["mse_augmented"] < res["mse_plain"]
    assert main(["augment-eval", "--set", "eval.predictor=tree", "--out", str(tmp_path)]) == 2


def test_augment_eval_with_learned_basis_file(tmp_path):
    path = tmp_path / "b.json"
    save_basis(path, LieBasis(2 * algebras.ROT2[None], 8, block_size=2),
               GaussianCoefficients.make(1, 0.5))
    assert main(["augment-eval", "--basis", str(path), "--set", "eval.predictor=linear",
                 "--set", "eval.count=200", "--out", str(tmp_path / "o")]) == 0


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LIEGAN_THREADS", "1")
    assert main(["gen", "lorentz_invariant", "--count", "10", "--out", str(tmp_path)]) == 0
    monkeypatch.setenv("LIEGAN_THREADS", "many")
    assert main(["gen", "lorentz_invariant", "--count", "10", "--out", str(tmp_path)]) == 2
