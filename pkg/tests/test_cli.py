import io
import json
import subprocess
import sys

import pytest

from evfusion.cli import main

ZADEH_JSON = json.dumps([{"beliefs": [0.99, 0.0, 0.01], "uncertainty": 0.0},
                         {"beliefs": [0.0, 0.99, 0.01], "uncertainty": 0.0}])


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_demo_zadeh(capsys):
    code, out, _ = run(["demo", "zadeh"], capsys)
    assert code == 0
    assert "DBF lambda=3    0.1533  0.1533  0.0031  0.6903" in out
    assert "BCF             0.0000  0.0000  1.0000  0.0000" in out


def test_fuse_from_stdin(capsys, monkeypatch):
    code, out, _ = run(["fuse", "--method", "dbf", "--lambda", "1"], capsys, ZADEH_JSON, monkeypatch)
    result = json.loads(out)
    assert code == 0 and result["fused"]["uncertainty"] == pytest.approx(0.99)
    assert result["diagnostics"]["discount_factors"] == pytest.approx([0.01, 0.01])


def test_fuse_order_matters_only_for_sequential_averaging(capsys, tmp_path):
    path = tmp_path / "ops.json"
    path.write_text(json.dumps([{"beliefs": [b, 0.0], "uncertainty": 1 - b}
                                for b in (0.6, 0.2, 0.9)]))
    outs = {}
    for method in ("baf", "gbaf"):
        for order in ("0,1,2", "2,1,0"):
            code, out, _ = run(["fuse", str(path), "--method", method, "--order", order], capsys)
            assert code == 0
            outs[method, order] = json.loads(out)["fused"]["uncertainty"]
    assert outs["baf", "0,1,2"] != pytest.approx(outs["baf", "2,1,0"])
    assert outs["gbaf", "0,1,2"] == pytest.approx(outs["gbaf", "2,1,0"], abs=1e-15)


@pytest.mark.parametrize("argv, stdin, fragment", [
    (["fuse"], "not json", "error"),
    (["fuse"], '{"beliefs": [1.0]}', "array"),
    (["fuse", "--order", "0,0"], ZADEH_JSON, "permutation"),
    (["fuse", "--method", "bcf"], json.dumps([{"beliefs": [1, 0], "uncertainty": 0},
                                              {"beliefs": [0, 1], "uncertainty": 0}]), "conflict"),
    (["fuse", "missing.json"], None, "missing.json"),
])
def test_errors_exit_nonzero(argv, stdin, fragment, capsys, monkeypatch):
    code, _, err = run(argv, capsys, stdin, monkeypatch)
    assert code == 1 and fragment in err


def test_gen_train_and_bench(tmp_path, capsys):
    spec = tmp_path / "spec.cfg"
    spec.write_text("n_classes = 3\nn_views = 2\ndim = 4\nn_samples = 150\nseed = 1\n")
    data = tmp_path / "data"
    assert run(["bench", "gen", "--spec", str(spec), "--out", str(data)], capsys)[0] == 0
    assert (data / "train_view1.csv").exists() and (data / "test_labels.csv").exists()

    cfg = tmp_path / "train.cfg"
    cfg.write_text("epochs = 2\nhidden = 8\nfusion = gbaf\n")
    code, out, _ = run(["train", "--config", str(cfg), "--features", str(data / "train_view0.csv"),
                        str(data / "train_view1.csv"), "--labels", str(data / "train_labels.csv"),
                        "--out", str(tmp_path / "model")], capsys)
    assert code == 0 and "gbaf" in out
    assert (tmp_path / "model" / "network.json").exists()
    assert (tmp_path / "model" / "loss_history_0.csv").exists()

    exp = tmp_path / "exp.cfg"
    exp.write_text("methods = dbf\nseeds = 0\nn_samples = 120\ndim = 3\nepochs = 1\nhidden = 4\n")
    code, out, _ = run(["bench", "run", "--config", str(exp), "--out", str(tmp_path / "rep")],
                       capsys)
    assert code == 0 and (tmp_path / "rep" / "report.json").exists()


def test_bad_spec_key(tmp_path, capsys):
    spec = tmp_path / "spec.cfg"
    spec.write_text("classes = 3\n")
    code, _, err = run(["bench", "gen", "--spec", str(spec), "--out", str(tmp_path)], capsys)
    assert code == 1 and "classes" in err


def test_console_script_is_installed():
    proc = subprocess.run(["evfusion", "demo", "zadeh"], capture_output=True, text=True)
    assert proc.returncode == 0 and "CBF" in proc.stdout
