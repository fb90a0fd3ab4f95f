import numpy as np
import pytest

from ctlqr import airplane_model, save_system
from ctlqr.cli import main


def read_outputs(out_dir):
    return {
        name: (out_dir / name).read_bytes()
        for name in ("regret.csv", "estimation.csv", "meta.json")
    }


def test_care_airplane(capsys):
    assert main(["care", "--airplane"]) == 0
    out = capsys.readouterr().out
    assert "residual" in out
    assert "Hurwitz" in out
    residual = float(out.split("residual = ")[1].split()[0])
    assert residual <= 1e-8


def test_validate_airplane(capsys):
    assert main(["validate", "--airplane"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_validate_broken_system(tmp_path, capsys):
    dyn, cost = airplane_model()
    import ctlqr

    broken = ctlqr.Dynamics(A=dyn.A, B=dyn.B, sigma=np.zeros((4, 4)))
    path = tmp_path / "broken.system"
    save_system(path, broken, cost)
    assert main(["validate", "--system", str(path)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_run_twice_identical(tmp_path, capsys):
    args = ["run", "--airplane", "--horizon", "100", "--replicates", "1", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert read_outputs(tmp_path / "a") == read_outputs(tmp_path / "b")


def test_run_from_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("system = airplane\nhorizon = 50\nreplicates = 1\nbase_seed = 1\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "regret.csv").exists()


def test_run_flag_overrides_config(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("system = airplane\nhorizon = 50\nreplicates = 1\nbase_seed = 1\n")
    assert main(["run", "--config", str(cfg), "--horizon", "80",
                 "--out", str(tmp_path / "out")]) == 0
    import json

    meta = json.loads((tmp_path / "out" / "meta.json").read_text())
    assert meta["config"]["horizon"] == 80.0


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["run", "--airplane", "--frobnicate"])
    assert err.value.code == 2


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_bench_smoke(capsys):
    assert main(["bench", "--steps", "2000", "--repeats", "1"]) == 0
    assert "steps/s" in capsys.readouterr().out


def test_config_error_reported(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert "error:" in capsys.readouterr().err
