import json

import numpy as np
import pytest

from ctlqr import (
    ConfigError,
    CtlqrError,
    ExperimentConfig,
    airplane_model,
    emit_csv,
    load_system,
    run_replicates,
    save_system,
)
from ctlqr.experiment import ExperimentDataset, resolve_system

SMALL = dict(horizon=100.0, replicates=2, base_seed=7)


def small_config(**overrides):
    return ExperimentConfig(**{**SMALL, **overrides})


def read_outputs(out_dir):
    return {
        name: (out_dir / name).read_bytes()
        for name in ("regret.csv", "estimation.csv", "meta.json")
    }


class TestConfig:
    def test_roundtrip_dict(self):
        cfg = small_config(checkpoints=(50.0, 100.0))
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"horizont": 100.0})

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(replicates=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(growth=1.0)
        with pytest.raises(ConfigError):
            ExperimentConfig(checkpoints="sometimes")

    def test_config_file_parsing(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# airplane, short run\n"
            "system = airplane\n"
            "horizon = 100\n"
            "dt = 0.01\n"
            "replicates = 2\n"
            "base_seed = 7\n"
            "coupled = true\n"
            "oracle_safeguard = on\n"
            "checkpoints = 50 100\n"
        )
        cfg = ExperimentConfig.from_file(path)
        assert cfg.horizon == 100.0
        assert cfg.replicates == 2
        assert cfg.coupled and cfg.oracle_safeguard
        assert cfg.checkpoints == (50.0, 100.0)

    def test_config_file_bad_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("horizons = 100\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(path)


class TestSystemFiles:
    def test_roundtrip(self, tmp_path):
        dyn, cost = airplane_model()
        path = tmp_path / "airplane.system"
        save_system(path, dyn, cost)
        dyn2, cost2 = load_system(path)
        np.testing.assert_array_equal(dyn2.A, dyn.A)
        np.testing.assert_array_equal(dyn2.B, dyn.B)
        np.testing.assert_array_equal(dyn2.sigma, dyn.sigma)
        np.testing.assert_array_equal(cost2.Q, cost.Q)
        np.testing.assert_array_equal(cost2.R, cost.R)

    def test_missing_block(self, tmp_path):
        path = tmp_path / "bad.system"
        path.write_text("p = 1\nq = 1\nA:\n-1.0\nB:\n1.0\nsigma:\n1.0\nQ:\n1.0\n")
        with pytest.raises(ConfigError, match="R"):
            load_system(path)

    def test_wrong_shape(self, tmp_path):
        path = tmp_path / "bad.system"
        path.write_text(
            "p = 2\nq = 1\nA:\n-1.0 0.0\nB:\n1.0\n0.0\nsigma:\n1.0 0.0\n0.0 1.0\n"
            "Q:\n1.0 0.0\n0.0 1.0\nR:\n1.0\n"
        )
        with pytest.raises(ConfigError, match="shape"):
            load_system(path)

    def test_bad_number(self, tmp_path):
        path = tmp_path / "bad.system"
        path.write_text("p = 1\nq = 1\nA:\nnot-a-number\n")
        with pytest.raises(ConfigError):
            load_system(path)

    def test_unreadable_path(self):
        with pytest.raises(ConfigError):
            load_system("/nonexistent/system.txt")

    def test_config_error_raised_before_simulation(self, tmp_path):
        cfg = small_config(system=str(tmp_path / "missing.system"))
        with pytest.raises(ConfigError):
            run_replicates(cfg)


class TestRunReplicates:
    def test_single_replicate_single_episode(self):
        ds = run_replicates(ExperimentConfig(horizon=25.0, replicates=1, base_seed=3))
        assert len(ds.records) == 1
        assert ds.records[0].n_episodes == 1
        assert ds.records[0].status == "ok"

    def test_deterministic_outputs(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            ds = run_replicates(small_config())
            out = tmp_path / tag
            emit_csv(ds, out)
            outs.append(read_outputs(out))
        assert outs[0] == outs[1]

    def test_thread_count_does_not_change_outputs(self, tmp_path, monkeypatch):
        outs = []
        for tag, threads in (("x", "1"), ("y", "3")):
            monkeypatch.setenv("CTLQR_THREADS", threads)
            ds = run_replicates(small_config(replicates=3))
            out = tmp_path / tag
            emit_csv(ds, out)
            outs.append(read_outputs(out))
        assert outs[0] == outs[1]

    def test_replicate_failure_is_isolated(self, monkeypatch):
        import ctlqr.experiment as exp

        real = exp.run_algorithm1

        def sometimes_broken(dyn, cost, sched, dt, seed, options, checkpoints=None):
            if seed == SMALL["base_seed"] + 1:
                raise CtlqrError("synthetic failure")
            return real(dyn, cost, sched, dt, seed, options, checkpoints=checkpoints)

        monkeypatch.setattr(exp, "run_algorithm1", sometimes_broken)
        ds = run_replicates(small_config(replicates=3))
        statuses = [r.status for r in ds.records]
        assert statuses == ["ok", "aborted", "ok"]
        clean = run_replicates(small_config(replicates=3))
        np.testing.assert_array_equal(
            ds.records[2].regret.regret, clean.records[2].regret.regret
        )

    def test_invalid_thread_env_rejected(self, monkeypatch):
        monkeypatch.setenv("CTLQR_THREADS", "many")
        with pytest.raises(ConfigError):
            run_replicates(small_config())


class TestEmitCsv:
    def test_row_counts_and_schema(self, tmp_path):
        cfg = small_config(replicates=1, checkpoints=(30.0, 60.0, 100.0))
        ds = run_replicates(cfg)
        paths = emit_csv(ds, tmp_path / "out")
        regret_lines = paths["regret"].read_text().splitlines()
        assert regret_lines[0] == "replicate,T,regret,normalized_regret"
        assert len(regret_lines) == 1 + 3
        est_lines = paths["estimation"].read_text().splitlines()
        assert est_lines[0] == "replicate,episode,gamma_n,est_error,resamples"
        assert len(est_lines) == 1 + ds.records[0].n_episodes

    def test_normalized_column_rederivable(self, tmp_path):
        ds = run_replicates(small_config(replicates=1))
        paths = emit_csv(ds, tmp_path / "out")
        for line in paths["regret"].read_text().splitlines()[1:]:
            _, T, regret, normalized = line.split(",")
            assert float(normalized) == float(regret) / np.sqrt(float(T))

    def test_meta_roundtrip_reproduces_dataset(self, tmp_path):
        ds = run_replicates(small_config())
        paths = emit_csv(ds, tmp_path / "one")
        meta = json.loads(paths["meta"].read_text())
        cfg2 = ExperimentConfig.from_dict(meta["config"])
        ds2 = run_replicates(cfg2)
        emit_csv(ds2, tmp_path / "two")
        assert read_outputs(tmp_path / "one") == read_outputs(tmp_path / "two")
        assert meta["seeds"] == [SMALL["base_seed"], SMALL["base_seed"] + 1]
        assert "artifact_version" in meta

    def test_empty_dataset_rejected(self, tmp_path):
        ds = ExperimentDataset(config=small_config(), records=[])
        with pytest.raises(ConfigError):
            emit_csv(ds, tmp_path / "out")


def test_resolve_system_airplane():
    dyn, cost = resolve_system("airplane")
    assert dyn.p == 4 and dyn.q == 2 and cost.Q.shape == (4, 4)
