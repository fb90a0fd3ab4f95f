"""Experiment configuration, batch replication, and persistence.

An experiment is a plant (the built-in airplane benchmark or a system
file), a schedule, and a replicate count; replicate i runs with seed
base_seed + i, so datasets are fully determined by the configuration.
Replicates execute on a bounded thread pool (CTLQR_THREADS caps the
width) and are aggregated in index order, making outputs identical
across worker counts.

System file format (plain text, diffable):

    # optional comments
    p = 4
    q = 2
    A:
    <p rows of p floats>
    B:
    <p rows of q floats>
    sigma:
    <p rows of p floats>
    Q:
    <p rows of p floats>
    R:
    <q rows of q floats>

Config files use `key = value` lines with the same keys as the "config"
object written to meta.json.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CtlqrError
from .model import CostSpec, Dynamics, airplane_model, validate
from .policy import PolicyOptions, run_algorithm1, schedule
from .records import RunRecord, SafeguardEvent
from .regret import RegretCurve

__all__ = [
    "ExperimentConfig",
    "ExperimentDataset",
    "load_system",
    "save_system",
    "run_replicates",
    "emit_csv",
]

_ENV_THREADS = "CTLQR_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a dataset."""

    system: str = "airplane"
    horizon: float = 2e4
    dt: float = 1e-2
    gamma0: float = 25.0
    growth: float = 1.2
    replicates: int = 20
    base_seed: int = 20260810
    coupled: bool = True
    oracle_safeguard: bool = True
    ridge: float = 1e-6
    initial_estimate_std: float = 0.05
    blow_up_threshold: float = 1e6
    checkpoints: object = "auto"

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        for name in ("horizon", "dt", "gamma0", "blow_up_threshold"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.growth <= 1.0:
            raise ConfigError(f"growth must exceed 1, got {self.growth}")
        if self.ridge < 0 or self.initial_estimate_std < 0:
            raise ConfigError("ridge and initial_estimate_std must be >= 0")
        if isinstance(self.checkpoints, str):
            if self.checkpoints != "auto":
                raise ConfigError("checkpoints must be 'auto' or a time sequence")
        else:
            cps = tuple(float(t) for t in self.checkpoints)
            if not cps or min(cps) <= 0:
                raise ConfigError("checkpoints must be positive times")
            object.__setattr__(self, "checkpoints", cps)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if not isinstance(d["checkpoints"], str):
            d["checkpoints"] = list(d["checkpoints"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse a `key = value` config file; types follow the field types."""
        values: dict[str, object] = {}
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        field_types = {f.name: f.type for f in dataclasses.fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in field_types:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, value)
        return cls(**values)


def _parse_value(key: str, value: str):
    if key == "system":
        return value
    if key == "checkpoints":
        if value == "auto":
            return "auto"
        return tuple(float(v) for v in value.replace(",", " ").split())
    if key in ("replicates", "base_seed"):
        return int(value)
    if key in ("coupled", "oracle_safeguard"):
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {value!r}")
    return float(value)


@dataclass
class ExperimentDataset:
    """A config together with the replicate records it produced."""

    config: ExperimentConfig
    records: list[RunRecord]

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.records]


def save_system(path, dyn: Dynamics, cost: CostSpec) -> None:
    lines = [f"p = {dyn.p}", f"q = {dyn.q}"]
    for name, M in (("A", dyn.A), ("B", dyn.B), ("sigma", dyn.sigma), ("Q", cost.Q), ("R", cost.R)):
        lines.append(f"{name}:")
        for row in M:
            lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_system(path) -> tuple[Dynamics, CostSpec]:
    """Parse a system file; raises ConfigError on any inconsistency."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read system file {path}: {exc}") from exc
    p = q = None
    blocks: dict[str, list[list[float]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.endswith(":"):
            current = line[:-1].strip()
            if current not in ("A", "B", "sigma", "Q", "R"):
                raise ConfigError(f"{path}:{lineno}: unknown block {current!r}")
            blocks[current] = []
            continue
        if "=" in line and current is None:
            key, _, value = line.partition("=")
            key = key.strip()
            if key == "p":
                p = int(value)
            elif key == "q":
                q = int(value)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown header {key!r}")
            continue
        if current is None:
            raise ConfigError(f"{path}:{lineno}: data outside any block")
        try:
            blocks[current].append([float(v) for v in line.split()])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad number: {exc}") from exc
    if p is None or q is None:
        raise ConfigError(f"{path}: missing p = / q = headers")
    shapes = {"A": (p, p), "B": (p, q), "sigma": (p, p), "Q": (p, p), "R": (q, q)}
    mats = {}
    for name, shape in shapes.items():
        if name not in blocks:
            raise ConfigError(f"{path}: missing block {name!r}")
        M = np.asarray(blocks[name], dtype=float)
        if M.shape != shape:
            raise ConfigError(f"{path}: block {name} has shape {M.shape}, expected {shape}")
        mats[name] = M
    try:
        dyn = Dynamics(A=mats["A"], B=mats["B"], sigma=mats["sigma"])
        cost = CostSpec(Q=mats["Q"], R=mats["R"])
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return dyn, cost


def resolve_system(system: str) -> tuple[Dynamics, CostSpec]:
    if system == "airplane":
        return airplane_model()
    return load_system(system)


def _worker_count(replicates: int) -> int:
    env = os.environ.get(_ENV_THREADS, "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"{_ENV_THREADS} must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ConfigError(f"{_ENV_THREADS} must be >= 1")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, replicates))


def run_replicates(cfg: ExperimentConfig, backend: str | None = None) -> ExperimentDataset:
    """Execute all replicates of the configured experiment.

    Deterministic given the config: replicate i uses seed base_seed + i
    and records are aggregated in replicate order regardless of the pool
    width. A failed replicate yields an aborted record without affecting
    the others.
    """
    dyn, cost = resolve_system(cfg.system)
    report = validate(dyn, cost)
    if not report.passed:
        raise ConfigError(f"system failed validation: {'; '.join(report.messages)}")
    sched = schedule(cfg.gamma0, cfg.growth, cfg.horizon)
    checkpoints = None if cfg.checkpoints == "auto" else cfg.checkpoints
    options = PolicyOptions(
        oracle_safeguard=cfg.oracle_safeguard,
        blow_up_threshold=cfg.blow_up_threshold,
        initial_estimate_std=cfg.initial_estimate_std,
        ridge=cfg.ridge,
        coupled=cfg.coupled,
        backend=backend,
    )

    def run_one(i: int) -> RunRecord:
        seed = cfg.base_seed + i
        try:
            record = run_algorithm1(dyn, cost, sched, cfg.dt, seed, options, checkpoints=checkpoints)
        except CtlqrError as exc:
            # Isolation: a failed replicate becomes an aborted record and
            # never disturbs the others.
            record = RunRecord(
                seed=seed,
                status="aborted",
                schedule_times=sched.times.copy(),
                episodes=[],
                regret=RegretCurve.from_regret(np.zeros(0), np.zeros(0)),
                events=[SafeguardEvent(episode=0, kind="abort", detail=str(exc))],
                wall_time=0.0,
                backend=backend or "auto",
                initial_redraws=0,
            )
        record.config = cfg.to_dict()
        return record

    workers = _worker_count(cfg.replicates)
    if workers == 1:
        records = [run_one(i) for i in range(cfg.replicates)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_one, range(cfg.replicates)))
    return ExperimentDataset(config=cfg, records=records)


def _fmt(v: float) -> str:
    return repr(float(v))


def emit_csv(dataset: ExperimentDataset, out_dir) -> dict[str, Path]:
    """Write regret.csv, estimation.csv and meta.json into out_dir.

    Columns (fixed order, '.' decimal separator, UTF-8, header row):
      regret.csv:     replicate,T,regret,normalized_regret
      estimation.csv: replicate,episode,gamma_n,est_error,resamples
    meta.json holds the full config, artifact version and seeds, and
    round-trips through ExperimentConfig.from_dict.
    """
    if not dataset.records:
        raise ConfigError("dataset is empty")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc

    paths = {
        "regret": out / "regret.csv",
        "estimation": out / "estimation.csv",
        "meta": out / "meta.json",
    }
    try:
        with open(paths["regret"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("replicate,T,regret,normalized_regret\n")
            for i, rec in enumerate(dataset.records):
                for T, r, nr in zip(rec.regret.times, rec.regret.regret, rec.regret.normalized):
                    fh.write(f"{i},{_fmt(T)},{_fmt(r)},{_fmt(nr)}\n")
        with open(paths["estimation"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("replicate,episode,gamma_n,est_error,resamples\n")
            for i, rec in enumerate(dataset.records):
                for ep in rec.episodes:
                    fh.write(
                        f"{i},{ep.index},{_fmt(ep.gamma)},{_fmt(ep.est_error)},{ep.resamples}\n"
                    )
        meta = {
            "artifact_version": __version__,
            "config": dataset.config.to_dict(),
            "seeds": dataset.seeds,
            "statuses": [rec.status for rec in dataset.records],
            "backend": dataset.records[0].backend,
        }
        with open(paths["meta"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"failed writing outputs under {out}: {exc}") from exc
    return paths
