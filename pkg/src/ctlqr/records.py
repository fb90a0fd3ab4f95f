"""Record types produced by adaptive-control runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimator import ParameterEstimate
from .regret import RegretCurve

__all__ = ["SafeguardEvent", "EpisodeRecord", "RunRecord"]


@dataclass(frozen=True)
class SafeguardEvent:
    """One stability-safeguard intervention, recorded in run order.

    kind is "resample" (randomization redrawn) or "abort" (budget
    exhausted or simulator blow-up; the run is marked failed).
    """

    episode: int
    kind: str
    detail: str


@dataclass(frozen=True)
class EpisodeRecord:
    """State of the policy at one schedule boundary.

    Row 0 carries the initial estimate (labelled with the first boundary
    time); row n >= 1 carries the estimate recomputed at gamma_n. `gain`
    is the feedback computed from this row's estimate, i.e. the one
    applied from this boundary until the next. est_error is the
    spectral-norm distance to the true parameters (an oracle-side metric,
    available because the harness knows the plant).
    """

    index: int
    gamma: float
    estimate: ParameterEstimate
    est_error: float
    gain: np.ndarray | None
    resamples: int
    self_normalized_stat: float


@dataclass
class RunRecord:
    """Complete outcome of one adaptive-control run.

    status is "ok" or "aborted"; aborted runs always carry an abort event
    and truncate episodes/regret at the failure point.
    """

    seed: int
    status: str
    schedule_times: np.ndarray
    episodes: list[EpisodeRecord]
    regret: RegretCurve
    events: list[SafeguardEvent]
    wall_time: float
    backend: str
    initial_redraws: int
    config: dict | None = None
    adaptive_trajectory: object | None = None
    oracle_trajectory: object | None = None
    gain_segments: list[tuple[np.ndarray, int]] | None = field(default=None, repr=False)

    @property
    def n_episodes(self) -> int:
        return len(self.episodes)
