"""Episodic randomized certainty-equivalent control.

The driver alternates between two phases on a geometric episode schedule:
apply the certainty-equivalent feedback for the current (randomized)
parameter estimate while the episode runs, then at the episode boundary
refit the least-squares estimate on the full trajectory so far, add the
gamma^{-1/4}-scaled Gaussian randomization, and solve the Riccati
equation for the next gain. A stability safeguard stands in for the
initial-stabilization machinery the theory presumes: candidate gains that
destabilize the true plant are redrawn (bounded retries, every event
recorded) when the oracle check is enabled, or left to trip the
simulator's blow-up guard when it is not.

Randomness is organized in per-purpose Philox substreams (noise path,
initial estimate, one stream per episode's randomization) so that runs
are reproducible and re-runs at a different step size consume identical
policy randomness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError, DimensionError, ScheduleError
from .estimator import (
    ParameterEstimate,
    draw_initial_estimate,
    estimation_error,
    least_squares,
    randomize,
)
from .linalg import Gain, is_hurwitz, optimal_gain
from .model import CostSpec, Dynamics
from .noise import NoisePath
from .records import EpisodeRecord, RunRecord, SafeguardEvent
from .regret import RegretCurve
from .sde import EstimatorAccumulators, Trajectory, simulate_segment, self_normalized_statistic

__all__ = [
    "EpisodeSchedule",
    "PolicyOptions",
    "schedule",
    "safeguard",
    "run_algorithm1",
]

# Substream tags for SeedSequence spawn keys.
_STREAM_NOISE = 0
_STREAM_ORACLE_NOISE = 1
_STREAM_INIT = 2
_STREAM_EPISODE = 3


@dataclass(frozen=True)
class EpisodeSchedule:
    """Geometric boundary times gamma_n = gamma0 * growth^n, clipped at the
    horizon (the final boundary is the horizon itself).

    The relative increment (gamma_{n+1} - gamma_n) / gamma_n is the
    constant growth - 1, so the admissible-episode-length bounds hold with
    both constants equal to it.
    """

    gamma0: float
    growth: float
    horizon: float
    times: np.ndarray

    @property
    def n_boundaries(self) -> int:
        return self.times.shape[0]


def schedule(gamma0: float, growth: float, horizon: float) -> EpisodeSchedule:
    """Build the boundary sequence; episodes must grow (growth > 1)."""
    if gamma0 <= 0.0:
        raise ScheduleError(f"gamma0 must be positive, got {gamma0}")
    if growth <= 1.0:
        raise ScheduleError(f"growth must exceed 1 (episodes must grow), got {growth}")
    if horizon < gamma0:
        raise ScheduleError(f"horizon {horizon} is below the first boundary {gamma0}")
    times = []
    g = gamma0
    while g < horizon * (1.0 - 1e-12):
        times.append(g)
        g *= growth
    times.append(float(horizon))
    times = np.asarray(times, dtype=float)
    ratios = np.diff(times[:-1]) / times[:-2] if times.size > 2 else np.array([])
    if ratios.size and not np.allclose(ratios, growth - 1.0, rtol=1e-9):
        raise ScheduleError("internal: relative episode increments are not constant")
    return EpisodeSchedule(gamma0=gamma0, growth=growth, horizon=float(horizon), times=times)


@dataclass(frozen=True)
class PolicyOptions:
    """Knobs and test hooks for run_algorithm1.

    The first block is the public surface; the hooks below it pin parts
    of the policy for validation (forcing the oracle gain, zeroing the
    randomization, overriding the initial estimate or the noise path) and
    are never active by default.
    """

    oracle_safeguard: bool = True
    max_resample: int = 50
    blow_up_threshold: float = 1e6
    initial_estimate_std: float = 0.05
    ridge: float = 1e-6
    coupled: bool = True
    keep_trajectory: bool = False
    backend: str | None = None
    x0: np.ndarray | None = None

    zero_perturbation: bool = False
    pin_estimate_to_truth: bool = False
    force_oracle_gain: bool = False
    initial_estimate: np.ndarray | None = None
    noise: NoisePath | None = None
    oracle_noise: NoisePath | None = None


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _gain_from(est: ParameterEstimate, p: int, cost: CostSpec) -> Gain:
    A_hat, B_hat = est.split(p)
    return optimal_gain(A_hat, B_hat, cost.Q, cost.R)


def safeguard(
    estimate: ParameterEstimate,
    dyn: Dynamics,
    cost: CostSpec,
    rng,
    options: PolicyOptions,
    episode: int = 0,
) -> tuple[ParameterEstimate, Gain | None, list[SafeguardEvent]]:
    """Certainty-equivalent gain for the estimate, with stability retries.

    Computes K from the Riccati solution for the estimated matrices. With
    the oracle safeguard enabled, additionally requires the true closed
    loop A + B K to be Hurwitz, redrawing the randomization (around the
    unchanged least-squares part) up to max_resample times; every redraw
    is recorded. Without it, only the estimate-side loop is checked
    (Hurwitz by construction when the Riccati solve succeeds) and
    instability surfaces later as a simulator blow-up. Returns
    (estimate_used, gain_or_None, events); a None gain means the budget
    was exhausted and an abort event was appended.
    """
    events: list[SafeguardEvent] = []
    current = estimate
    for attempt in range(options.max_resample + 1):
        detail = None
        gain = None
        try:
            gain = _gain_from(current, dyn.p, cost)
        except Exception as exc:
            detail = f"gain computation failed: {exc}"
        if gain is not None and options.oracle_safeguard:
            if not is_hurwitz(dyn.A + dyn.B @ gain.K):
                detail = "candidate gain destabilizes the true plant"
                gain = None
        if gain is not None:
            return current, gain, events
        if attempt == options.max_resample or current.gamma <= 0.0:
            break
        events.append(SafeguardEvent(episode=episode, kind="resample", detail=detail))
        current = randomize(current.ls_part, current.gamma, rng, episode_index=episode)
    events.append(
        SafeguardEvent(
            episode=episode,
            kind="abort",
            detail=f"no stabilizing gain within {options.max_resample} resamples",
        )
    )
    return current, None, events


def _episode_estimate(
    acc: EstimatorAccumulators,
    gamma_n: float,
    episode: int,
    rng,
    dyn: Dynamics,
    options: PolicyOptions,
) -> ParameterEstimate:
    if options.pin_estimate_to_truth:
        theta = dyn.theta()
        return ParameterEstimate(
            theta=theta,
            episode_index=episode,
            ls_part=theta,
            perturbation=np.zeros_like(theta),
            gamma=gamma_n,
        )
    ls = least_squares(acc, options.ridge)
    if options.zero_perturbation:
        return ParameterEstimate(
            theta=ls,
            episode_index=episode,
            ls_part=ls,
            perturbation=np.zeros_like(ls),
            gamma=gamma_n,
        )
    return randomize(ls, gamma_n, rng, episode_index=episode)


def _initial_estimate(
    dyn: Dynamics, cost: CostSpec, seed: int, options: PolicyOptions
) -> tuple[ParameterEstimate, int]:
    if options.pin_estimate_to_truth or options.force_oracle_gain:
        theta = dyn.theta()
        return (
            ParameterEstimate(
                theta=theta, episode_index=0, ls_part=theta, perturbation=np.zeros_like(theta)
            ),
            0,
        )
    if options.initial_estimate is not None:
        theta = np.asarray(options.initial_estimate, dtype=float)
        if theta.shape != (dyn.p, dyn.p + dyn.q):
            raise DimensionError(
                f"initial estimate must be ({dyn.p}, {dyn.p + dyn.q}), got {theta.shape}"
            )
        return (
            ParameterEstimate(
                theta=theta, episode_index=0, ls_part=theta, perturbation=np.zeros_like(theta)
            ),
            0,
        )
    rng = _substream(seed, _STREAM_INIT)
    return draw_initial_estimate(dyn, cost, rng, std=options.initial_estimate_std)


def _concat_segments(segments: list[Trajectory]) -> Trajectory:
    """Join contiguous segments; each boundary sample keeps the incoming
    segment's input row (the feedback actually applied from that time)."""
    times = np.concatenate([s.times[:-1] for s in segments[:-1]] + [segments[-1].times])
    states = np.concatenate([s.states[:-1] for s in segments[:-1]] + [segments[-1].states])
    inputs = np.concatenate([s.inputs[:-1] for s in segments[:-1]] + [segments[-1].inputs])
    costs = []
    offset = 0.0
    for i, s in enumerate(segments):
        chunk = s.running_cost if i == len(segments) - 1 else s.running_cost[:-1]
        costs.append(chunk + offset)
        offset += s.running_cost[-1]
    return Trajectory(
        times=times, states=states, inputs=inputs, running_cost=np.concatenate(costs)
    )


def run_algorithm1(
    dyn: Dynamics,
    cost: CostSpec,
    sched: EpisodeSchedule,
    dt: float,
    seed: int,
    options: PolicyOptions | None = None,
    checkpoints=None,
) -> RunRecord:
    """Run the randomized certainty-equivalent policy over the schedule.

    During [gamma_{n-1}, gamma_n) the feedback from estimate n-1 is
    applied; at each boundary the estimate is refit on the accumulators
    over the full trajectory from time 0 (they are never reset), then
    randomized and passed through the safeguard for the next gain. The
    oracle-optimal closed loop runs alongside on the same noise (coupled
    mode, default) or on an independent path, and the regret curve is
    recorded at the checkpoints (episode boundaries unless overridden).

    Boundaries snap to the dt grid. Returns a RunRecord; failures
    (safeguard exhaustion, simulator blow-up) truncate the run and mark
    it aborted rather than raising.
    """
    options = options or PolicyOptions()
    t_start = time.perf_counter()
    p, q = dyn.p, dyn.q

    boundary_steps = np.asarray([int(round(t / dt)) for t in sched.times], dtype=int)
    if boundary_steps[0] <= 0 or np.any(np.diff(boundary_steps) <= 0):
        raise ScheduleError("schedule boundaries collapse on the dt grid; decrease dt")
    if checkpoints is None:
        checkpoint_steps = boundary_steps.copy()
    else:
        checkpoint_steps = np.asarray(
            sorted({int(round(float(T) / dt)) for T in np.atleast_1d(checkpoints)}), dtype=int
        )
        if checkpoint_steps.size == 0 or checkpoint_steps[0] <= 0:
            raise ScheduleError("checkpoints must be positive times")
        if checkpoint_steps[-1] > boundary_steps[-1]:
            raise ScheduleError("checkpoints extend beyond the horizon")
    boundary_set = {int(s) for s in boundary_steps}
    checkpoint_set = {int(s) for s in checkpoint_steps}
    event_steps = sorted(boundary_set | checkpoint_set)
    total_steps = event_steps[-1]

    noise = options.noise or NoisePath.generate(
        np.random.SeedSequence(seed, spawn_key=(_STREAM_NOISE,)), dt, total_steps, p
    )
    if options.coupled:
        oracle_noise = options.oracle_noise or noise
    else:
        oracle_noise = options.oracle_noise or NoisePath.generate(
            np.random.SeedSequence(seed, spawn_key=(_STREAM_ORACLE_NOISE,)), dt, total_steps, p
        )

    k_star = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R)
    est0, initial_redraws = _initial_estimate(dyn, cost, seed, options)
    gain0 = k_star if options.force_oracle_gain else _gain_from(est0, p, cost)

    x0 = np.zeros(p) if options.x0 is None else np.asarray(options.x0, dtype=float).reshape(p)
    x_adaptive = x0.copy()
    x_oracle = x0.copy()
    acc = EstimatorAccumulators.zero(p, q)
    cum_adaptive = 0.0
    cum_oracle = 0.0

    episodes: list[EpisodeRecord] = []
    events: list[SafeguardEvent] = []
    curve_times: list[float] = []
    curve_regret: list[float] = []
    adaptive_segments: list[Trajectory] = []
    oracle_segments: list[Trajectory] = []
    gain_segments: list[tuple[np.ndarray, int]] = []
    status = "ok"

    current_gain = gain0
    prev_step = 0
    boundary_index = 0

    for step in event_steps:
        n_seg = step - prev_step
        try:
            traj_a, acc, x_adaptive = simulate_segment(
                dyn,
                cost,
                current_gain,
                x_adaptive,
                n_seg * dt,
                dt,
                noise.slice(prev_step, step),
                acc,
                t0=prev_step * dt,
                blow_up_threshold=options.blow_up_threshold,
                backend=options.backend,
            )
            traj_o, _, x_oracle = simulate_segment(
                dyn,
                cost,
                k_star,
                x_oracle,
                n_seg * dt,
                dt,
                oracle_noise.slice(prev_step, step),
                acc,
                t0=prev_step * dt,
                update_accumulators=False,
                blow_up_threshold=options.blow_up_threshold,
                backend=options.backend,
            )
        except BlowUpError as exc:
            events.append(
                SafeguardEvent(episode=boundary_index, kind="abort", detail=str(exc))
            )
            status = "aborted"
            break
        cum_adaptive += traj_a.running_cost[-1]
        cum_oracle += traj_o.running_cost[-1]
        if options.keep_trajectory:
            adaptive_segments.append(traj_a)
            oracle_segments.append(traj_o)
            gain_segments.append((current_gain.K.copy(), n_seg))
        prev_step = step

        if step in checkpoint_set:
            curve_times.append(step * dt)
            curve_regret.append(cum_adaptive - cum_oracle)

        if step in boundary_set:
            gamma_n = step * dt
            try:
                stat = self_normalized_statistic(acc)
            except ValueError:
                stat = float("nan")

            if boundary_index == 0:
                episodes.append(
                    EpisodeRecord(
                        index=0,
                        gamma=gamma_n,
                        estimate=est0,
                        est_error=estimation_error(est0, dyn),
                        gain=gain0.K,
                        resamples=initial_redraws,
                        self_normalized_stat=stat,
                    )
                )
            else:
                rng_n = _substream(seed, _STREAM_EPISODE, boundary_index)
                est = _episode_estimate(acc, gamma_n, boundary_index, rng_n, dyn, options)
                est, gain, ep_events = safeguard(
                    est, dyn, cost, rng_n, options, episode=boundary_index
                )
                events.extend(ep_events)
                resamples = sum(1 for e in ep_events if e.kind == "resample")
                episodes.append(
                    EpisodeRecord(
                        index=boundary_index,
                        gamma=gamma_n,
                        estimate=est,
                        est_error=estimation_error(est, dyn),
                        gain=None if gain is None else gain.K,
                        resamples=resamples,
                        self_normalized_stat=stat,
                    )
                )
                if gain is None:
                    status = "aborted"
                    break
                current_gain = k_star if options.force_oracle_gain else gain
            boundary_index += 1

    curve = RegretCurve.from_regret(np.asarray(curve_times), np.asarray(curve_regret))
    record = RunRecord(
        seed=seed,
        status=status,
        schedule_times=boundary_steps * dt,
        episodes=episodes,
        regret=curve,
        events=events,
        wall_time=time.perf_counter() - t_start,
        backend=_resolved_backend_name(options.backend),
        initial_redraws=initial_redraws,
    )
    if options.keep_trajectory and adaptive_segments:
        record.adaptive_trajectory = _concat_segments(adaptive_segments)
        record.oracle_trajectory = _concat_segments(oracle_segments)
        record.gain_segments = gain_segments
    return record


def _resolved_backend_name(name: str | None) -> str:
    from . import backend as _backend

    resolved, _ = _backend.get_backend(name)
    return resolved
