"""Throughput benchmark comparing the step-kernel backends."""

from __future__ import annotations

import time

import numpy as np

from .backend import available_backends
from .linalg import optimal_gain
from .model import airplane_model
from .noise import NoisePath
from .sde import EstimatorAccumulators, simulate_segment

__all__ = ["run_benchmark", "format_benchmark"]


def run_benchmark(n_steps: int = 200_000, repeats: int = 3, dt: float = 1e-2) -> dict[str, float]:
    """Best-of-`repeats` steps/second per backend on the airplane closed loop."""
    dyn, cost = airplane_model()
    K = optimal_gain(dyn.A, dyn.B, cost.Q, cost.R)
    noise = NoisePath.generate(0, dt, n_steps, dyn.p)
    acc0 = EstimatorAccumulators.zero(dyn.p, dyn.q)
    results = {}
    for name in available_backends():
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            simulate_segment(
                dyn, cost, K, np.zeros(dyn.p), n_steps * dt, dt, noise, acc0, backend=name
            )
            best = min(best, time.perf_counter() - t0)
        results[name] = n_steps / best
    return results


def format_benchmark(results: dict[str, float], n_steps: int) -> str:
    lines = [f"step-kernel throughput ({n_steps} steps, airplane closed loop):"]
    fastest = max(results.values())
    for name in sorted(results, key=results.get, reverse=True):
        rate = results[name]
        lines.append(f"  {name:<8} {rate / 1e6:8.2f} M steps/s   (x{fastest / rate:.1f} vs fastest)")
    return "\n".join(lines)
