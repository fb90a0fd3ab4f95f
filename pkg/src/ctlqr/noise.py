"""Reproducible Brownian increments for the simulator.

Increments are drawn with a counter-based Philox generator keyed by the
seed, on a canonical coarse grid of step CANONICAL_DT, and conditionally
split into finer steps when a smaller dt is requested (the sub-increments
are i.i.d. N(0, dt I) and sum exactly to the coarse increment). Paths
generated from one seed at different step sizes therefore discretize the
same underlying Brownian motion, which is what makes step-size robustness
checks meaningful: halving dt refines the path instead of replacing it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = ["NoisePath", "CANONICAL_DT"]

# Coarse grid on which the base Brownian increments are drawn. Requested
# step sizes must be an integer divisor or multiple of this.
CANONICAL_DT = 1e-2

_GRID_RTOL = 1e-9


def _grid_factor(dt: float) -> tuple[int, int]:
    """Return (refine, aggregate) factors linking dt to the canonical grid.

    Exactly one of the two is > 1 unless dt equals CANONICAL_DT.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise DimensionError(f"dt must be positive and finite, got {dt}")
    ratio = CANONICAL_DT / dt
    m = int(round(ratio))
    if m >= 1 and abs(ratio - m) <= _GRID_RTOL * ratio:
        return m, 1
    ratio = dt / CANONICAL_DT
    k = int(round(ratio))
    if k >= 1 and abs(ratio - k) <= _GRID_RTOL * ratio:
        return 1, k
    raise DimensionError(
        f"dt={dt} is not commensurate with the canonical grid step {CANONICAL_DT}; "
        "use an integer divisor or multiple"
    )


@dataclass(frozen=True)
class NoisePath:
    """Brownian increments on a uniform grid, reproducible from a seed.

    increments has shape (n_steps, p); row k is distributed N(0, dt I_p).
    """

    seed: object
    dt: float
    increments: np.ndarray

    def __post_init__(self):
        inc = np.ascontiguousarray(self.increments, dtype=float)
        if inc.ndim != 2:
            raise DimensionError(f"increments must be 2-D, got shape {inc.shape}")
        if not np.all(np.isfinite(inc)):
            raise DimensionError("increments contain non-finite values")
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def dim(self) -> int:
        return self.increments.shape[1]

    def slice(self, start: int, stop: int) -> "NoisePath":
        """View of steps [start, stop); shares the underlying buffer."""
        if not (0 <= start <= stop <= self.n_steps):
            raise DimensionError(
                f"slice [{start}, {stop}) out of range for {self.n_steps} steps"
            )
        return NoisePath(seed=self.seed, dt=self.dt, increments=self.increments[start:stop])

    @classmethod
    def generate(cls, seed, dt: float, n_steps: int, dim: int) -> "NoisePath":
        """Draw n_steps increments of dimension dim at step dt.

        seed may be an int or a numpy SeedSequence. The same seed at a
        finer (divisor) dt yields a refinement of the same path: coarse
        increments equal the sums of the corresponding fine ones.
        """
        if n_steps < 0:
            raise DimensionError(f"n_steps must be >= 0, got {n_steps}")
        m, k = _grid_factor(dt)
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        # Stateless children (SeedSequence.spawn would advance a counter on ss).
        coarse_ss = np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (0,))
        refine_ss = np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (1,))
        coarse_rng = np.random.Generator(np.random.Philox(coarse_ss))

        if k > 1:
            # Coarser than canonical: aggregate k coarse increments per step.
            base = coarse_rng.standard_normal((n_steps * k, dim)) * np.sqrt(CANONICAL_DT)
            inc = base.reshape(n_steps, k, dim).sum(axis=1)
        elif m == 1:
            inc = coarse_rng.standard_normal((n_steps, dim)) * np.sqrt(CANONICAL_DT)
        else:
            # Finer than canonical: split each coarse increment into m
            # conditionally-drawn sub-increments that sum to it exactly.
            n_coarse = -(-n_steps // m)
            coarse = coarse_rng.standard_normal((n_coarse, dim)) * np.sqrt(CANONICAL_DT)
            refine_rng = np.random.Generator(np.random.Philox(refine_ss))
            g = refine_rng.standard_normal((n_coarse, m, dim)) * np.sqrt(dt)
            sub = g - g.mean(axis=1, keepdims=True) + coarse[:, None, :] / m
            inc = sub.reshape(n_coarse * m, dim)[:n_steps]
        return cls(seed=seed, dt=dt, increments=np.ascontiguousarray(inc))
