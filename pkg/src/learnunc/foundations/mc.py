"""Monte-Carlo estimation with per-replication standard errors.

The engine fills complete per-replication arrays in index order and reduces
them once at the end, so results are bitwise independent of the chunking and
of the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ..errors import NumericalError, UsageError
from .rng import RandomStream, Replications

CHUNK = 8192


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    reps: int
    degenerate: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise UsageError("reps must be positive")
        if self.std_error < 0:
            raise UsageError("std_error must be nonnegative")

    def zscore(self, target: float) -> float:
        diff = self.value - target
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.std_error

    def within(self, target: float, level: float = 3.5) -> bool:
        return abs(self.value - target) <= level * self.std_error

    def to_dict(self):
        return {"value": self.value, "std_error": self.std_error, "reps": self.reps,
                "degenerate": self.degenerate}


def _from_contributions(value: float, contrib: np.ndarray, degenerate=False) -> McEstimate:
    n = contrib.shape[0]
    se = float(np.std(contrib, ddof=1) / math.sqrt(n)) if n >= 2 else 0.0
    return McEstimate(float(value), se, n, degenerate)


def mean_estimate(x) -> McEstimate:
    x = np.asarray(x, dtype=float)
    return _from_contributions(x.mean(), x)


def var_estimate(x) -> McEstimate:
    x = np.asarray(x, dtype=float)
    d2 = (x - x.mean()) ** 2
    return _from_contributions(d2.sum() / (x.size - 1), d2)


def cov_estimate(x, y) -> McEstimate:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = (x - x.mean()) * (y - y.mean())
    return _from_contributions(c.sum() / (x.size - 1), c)


def second_moment_estimate(x) -> McEstimate:
    """E[x^2], e.g. the squared-loss risk of an error sample."""
    x = np.asarray(x, dtype=float)
    return _from_contributions(np.mean(x * x), x * x)


def corr_estimate(x, y) -> McEstimate:
    """Sample correlation; SE from the influence-function contributions.

    A zero-variance margin yields correlation 0 with ``degenerate=True``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    dx, dy = x - x.mean(), y - y.mean()
    vx, vy = (dx @ dx) / (n - 1), (dy @ dy) / (n - 1)
    if vx <= 0 or vy <= 0:
        return McEstimate(0.0, 0.0, n, degenerate=True)
    rho = float(((dx @ dy) / (n - 1)) / math.sqrt(vx * vy))
    u, v = dx / math.sqrt(vx), dy / math.sqrt(vy)
    psi = u * v - 0.5 * rho * (u * u + v * v)
    return _from_contributions(rho, psi)


def corr2_estimate(x, y, level: float = 3.5) -> McEstimate:
    """Squared correlation.

    The reported SE is ``2|r| se + level * se**2``: whenever ``r`` is within
    ``level`` SE of the true correlation, ``r**2`` is within ``level`` times
    this SE of its square.  Near zero it stays positive, where the plain
    delta method would collapse.
    """
    r = corr_estimate(x, y)
    se = 2 * abs(r.value) * r.std_error + level * r.std_error**2
    return McEstimate(r.value**2, se, r.reps, r.degenerate)


Sampler = Callable[[Replications], "dict[str, np.ndarray] | tuple"]


def simulate(sampler: Sampler, reps: int, stream: RandomStream, workers: int = 1,
             chunk: int = CHUNK) -> dict[str, np.ndarray]:
    """Run ``sampler`` over replications ``0 .. reps-1`` and collect its columns.

    ``sampler`` receives a :class:`Replications` block and returns either a
    dict of equal-length arrays or a tuple of arrays (keyed ``"0"``, ``"1"``...).
    """
    reps = int(reps)
    if reps < 2:
        raise UsageError(f"reps must be >= 2, got {reps}")
    bounds = [(s, min(s + chunk, reps)) for s in range(0, reps, chunk)]

    def one(b):
        out = sampler(stream.replications(*b))
        if not isinstance(out, dict):
            out = {str(i): col for i, col in enumerate(out)}
        return {k: np.broadcast_to(np.asarray(v, dtype=float), (b[1] - b[0],)) for k, v in out.items()}

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one, bounds))
    else:
        parts = [one(b) for b in bounds]

    cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    for k, v in cols.items():
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise NumericalError(f"non-finite sample in column {k!r} at replication {int(bad[0])}")
    return cols


def per_replication(fn: Callable[[RandomStream], tuple]) -> Sampler:
    """Adapt a scalar sampler ``fn(substream) -> tuple of floats`` to a block sampler."""

    def sampler(block: Replications):
        rows = [fn(RandomStream(block.seed, i)) for i in range(block.start, block.stop)]
        return tuple(np.array(col, dtype=float) for col in zip(*rows))

    return sampler


class Moments(NamedTuple):
    mean_g: McEstimate
    mean_h: McEstimate
    var_g: McEstimate
    var_h: McEstimate
    cov_gh: McEstimate
    corr_gh: McEstimate


def moments_of(g, h) -> Moments:
    return Moments(mean_estimate(g), mean_estimate(h), var_estimate(g), var_estimate(h),
                   cov_estimate(g, h), corr_estimate(g, h))


def mc_moments(sampler: Sampler, reps: int, stream: RandomStream, workers: int = 1) -> Moments:
    """First and second moments of a pair ``(G, H)`` emitted by ``sampler``."""
    cols = simulate(sampler, reps, stream, workers)
    if len(cols) != 2:
        raise UsageError("mc_moments needs a sampler emitting exactly two columns")
    g, h = cols.values()
    return moments_of(g, h)
