"""Per-run simulation with a random relative angle, binned by that angle.

Each run draws theta uniformly from a fine grid on [0, 180] degrees, then
picks one world uniformly among the equipossible worlds of the census at
that theta and records the product of the two device outcomes.  Outcome
frequencies are therefore produced by world counting, not put in by hand.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementSetup, run_three_measurements
from .rng import map_chunks
from .spin import Direction, Z, make_singlet
from .errors import NoValidApproximation
from .worlds import take_census

ESCALATION_LIMIT = 10**7


@dataclass(frozen=True)
class ThetaBin:
    theta_center: float
    tolerance: float
    runs: int
    mean_product: float
    stderr: float
    expected: float
    discretization_bound: float


@dataclass(frozen=True)
class BinReport:
    total_runs: int
    seed: int
    resolution_deg: float
    max_denominator: int
    bins: tuple[ThetaBin, ...]
    discarded_runs: int
    pooled_mean: float
    pooled_stderr: float
    max_census_error: float


def _mean_stderr(total: int, n: int) -> tuple[float, float]:
    # products are +-1
    if n == 0:
        return 0.0, 0.0
    mean = total / n
    if n == 1:
        return mean, 0.0
    var = max(0.0, (n - n * mean * mean) / (n - 1))
    return mean, math.sqrt(var / n)


@functools.lru_cache(maxsize=None)
def _census_row(theta_deg: float, max_denominator: int):
    """World counts and outcome products at one angle, device 1 on z."""
    state = run_three_measurements(make_singlet(Z), MeasurementSetup(Z, Direction.from_degrees(theta_deg, 0.0)))
    # near 0 and 180 degrees a tiny branch may need more worlds than the cap allows
    cap = max_denominator
    while True:
        try:
            census = take_census(state, cap)
            break
        except NoValidApproximation:
            if cap >= ESCALATION_LIMIT:
                raise
            cap = min(cap * 10, ESCALATION_LIMIT)
    counts = tuple(n for _, n in census.branches)
    prods = tuple(b.outcome_product for b, _ in census.branches)
    return counts, prods, census.total_worlds, census.approximation_error


class _CensusTable:
    """Cumulative world counts and outcome products per grid angle, built on first use."""

    def __init__(self, grid_deg: np.ndarray, max_denominator: int):
        self.grid = grid_deg
        self.max_denominator = max_denominator
        self.cum = np.zeros((grid_deg.size, 4), dtype=np.int64)
        self.products = np.zeros((grid_deg.size, 4), dtype=np.int64)
        self.totals = np.zeros(grid_deg.size, dtype=np.int64)
        self.max_error = 0.0

    def fill(self, indices: np.ndarray) -> None:
        for i in np.unique(indices)[self.totals[np.unique(indices)] == 0]:
            counts, prods, total, error = _census_row(float(self.grid[i]), self.max_denominator)
            k = len(counts)
            self.cum[i, :k] = np.cumsum(counts)
            self.cum[i, k:] = total
            self.products[i, :k] = prods
            self.totals[i] = total
            self.max_error = max(self.max_error, error)


def run_bins(
    total_runs: int,
    centers_deg,
    tolerance_deg: float,
    seed: int,
    resolution_deg: float = 0.1,
    max_denominator: int = 10**4,
    workers: int = 1,
) -> BinReport:
    """Simulate ``total_runs`` singlet pairs; each run goes to the nearest bin within tolerance."""
    if total_runs < 1:
        raise ValueError("total_runs must be >= 1")
    centers = np.asarray(list(centers_deg), dtype=float)
    if centers.size < 1:
        raise ValueError("need at least one bin")
    if tolerance_deg < 0:
        raise ValueError("tolerance must be non-negative")
    steps = round(180.0 / resolution_deg)
    if steps < 1 or not math.isclose(steps * resolution_deg, 180.0, rel_tol=1e-9):
        raise ValueError("resolution must divide 180 degrees")
    grid = np.linspace(0.0, 180.0, steps + 1)
    table = _CensusTable(grid, max_denominator)

    def draw(gen, size):
        idx = gen.integers(0, grid.size, size)
        return idx, gen.random(size)

    draws = map_chunks(draw, seed, total_runs, workers)
    for idx, _ in draws:
        table.fill(idx)

    sums = np.zeros(centers.size, dtype=np.int64)
    counts = np.zeros(centers.size, dtype=np.int64)
    pooled = 0
    discarded = 0
    for idx, u in draws:
        world = np.floor(u * table.totals[idx]).astype(np.int64)
        branch = (table.cum[idx] <= world[:, None]).sum(axis=1)
        prod = table.products[idx, branch]
        pooled += int(prod.sum())
        dist = np.abs(grid[idx][:, None] - centers[None, :])
        nearest = dist.argmin(axis=1)
        inside = dist[np.arange(idx.size), nearest] <= tolerance_deg + 1e-9
        discarded += int((~inside).sum())
        np.add.at(sums, nearest[inside], prod[inside])
        np.add.at(counts, nearest[inside], 1)

    bins = []
    for c, s, n in zip(centers, sums, counts):
        mean, err = _mean_stderr(int(s), int(n))
        lo, hi = math.radians(max(0.0, c - tolerance_deg)), math.radians(min(180.0, c + tolerance_deg))
        spread = max(abs(math.cos(lo) - math.cos(math.radians(c))), abs(math.cos(hi) - math.cos(math.radians(c))))
        bins.append(
            ThetaBin(float(c), float(tolerance_deg), int(n), mean, err, -math.cos(math.radians(c)), spread + 2 * table.max_error)
        )
    pooled_mean, pooled_err = _mean_stderr(pooled, total_runs)
    return BinReport(
        total_runs, int(seed), float(resolution_deg), int(max_denominator), tuple(bins),
        discarded, pooled_mean, pooled_err, table.max_error,
    )
