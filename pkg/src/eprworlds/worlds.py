"""Branch ("world") decomposition and world-counting Born weights.

A completed measurement leaves one branch per distinct tuple of pointer
records.  When the branch weights are rational, ``p_k = a_k / N``, the same
state can be read as ``N`` equally weighted worlds with ``a_k`` of them in
branch ``k``; counting those equipossible worlds yields the weights back.
Irrational weights are first approximated with a common denominator no
larger than a user-chosen cap, and the approximation error is reported.

Only the counting consequence of the refinement is implemented, not an
explicit operational construction of the finer experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import IncompleteMeasurement, NoValidApproximation
from .spin import BasisLabel, Comparison, Record, StateVector

# weights above this must keep at least one world after rationalization
NEGLIGIBLE_WEIGHT = 1e-6
# denominators whose errors differ by less than this are considered tied
_TIE_SLACK = 2.0**-50
_CHUNK = 1 << 17


@dataclass(frozen=True)
class Branch:
    records: tuple[Record, Record, Comparison]
    amplitude: complex
    weight: float
    terms: tuple[tuple[BasisLabel, complex], ...] = ()

    @property
    def outcome_product(self) -> int:
        dev1, dev2, _ = self.records
        return dev1.eigenvalue * dev2.eigenvalue


@dataclass(frozen=True)
class WorldCensus:
    branches: tuple[tuple[Branch, int], ...]
    total_worlds: int
    approximation_error: float

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.branches)


def decompose_branches(state: StateVector) -> list[Branch]:
    """Group terms by (dev1, dev2, comp); one :class:`Branch` per group, sorted by records."""
    groups: dict[tuple, list[tuple[BasisLabel, complex]]] = {}
    for label, amp in state:
        if label.dev1 is Record.UNSET or label.dev2 is Record.UNSET:
            raise IncompleteMeasurement(f"term {label.describe()} has an unset device record")
        groups.setdefault(label.records, []).append((label, amp))
    branches = []
    for records in sorted(groups):
        terms = tuple(groups[records])
        weight = math.fsum(abs(a) ** 2 for _, a in terms)
        if len(terms) == 1:
            amplitude = terms[0][1]
        else:
            lead = max(terms, key=lambda t: abs(t[1]))[1]
            amplitude = math.sqrt(weight) * lead / abs(lead)
        branches.append(Branch(records, amplitude, weight, terms))
    return branches


def _apportion(w: np.ndarray, dens: np.ndarray, floor_one: np.ndarray) -> np.ndarray:
    """Min-max numerators for each denominator in ``dens`` (rows), one column per weight.

    Starts from ``floor(w N)`` (at least 1 where ``floor_one``), then moves one
    unit at a time to the most under-allocated entry, or away from the most
    over-allocated entry that is still above its lower bound, until the
    numerators sum to ``N``.  Rows that cannot be balanced come back with a
    negative entry.
    """
    scaled = w[None, :] * dens[:, None]
    lower = np.where(floor_one, 1, 0)[None, :]
    nums = np.maximum(np.floor(scaled), lower).astype(np.int64)
    rows = np.arange(dens.size)
    for _ in range(w.size + 1):
        short = dens - nums.sum(axis=1)
        if not short.any():
            break
        dev = scaled - nums
        grow = short > 0
        if grow.any():
            nums[rows[grow], dev[grow].argmax(axis=1)] += 1
        shrink = short < 0
        if shrink.any():
            cand = np.where(nums[shrink] > lower, dev[shrink], np.inf)
            pick = cand.argmin(axis=1)
            stuck = np.isinf(cand[np.arange(pick.size), pick])
            nums[rows[shrink], pick] -= 1
            # no entry can give up a unit: force a negative numerator so the row is rejected
            nums[rows[shrink][stuck], 0] = -1
    return nums


def rationalize_weights(weights: Sequence[float], max_denominator: int) -> tuple[list[Fraction], float]:
    """Best simultaneous rational approximation with a common denominator.

    Every denominator ``N <= max_denominator`` is tried; numerators are
    apportioned to minimise the max error while summing to ``N`` exactly and
    keeping at least one world for every non-negligible weight.  The ``N``
    with the smallest max error wins (ties go to the smaller ``N``).  Returns
    the reduced fractions and ``max |w_k - a_k/N|``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and non-negative")
    if abs(math.fsum(w) - 1.0) > 1e-9:
        raise ValueError(f"weights sum to {math.fsum(w)!r}, not 1")
    max_denominator = int(max_denominator)
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")

    must_keep = w > NEGLIGIBLE_WEIGHT
    errors = np.empty(max_denominator)
    for start in range(1, max_denominator + 1, _CHUNK):
        dens = np.arange(start, min(start + _CHUNK, max_denominator + 1), dtype=np.int64)
        nums = _apportion(w, dens, must_keep)
        err = np.abs(w[None, :] - nums / dens[:, None]).max(axis=1)
        bad = np.any(nums < 0, axis=1) | np.any((nums == 0) & must_keep[None, :], axis=1)
        bad |= nums.sum(axis=1) != dens
        err[bad] = np.inf
        errors[start - 1 : start - 1 + dens.size] = err

    best = errors.min()
    if not np.isfinite(best):
        raise NoValidApproximation(
            f"no denominator <= {max_denominator} gives every weight above "
            f"{NEGLIGIBLE_WEIGHT:g} at least one world"
        )
    n = int(np.flatnonzero(errors <= best + _TIE_SLACK)[0]) + 1
    nums = _apportion(w, np.array([n]), must_keep)[0]
    fractions = [Fraction(int(a), n) for a in nums]
    error = float(max(abs(wk - float(f)) for wk, f in zip(w, fractions)))
    return fractions, error


def deutsch_refine(rationals: Sequence[Fraction]) -> tuple[list[int], int]:
    """World counts per branch and the total number of equipossible worlds."""
    rationals = [Fraction(r) for r in rationals]
    if sum(rationals) != 1:
        raise ValueError(f"rationals sum to {sum(rationals)}, not exactly 1")
    total = math.lcm(*(r.denominator for r in rationals))
    counts = [r.numerator * (total // r.denominator) for r in rationals]
    return counts, total


def take_census(state: StateVector, max_denominator: int = 10**6) -> WorldCensus:
    """Decompose, rationalize and refine; zero-world branches are dropped."""
    branches = decompose_branches(state)
    rationals, error = rationalize_weights([b.weight for b in branches], max_denominator)
    counts, total = deutsch_refine(rationals)
    kept = tuple((b, n) for b, n in zip(branches, counts) if n > 0)
    return WorldCensus(kept, total, error)


def born_weights(census: WorldCensus) -> list[float]:
    return [n / census.total_worlds for _, n in census.branches]
