"""Run a parsed :class:`~eprworlds.protocol.ExperimentPlan` end to end."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .correlation import (
    BellVerdict,
    CorrelationResult,
    Method,
    ScanTable,
    bell_test,
    correlation_lhv,
    correlation_operator,
    quantum_source,
    theta_scan,
    worlds_product_sum,
)
from .errors import EprError, ExecutionError
from .lhv import get_strategy
from .measurement import apply_comparison, apply_measurement
from .protocol import (
    Bell,
    Correlation,
    ExperimentPlan,
    Fixed,
    LhvBaseline,
    Measure,
    RandomPerRun,
    ThetaScan,
    Worlds,
    format_plan,
)
from .rng import chunk_generator, uniform_sphere
from .spin import Comparison, Direction, StateVector, make_singlet
from .worlds import WorldCensus, take_census


@dataclass(frozen=True)
class StepLog:
    index: int
    action: str
    device: int | None
    axis: Direction | None
    terms: int


@dataclass(frozen=True)
class AnalysisResult:
    kind: str
    line: int
    payload: Any


@dataclass
class ExperimentReport:
    plan_echo: str
    steps: list[StepLog]
    results: list[AnalysisResult]
    provenance: dict
    notes: list[str] = field(default_factory=list)
    final_state: StateVector | None = None


def resolve_axis(spec) -> Direction:
    if isinstance(spec, Fixed):
        return spec.angles.direction
    return Direction.from_vector(uniform_sphere(chunk_generator(spec.seed, 0), 1)[0])


def override_seeds(plan: ExperimentPlan, seed: int) -> ExperimentPlan:
    """Replace every seed in the plan (CLI flag or environment beats file values)."""
    steps = tuple(
        dataclasses.replace(s, axis=RandomPerRun(seed)) if isinstance(s, Measure) and isinstance(s.axis, RandomPerRun) else s
        for s in plan.steps
    )
    analyses = tuple(dataclasses.replace(a, seed=seed) if isinstance(a, LhvBaseline) else a for a in plan.analyses)
    return ExperimentPlan(plan.prep, steps, analyses)


def plan_seeds(plan: ExperimentPlan) -> list[int]:
    seeds = [s.axis.seed for s in plan.measures if isinstance(s.axis, RandomPerRun)]
    seeds += [a.seed for a in plan.analyses if isinstance(a, LhvBaseline)]
    return seeds


def execute(plan: ExperimentPlan, timestamp: str | None = None) -> ExperimentReport:
    """Preparation, steps, then analyses, in file order.

    Module errors are re-raised as :class:`ExecutionError` carrying the
    1-based step index (preparation is step 0; analyses continue the count).
    """
    state = make_singlet(plan.prep.axis.direction)
    axes: dict[int, Direction] = {}
    logs: list[StepLog] = []
    notes: list[str] = []
    for index, step in enumerate(plan.steps, start=1):
        try:
            if isinstance(step, Measure):
                axis = resolve_axis(step.axis)
                state = apply_measurement(state, step.device, axis)
                axes[step.device] = axis
                logs.append(StepLog(index, "measure", step.device, axis, len(state)))
            else:
                state = apply_comparison(state)
                logs.append(StepLog(index, "compare", None, None, len(state)))
        except EprError as exc:
            raise ExecutionError(index, exc) from exc

    results = []
    for offset, analysis in enumerate(plan.analyses, start=len(plan.steps) + 1):
        try:
            if isinstance(analysis, (Correlation, Worlds)) and not _compared(state):
                state = apply_comparison(state)
                notes.append(f"comparison inserted automatically before the analysis on line {analysis.line}")
                logs.append(StepLog(offset, "compare (auto)", None, None, len(state)))
            results.append(AnalysisResult(_kind(analysis), analysis.line, _run_analysis(analysis, state, axes, plan)))
        except EprError as exc:
            raise ExecutionError(offset, exc) from exc

    provenance = {"tool": "eprworlds", "version": __version__, "seeds": plan_seeds(plan), "timestamp": timestamp}
    return ExperimentReport(format_plan(plan), logs, results, provenance, notes, state)


def _compared(state: StateVector) -> bool:
    return all(label.comp is not Comparison.UNSET for label, _ in state)


def _kind(analysis) -> str:
    return {
        Worlds: "worlds",
        Correlation: "correlation",
        Bell: "bell",
        LhvBaseline: "lhv",
        ThetaScan: "thetascan",
    }[type(analysis)]


def _run_analysis(analysis, state, axes, plan):
    if isinstance(analysis, Worlds):
        return take_census(state, analysis.max_denominator)
    if isinstance(analysis, Correlation):
        pair = (axes[1], axes[2])
        counted = CorrelationResult(pair, worlds_product_sum(state), Method.WORLD_COUNTING)
        return [counted, correlation_operator(pair)]
    if isinstance(analysis, Bell):
        triple = (analysis.n1.direction, analysis.n2.direction, analysis.n3.direction)
        return bell_test(quantum_source(Method.WORLD_COUNTING), triple)
    if isinstance(analysis, LhvBaseline):
        return correlation_lhv(get_strategy(analysis.strategy), (axes[1], axes[2]), analysis.samples, analysis.seed)
    return theta_scan(analysis.start, analysis.stop, analysis.points)


__all__ = [
    "AnalysisResult",
    "BellVerdict",
    "ExperimentReport",
    "ScanTable",
    "StepLog",
    "WorldCensus",
    "execute",
    "override_seeds",
]
