"""Serial-versus-parallel comparison runs on the virtual clock."""
from __future__ import annotations

import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from ._canon import canonical_json
from .crew import mock_registry_for
from .feedback import POLICIES, FrequencyPolicy, ScriptedFeedbackSource, TraceItem
from .graph import PipelineDef, ValidatedGraph, validate_pipeline
from .runner import RunResult, run
from .store import RunStore

__all__ = ["SimReport", "simulate"]


@dataclass
class SimReport:
    """Both makespans plus the ratio the efficiency comparison reports."""

    pipeline: str
    seed: int
    serial_makespan: float
    parallel_makespan: float
    multiple: float                     # parallel / serial, float division
    multiple_exact: Fraction            # same ratio in exact rational form
    slice_count: int                    # boundaries in the parallel run
    revocations: int
    attempts: dict[str, int] = field(default_factory=dict)
    parallel_log: str = ""
    serial_log: str = ""

    def to_payload(self) -> dict[str, Any]:
        # log paths are deliberately excluded: the payload is byte-stable
        # across invocations with identical inputs
        return {
            "pipeline": self.pipeline,
            "seed": self.seed,
            "serial_makespan": self.serial_makespan,
            "parallel_makespan": self.parallel_makespan,
            "multiple": self.multiple,
            "multiple_exact": f"{self.multiple_exact.numerator}"
                              f"/{self.multiple_exact.denominator}",
            "slice_count": self.slice_count,
            "revocations": self.revocations,
            "attempts": dict(sorted(self.attempts.items())),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_payload())


def _attempts(result: RunResult) -> dict[str, int]:
    return {event_id: entry.attempt
            for event_id, entry in sorted(result.final_report.done.items())}


def _with_durations(graph: ValidatedGraph, durations: Mapping[str, float]) -> ValidatedGraph:
    from dataclasses import replace

    events = tuple(
        replace(spec, duration=float(durations.get(spec.id, spec.duration)))
        if durations.get(spec.id, spec.duration) is not None else spec
        for spec in graph.events.values()
    )
    return validate_pipeline(PipelineDef(name=graph.name, events=events))


def simulate(pipeline: PipelineDef | ValidatedGraph,
             trace: Sequence[TraceItem] = (),
             policy: FrequencyPolicy = POLICIES["NoLimits"],
             seed: int = 42,
             store: RunStore | None = None,
             durations: Mapping[str, float] | None = None) -> SimReport:
    """Run the pipeline in both modes on the virtual clock and compare.

    Identical seed and feedback trace feed both runs; the ``multiple`` ratio is
    exact rational arithmetic over the two makespans (1/1 when both are zero).
    """
    graph = pipeline if isinstance(pipeline, ValidatedGraph) else validate_pipeline(pipeline)
    if durations:
        graph = _with_durations(graph, durations)
    graph.duration_map()        # fail fast on missing durations
    store = store or RunStore(tempfile.mkdtemp(prefix="showrunner-sim-"))

    results: dict[str, RunResult] = {}
    for mode in ("parallel", "serial"):
        results[mode] = run(
            graph, mock_registry_for(graph),
            feedback_source=ScriptedFeedbackSource(list(trace), policy),
            store=store, run_id=f"sim-{mode}", mode=mode, seed=seed,
        )

    serial = results["serial"].makespan
    parallel = results["parallel"].makespan
    if serial == 0:
        exact = Fraction(1, 1)
    else:
        exact = Fraction(parallel) / Fraction(serial)
    return SimReport(
        pipeline=graph.name,
        seed=seed,
        serial_makespan=serial,
        parallel_makespan=parallel,
        multiple=(parallel / serial) if serial else 1.0,
        multiple_exact=exact,
        slice_count=results["parallel"].slice_count,
        revocations=results["parallel"].revocation_count,
        attempts=_attempts(results["parallel"]),
        parallel_log=results["parallel"].event_log_ref,
        serial_log=results["serial"].event_log_ref,
    )
