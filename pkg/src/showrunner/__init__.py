"""Dependency-aware production pipeline engine with feedback-driven revocation.

The engine runs a pipeline of role-typed events whose dependencies form a DAG.
A single director loop dispatches every ready event at each slice boundary,
waits when nothing can move, and — when a reviewer rejects an intermediate
result — revokes the target plus its started dependents and re-executes them
with the reviewer's amendments. Runs log every transition to an append-only
event log that replays bit-exactly.
"""

from .clock import Occurrence, VirtualClock
from .crew import (
    Artifact,
    AdapterWorker,
    ExecutionContext,
    FILM_PRESET_DURATIONS,
    MockWorker,
    WorkerRegistry,
    WorkerSpec,
    film_pipeline_preset,
    mock_registry_for,
)
from .feedback import (
    Feedback,
    FeedbackKind,
    FrequencyPolicy,
    POLICIES,
    RevocationPlan,
    ScriptedFeedbackSource,
    TraceItem,
    interpret,
)
from .fileformats import (
    load_pipeline,
    load_preset,
    load_trace,
    parse_pipeline_doc,
    parse_trace_doc,
    pipeline_to_doc,
)
from .graph import (
    EventSpec,
    PipelineDef,
    ValidatedGraph,
    critical_path,
    ready_set,
    serial_makespan,
    transitive_dependents,
    validate_pipeline,
)
from .production import (
    EditTimeline,
    EmotionTag,
    ExtensionPlan,
    Segment,
    assign_emotions,
    build_edit_timeline,
    plan_long_shot,
    shot_length_from_voiceover,
)
from .runner import RunHandle, RunResult, run, start_run
from .scheduler import (
    CompletionRecord,
    ProgressReport,
    ScheduleDecision,
    advance,
    plan,
)
from .simreport import SimReport, simulate
from .store import EventLogRecord, RunState, RunStore, replay_records

__version__ = "0.1.0"
