"""Acceptance suite: one test (and one printed verdict line) per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
verdict lines when a criterion passes).
"""
import json
import math
import random
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from showrunner import (
    EventSpec,
    PipelineDef,
    RunStore,
    ScriptedFeedbackSource,
    TraceItem,
    build_edit_timeline,
    critical_path,
    film_pipeline_preset,
    interpret,
    mock_registry_for,
    plan_long_shot,
    replay_records,
    run,
    serial_makespan,
    shot_length_from_voiceover,
    simulate,
    transitive_dependents,
    validate_pipeline,
)
from showrunner.store import EventLogRecord, LogFold

from conftest import rejected_dialogue_trace
from oracles import (
    bf_critical_path,
    bf_extension_lengths,
    bf_shot_frames,
    deps_of,
    random_dag,
)


def verdict(name, passed=True):
    print(f"[ACCEPTANCE] {name}: {'PASS' if passed else 'FAIL'}")


def run_graph(graph, trace=None, mode="parallel", seed=42, store=None, run_id=None):
    return run(graph, mock_registry_for(graph),
               feedback_source=ScriptedFeedbackSource(trace or []),
               store=store, run_id=run_id, mode=mode, seed=seed)


def log_records(result):
    return [json.loads(line)
            for line in Path(result.event_log_ref).read_text().splitlines()]


def check_dependency_safety(records, graph):
    """Every enqueue must follow un-revoked completions of all dependencies."""
    done_seq = {}
    for record in records:
        kind = record["kind"]
        if kind == "complete":
            done_seq[record["event_id"]] = record["seq"]
        elif kind == "revoke":
            done_seq.pop(record["event_id"], None)
        elif kind == "enqueue":
            for dep in graph.dependencies(record["event_id"]):
                assert dep in done_seq and done_seq[dep] < record["seq"], (
                    f"{record['event_id']}@{record['attempt']} started before "
                    f"{dep} was done")


def test_dependency_safety_200_random_dags():
    """No start ever precedes its dependencies' completions; < 10 s total."""
    rng = random.Random(2024)
    started = time.monotonic()
    for index in range(200):
        graph = validate_pipeline(random_dag(rng, max_nodes=50, max_duration=30))
        trace = []
        if index % 3 == 0 and len(graph) > 1:
            target = rng.choice(sorted(graph.ids))
            trace = [TraceItem(trigger=target, feedback_fields={
                "target": target, "kind": "Critical", "verdict": "reject",
                "note": "redo"})]
        result = run_graph(graph, trace=trace, seed=42)
        assert result.status == "completed"
        check_dependency_safety(log_records(result), graph)
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    verdict(f"dependency-safety (200 random DAGs in {elapsed:.1f}s)")


def test_makespan_exactness_preset_and_random():
    """Preset: parallel 68, serial 95, multiple 68/95 exact; random DAGs match
    the brute-force critical-path oracle exactly."""
    report = simulate(film_pipeline_preset(), seed=42)
    assert report.parallel_makespan == 68.0
    assert report.serial_makespan == 95.0
    assert report.multiple_exact == Fraction(68, 95)

    rng = random.Random(99)
    for _ in range(100):
        pipeline = random_dag(rng, max_nodes=12)
        graph = validate_pipeline(pipeline)
        result = run_graph(graph, seed=42)
        oracle_len, _ = bf_critical_path(deps_of(pipeline), graph.duration_map())
        assert result.makespan == oracle_len
    verdict("makespan-exactness (preset 68/95 + 100 random DAGs vs brute force)")


def test_speedup_direction_for_concurrent_work():
    """With strictly positive durations and incomparable events, parallel
    always beats serial. The production-scale 0.61x figure depended on live
    generative backends and is not reproducible here; only the direction is."""
    rng = random.Random(5)
    graph = validate_pipeline(film_pipeline_preset())
    for _ in range(50):
        durations = {e: round(rng.uniform(0.5, 30.0), 2) for e in graph.ids}
        parallel = critical_path(graph, durations)[0]
        serial = serial_makespan(graph, durations)
        assert parallel < serial
        # and the engine agrees with the analysis end to end
    events = tuple(replace(spec, duration=float(1 + (i % 4)))
                   for i, spec in enumerate(film_pipeline_preset().events))
    graph2 = validate_pipeline(PipelineDef("film-positive", events))
    report = simulate(graph2, seed=42)
    assert report.multiple < 1.0
    verdict("speedup-direction (multiple < 1.0; production 0.61x recorded non-reproducible)")


def test_wait_emission_while_both_branches_run():
    """A boundary while art and dialogue both run and nothing is ready yields
    wait records and no enqueues."""
    trace = [TraceItem(trigger=12.0, feedback_fields={
        "target": "script", "kind": "YesNo", "verdict": "approve"})]
    graph = validate_pipeline(film_pipeline_preset())
    records = log_records(run_graph(graph, trace=trace))
    fb_slice = next(r["slice"] for r in records if r["kind"] == "feedback")
    same_slice = [r for r in records if r["slice"] == fb_slice]
    kinds = [r["kind"] for r in same_slice]
    assert "wait" in kinds and "enqueue" not in kinds
    wait = next(r for r in same_slice if r["kind"] == "wait")
    assert wait["payload"]["running"] == ["art", "dialogue"]
    verdict("wait-emission (both branches running, wait logged, nothing enqueued)")


def amended_pipeline(pipeline, target, amendments):
    events = []
    for spec in pipeline.events:
        if spec.id == target:
            params = dict(spec.params)
            params.update(amendments)
            spec = replace(spec, params=params)
        events.append(spec)
    return PipelineDef(pipeline.name, tuple(events))


def final_hashes(result):
    return {event: artifact.content_hash
            for event, artifact in result.final_artifacts.items()}


def test_revocation_equivalence_rejected_dialogue_and_random_pairs():
    """Rejecting and re-running with an amendment reproduces, hash for hash,
    a clean run whose target carried the amendment from the start."""
    note = "tighten the fifth act"
    graph = validate_pipeline(film_pipeline_preset())
    with_trace = run_graph(graph, trace=rejected_dialogue_trace(), seed=42)
    clean = run_graph(validate_pipeline(amended_pipeline(
        film_pipeline_preset(), "dialogue", {"director_note": note})), seed=42)
    assert final_hashes(with_trace) == final_hashes(clean)

    rng = random.Random(314)
    for index in range(20):
        pipeline = random_dag(rng, max_nodes=10, zero_ok=False)
        graph = validate_pipeline(pipeline)
        target = rng.choice(sorted(graph.ids))
        amendments = {"director_note": f"revision-{index}"}
        trace = [TraceItem(trigger=target, feedback_fields={
            "target": target, "kind": "Detailed", "verdict": "reject",
            "note": "see amendments", "amendments": amendments})]
        with_trace = run_graph(graph, trace=trace, seed=42)
        clean = run_graph(validate_pipeline(
            amended_pipeline(pipeline, target, amendments)), seed=42)
        assert final_hashes(with_trace) == final_hashes(clean), \
            f"pair {index}: artifact sets diverged"
    verdict("revocation-equivalence (rejected-dialogue trace + 20 random DAG/trace pairs)")


def test_replay_determinism_byte_identical_and_fold_exact(tmp_path):
    """Identical inputs give byte-identical logs; folding any log reproduces
    the stored final report field for field."""
    a = run_graph(validate_pipeline(film_pipeline_preset()), trace=rejected_dialogue_trace(),
                  store=RunStore(tmp_path / "a"), run_id="r", seed=42)
    b = run_graph(validate_pipeline(film_pipeline_preset()), trace=rejected_dialogue_trace(),
                  store=RunStore(tmp_path / "b"), run_id="r", seed=42)
    bytes_a = Path(a.event_log_ref).read_bytes()
    assert bytes_a == Path(b.event_log_ref).read_bytes()

    rng = random.Random(1)
    stores = [RunStore(tmp_path / f"s{i}") for i in range(12)]
    for index, store in enumerate(stores):
        graph = validate_pipeline(random_dag(rng, max_nodes=10))
        trace = []
        if index % 2 and len(graph) > 1:
            target = rng.choice(sorted(graph.ids))
            trace = [TraceItem(trigger=target, feedback_fields={
                "target": target, "kind": "Critical", "verdict": "reject",
                "note": "redo"})]
        result = run_graph(graph, trace=trace, store=store, run_id="r", seed=42)
        replayed = store.replay("r")
        stored = store.read_state("r")
        assert replayed.latest_report == stored.latest_report
        assert replayed.status == stored.status
        assert replayed.slice_count == stored.slice_count
        assert replayed.makespan == result.makespan
    verdict("replay-determinism (byte-identical logs; fold == stored report)")


def test_shot_and_timeline_formulas():
    """Extension plans cover minimally for every (T <= 200, L <= 32); frame
    counts and timeline totals match closed-form arithmetic on 1000 inputs."""
    for segment in range(2, 33):
        for target in range(1, 201):
            plan = plan_long_shot(target, segment)
            lengths = [s.length for s in plan.segments]
            assert lengths == bf_extension_lengths(target, segment)
            assert sum(lengths) >= target
            assert sum(lengths) - lengths[-1] < target

    rng = random.Random(7)
    for _ in range(1000):
        duration = rng.uniform(0.01, 60.0)
        fps = rng.choice([1, 8, 12, 24, 25, 30, 48, 60])
        assert shot_length_from_voiceover(duration, fps) == \
            bf_shot_frames(duration, fps)

        n = rng.randint(1, 6)
        overlap = rng.choice([0.0, 0.5, 1.0])
        scenes = [(f"s{i}", overlap + rng.uniform(0.5, 20.0)) for i in range(n)]
        timeline = build_edit_timeline(scenes, overlap, ["v"], "m")
        expected = math.fsum(d for _, d in scenes) - overlap * (n - 1)
        assert abs(timeline.total_duration - expected) < 1e-9
    verdict("shot-and-timeline-formulas (sweep + 1000 random inputs)")


def test_cascade_closure_on_random_dags():
    """After any interpreted reject, no running/done transitive dependent of
    the target survives the revocation."""
    rng = random.Random(271)
    for index in range(40):
        pipeline = random_dag(rng, max_nodes=12, zero_ok=False)
        graph = validate_pipeline(pipeline)
        target = rng.choice(sorted(graph.ids))
        trace = [TraceItem(trigger=target, feedback_fields={
            "target": target, "kind": "Critical", "verdict": "reject",
            "note": "redo"})]
        result = run_graph(graph, trace=trace, seed=42)
        records = [EventLogRecord.from_line(line) for line in
                   Path(result.event_log_ref).read_text().splitlines()]

        fold = LogFold("check")
        revoked_group = set()
        pre_feedback_report = None
        for record in records:
            if record.kind == "feedback":
                pre_feedback_report = fold.state().latest_report
            if record.kind == "revoke" and pre_feedback_report is not None:
                revoked_group.add(record.event_id)
            fold.feed(record)
        assert pre_feedback_report is not None
        started = {e for e in transitive_dependents(graph, target)
                   if pre_feedback_report.state_of(e) in ("running", "done")}
        assert started <= revoked_group
        assert target in revoked_group

        # and independently at the interpreter level
        feedback = ScriptedFeedbackSource(trace).bind(graph)._make_feedback(0, 1.0)
        plan = interpret(feedback, pre_feedback_report, graph)
        survivors = {e for e in transitive_dependents(graph, target)
                     if pre_feedback_report.state_of(e) in ("running", "done")}
        assert survivors <= plan.revocations
    verdict("cascade-closure (40 random DAG rejections, no started survivor)")
