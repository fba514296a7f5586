"""Boundary planning and report transitions."""
import pytest

from showrunner import (
    CompletionRecord,
    EventSpec,
    Feedback,
    PipelineDef,
    ProgressReport,
    ScheduleDecision,
    advance,
    plan,
    validate_pipeline,
)
from showrunner.errors import InconsistentReport, UnknownCompletion
from showrunner.scheduler import DoneEntry, RevocationEntry, RunningEntry


def report_with(done=(), running=(), slice_index=0, history=()):
    return ProgressReport(
        slice_index=slice_index,
        running={e: RunningEntry(e, a, t) for e, a, t in running},
        done={e: DoneEntry(e, a, f"{e}-a{a}", t) for e, a, t in done},
        revoked_history=tuple(history),
    )


def reject(target, note="rework this"):
    return Feedback(id="fb-9", arrival_time=25.0, target=target, kind="Critical",
                    verdict="reject", note=note)


class TestPlan:
    def test_initial_slice_enqueues_dependency_free(self, film_graph):
        decision = plan(ProgressReport(), None, film_graph)
        assert decision.enqueue == {"script"}
        assert decision.revoke == frozenset()
        assert not decision.wait

    def test_reject_revokes_without_same_slice_reenqueue(self, film_graph):
        report = report_with(done=[("script", 1, 10.0), ("dialogue", 1, 25.0)],
                             running=[("art", 1, 10.0)])
        decision = plan(report, reject("dialogue"), film_graph)
        assert decision.revoke == {"dialogue"}
        assert decision.enqueue == frozenset()
        assert not decision.wait

    def test_nothing_ready_waits(self, film_graph):
        report = report_with(done=[("script", 1, 10.0)],
                             running=[("art", 1, 10.0), ("dialogue", 1, 10.0)])
        decision = plan(report, None, film_graph)
        assert decision.wait
        assert decision.enqueue == frozenset()
        assert decision.revoke == frozenset()

    def test_no_feedback_means_no_revocations(self, film_graph):
        report = report_with(done=[("script", 1, 10.0)],
                             running=[("art", 1, 10.0)])
        decision = plan(report, None, film_graph)
        assert decision.revoke == frozenset()
        assert decision.enqueue == {"dialogue"}

    def test_complete_run_neither_waits_nor_enqueues(self, film_graph):
        done = [(e, 1, 5.0) for e in film_graph.ids]
        decision = plan(report_with(done=done), None, film_graph)
        assert not decision.wait
        assert decision.enqueue == frozenset()

    def test_serial_mode_dispatches_topo_first_only(self, film_graph):
        report = report_with(done=[("script", 1, 10.0)])
        decision = plan(report, None, film_graph, mode="serial")
        assert decision.enqueue == {"art"}       # art before dialogue in topo order
        busy = report_with(done=[("script", 1, 10.0)], running=[("art", 1, 10.0)])
        assert plan(busy, None, film_graph, mode="serial").enqueue == frozenset()

    def test_unknown_event_in_report(self, film_graph):
        report = report_with(done=[("understudy", 1, 1.0)])
        with pytest.raises(InconsistentReport):
            plan(report, None, film_graph)

    def test_amendments_carried_on_decision(self, film_graph):
        report = report_with(done=[("script", 1, 10.0), ("dialogue", 1, 25.0)])
        feedback = Feedback(id="fb-2", arrival_time=25.0, target="dialogue",
                            kind="Detailed", verdict="reject",
                            note="improve the fifth act")
        decision = plan(report, feedback, film_graph)
        assert decision.amendments == {
            "dialogue": {"director_note": "improve the fifth act"}}
        assert decision.reason == "fb-2"


class TestDecisionInvariants:
    def test_wait_must_be_empty(self):
        with pytest.raises(InconsistentReport):
            ScheduleDecision(enqueue={"x"}, wait=True)

    def test_enqueue_revoke_disjoint(self):
        with pytest.raises(InconsistentReport):
            ScheduleDecision(enqueue={"x"}, revoke={"x"})


class TestAdvance:
    def test_initial_enqueue(self):
        p0 = ProgressReport()
        p1 = advance(p0, ScheduleDecision(enqueue={"script"}), [], at=0.0)
        assert p1.slice_index == 1
        assert p1.running["script"] == RunningEntry("script", 1, 0.0)
        assert p1.done == {}

    def test_completion_moves_to_done(self):
        p = report_with(running=[("script", 1, 0.0)], slice_index=1)
        completion = CompletionRecord("script", 1, "script-a1", 10.0)
        p2 = advance(p, ScheduleDecision(wait=True), [completion], at=10.0)
        assert p2.done["script"].artifact_id == "script-a1"
        assert "script" not in p2.running
        assert p2.slice_index == 2

    def test_revocation_removes_done_and_records_history(self):
        p = report_with(done=[("dialogue", 1, 25.0)], slice_index=3)
        p2 = advance(p, ScheduleDecision(revoke={"dialogue"}, reason="fb-0"), [],
                     at=25.0)
        assert "dialogue" not in p2.done
        assert p2.revoked_history == (RevocationEntry(3, "dialogue", 1, "fb-0"),)
        assert p2.next_attempt("dialogue") == 2

    def test_reenqueue_after_revocation_bumps_attempt(self):
        p = report_with(slice_index=4,
                        history=[RevocationEntry(3, "dialogue", 1, "fb-0")])
        p2 = advance(p, ScheduleDecision(enqueue={"dialogue"}), [], at=30.0)
        assert p2.running["dialogue"].attempt == 2

    def test_unknown_completion(self):
        p = report_with(running=[("script", 1, 0.0)])
        with pytest.raises(UnknownCompletion):
            advance(p, ScheduleDecision(wait=True),
                    [CompletionRecord("art", 1, "x", 5.0)], at=5.0)
        with pytest.raises(UnknownCompletion):
            advance(p, ScheduleDecision(wait=True),
                    [CompletionRecord("script", 2, "x", 5.0)], at=5.0)

    def test_revoking_never_started_event_rejected(self):
        with pytest.raises(InconsistentReport):
            advance(ProgressReport(), ScheduleDecision(revoke={"script"}), [], at=0.0)

    def test_slice_always_increments_by_one(self):
        p = ProgressReport()
        for i in range(5):
            p = advance(p, ScheduleDecision(wait=True) if i else
                        ScheduleDecision(enqueue={"script"}), [], at=float(i))
            assert p.slice_index == i + 1


class TestTransitionTable:
    """Exhaustive check of the per-event state machine behind advance.

    States: pending / running / done. Inputs: enqueue, complete, revoke.
    Anything the table marks illegal must raise; everything else must land on
    the state the table names.
    """

    TABLE = {
        ("pending", "enqueue"): "running",
        ("pending", "complete"): "error",
        ("pending", "revoke"): "error",
        ("running", "enqueue"): "error",
        ("running", "complete"): "done",
        ("running", "revoke"): "pending",
        ("done", "enqueue"): "error",
        ("done", "complete"): "error",
        ("done", "revoke"): "pending",
    }

    @staticmethod
    def make(state):
        if state == "pending":
            return ProgressReport()
        if state == "running":
            return report_with(running=[("e", 1, 0.0)])
        return report_with(done=[("e", 1, 1.0)])

    @staticmethod
    def apply(report, action):
        if action == "enqueue":
            return advance(report, ScheduleDecision(enqueue={"e"}), [], at=2.0)
        if action == "complete":
            return advance(report, ScheduleDecision(wait=True),
                           [CompletionRecord("e", 1, "e-a1", 2.0)], at=2.0)
        return advance(report, ScheduleDecision(revoke={"e"}, reason="r"), [], at=2.0)

    @pytest.mark.parametrize("state", ["pending", "running", "done"])
    @pytest.mark.parametrize("action", ["enqueue", "complete", "revoke"])
    def test_every_transition(self, state, action):
        expected = self.TABLE[(state, action)]
        report = self.make(state)
        if expected == "error":
            with pytest.raises((InconsistentReport, UnknownCompletion)):
                self.apply(report, action)
            return
        after = self.apply(report, action)
        assert after.state_of("e") == expected
        if action == "revoke":
            assert after.next_attempt("e") == 2


class TestReportInvariants:
    def test_running_done_disjoint(self):
        with pytest.raises(InconsistentReport):
            ProgressReport(running={"e": RunningEntry("e", 1, 0.0)},
                           done={"e": DoneEntry("e", 1, "x", 1.0)})

    def test_payload_round_trip(self):
        report = report_with(done=[("script", 1, 10.0)],
                             running=[("art", 2, 12.0)], slice_index=4,
                             history=[RevocationEntry(2, "art", 1, "fb-0")])
        assert ProgressReport.from_payload(report.to_payload()) == report
