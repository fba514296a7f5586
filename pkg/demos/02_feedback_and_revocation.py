"""Feedback-driven revocation: reject the dialogue, watch it re-run.

A scripted reviewer waits for the dialogue to complete, then files a
detailed rejection. The engine revokes the dialogue, leaves untouched work
alone, re-executes with the reviewer's note folded into the parameters, and
still finishes on time because the re-run hides inside the action shoot's
slack.
"""
import json
from pathlib import Path

from showrunner import (
    ScriptedFeedbackSource,
    TraceItem,
    film_pipeline_preset,
    mock_registry_for,
    run,
    validate_pipeline,
)

graph = validate_pipeline(film_pipeline_preset())

trace = [TraceItem(trigger="dialogue", feedback_fields={
    "target": "dialogue",
    "kind": "Detailed",
    "verdict": "reject",
    "note": "tighten the fifth act",
})]

result = run(graph, mock_registry_for(graph),
             feedback_source=ScriptedFeedbackSource(trace), seed=42)

print(f"status: {result.status}, makespan: {result.makespan}, "
      f"revocations: {result.revocation_count}")
for event_id, entry in sorted(result.final_report.done.items()):
    print(f"  {event_id:<10} attempt {entry.attempt}")

# The re-executed dialogue carries the director's note.
print("\nrevision note on final dialogue:",
      result.final_artifacts["dialogue"].payload["revision_note"])

# The log shows the whole story: the completion, the verdict one boundary
# later, the revocation, and the re-dispatch at the next boundary.
print("\nlog excerpt around the rejection:")
for line in Path(result.event_log_ref).read_text().splitlines():
    record = json.loads(line)
    if record["kind"] in ("feedback", "revoke") or (
            record["kind"] == "enqueue" and record["attempt"] == 2):
        print(f"  slice {record['slice']} t={record['time']:<6} "
              f"{record['kind']:<9} {record.get('event_id') or ''}")

# Re-running with identical inputs reproduces the log byte for byte; and a
# clean run whose dialogue carried the note from the start produces the
# same artifact hashes. Revocation converges to the amended pipeline.
again = run(graph, mock_registry_for(graph),
            feedback_source=ScriptedFeedbackSource(trace), seed=42)
same = Path(result.event_log_ref).read_bytes() == \
    Path(again.event_log_ref).read_bytes()
print(f"\nreplay determinism: logs byte-identical = {same}")
