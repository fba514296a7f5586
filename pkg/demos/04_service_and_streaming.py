"""The HTTP service end to end: create a live run, stream it, reject a task.

Uses an in-process test client so the demo needs no open port; `showrunner
serve` exposes exactly the same endpoints over the network for the director
console.
"""
import json
import tempfile
import time

from fastapi.testclient import TestClient

from showrunner.service import RunManager, create_app

manager = RunManager(tempfile.mkdtemp(prefix="showrunner-demo-"))
client = TestClient(create_app(manager))

# A wall-clock run, heavily time-scaled so the demo takes about a second.
response = client.post("/runs", json={
    "preset": "film", "clock": "wall", "time_scale": 0.005,
    "review_window": 0.2, "seed": 42,
})
run_id = response.json()["run_id"]
print(f"created {run_id}: {response.json()['status']}")

# Wait for the dialogue to complete, then reject it over the API.
def log():
    return client.get(f"/runs/{run_id}/log").json()["records"]

while not any(r["kind"] == "complete" and r["event_id"] == "dialogue"
              for r in log()):
    time.sleep(0.01)

verdict = client.post(f"/runs/{run_id}/feedback", json={
    "target": "dialogue", "kind": "Critical", "verdict": "reject",
    "note": "give the bride the last word",
})
print(f"feedback acknowledged: {verdict.json()['feedback_id']}")

# Tail the stream until the finish record; each message is one log record.
events = []
with client.stream("GET", f"/runs/{run_id}/stream", params={"from_seq": 0}) as s:
    for line in s.iter_lines():
        if line.startswith("data: "):
            events.append(json.loads(line[len("data: "):]))

print(f"\nstreamed {len(events)} records; transitions observed:")
for record in events:
    if record["kind"] in ("feedback", "revoke", "finish"):
        print(f"  seq {record['seq']:>3} slice {record['slice']:>2} "
              f"{record['kind']:<9} {record.get('event_id') or ''}")

state = client.get(f"/runs/{run_id}").json()
print(f"\nfinal status: {state['status']}")
attempts = {d["event_id"]: d["attempt"] for d in state["latest_report"]["done"]}
print(f"dialogue attempts: {attempts.get('dialogue')}")

rows = client.get(f"/runs/{run_id}/gantt").json()["rows"]
print("\ngantt rows (event, attempt, revoked):")
for row in rows:
    print(f"  {row['event']:<10} a{row['attempt']} revoked={row['revoked']}")
