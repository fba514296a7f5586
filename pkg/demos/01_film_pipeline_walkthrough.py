"""A first tour: validate the film pipeline, analyze it, run it.

The bundled preset has six events. Art direction and dialogue both follow
the script and can overlap; action shooting waits on art, dubbing waits on
dialogue, and post-production joins everything at the end.
"""
from showrunner import (
    critical_path,
    film_pipeline_preset,
    mock_registry_for,
    run,
    serial_makespan,
    validate_pipeline,
)

# Validation resolves references, rejects cycles, and fixes a topo order.
graph = validate_pipeline(film_pipeline_preset())
print(f"pipeline {graph.name!r}: {len(graph)} events, {graph.edge_count} edges")
print("topological order:", " -> ".join(graph.topo_order))

# Static analysis first: the longest dependency chain bounds any parallel
# schedule from below, the duration sum is the one-worker baseline.
durations = graph.duration_map()
length, path = critical_path(graph, durations)
print(f"\ncritical path: {' -> '.join(path)}  ({length} time units)")
print(f"serial baseline: {serial_makespan(graph, durations)} time units")

# Now execute on the virtual clock. Mock workers stand in for the
# generative backends; completions land exactly at dispatch + duration.
result = run(graph, mock_registry_for(graph), seed=42)
print(f"\nparallel run finished in {result.makespan} units "
      f"over {result.slice_count} slices")

result_serial = run(graph, mock_registry_for(graph), mode="serial", seed=42)
print(f"serial run finished in {result_serial.makespan} units")
print(f"multiple: {result.makespan / result_serial.makespan:.4f}")

# Every state transition is on the append-only log.
print(f"\nevent log: {result.event_log_ref}")
for event_id, artifact in sorted(result.final_artifacts.items()):
    print(f"  {event_id:<10} {artifact.kind:<12} {artifact.content_hash[:12]}")
