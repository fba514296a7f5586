"""Operator entry point.

Subcommands: ``simulate`` (serial vs parallel comparison on the virtual
clock), ``run`` (live wall-clock execution), ``replay`` (verify a stored log),
``gantt`` (export timeline rows), and ``serve`` (start the HTTP service).

Every flag can also come from the environment with the ``SHOWRUNNER_`` prefix
(for example ``SHOWRUNNER_SEED=7``); explicit flags win. Exit codes: 0 on
success, 1 for validation or user errors, 2 for internal invariant failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .crew import mock_registry_for
from .errors import ShowrunnerError, ValidationFailure
from .feedback import POLICIES, ScriptedFeedbackSource
from .fileformats import load_pipeline, load_preset, load_trace
from .graph import validate_pipeline
from .runner import run as run_pipeline
from .simreport import simulate
from .store import RunStore
from .service import create_app, gantt_rows

ENV_PREFIX = "SHOWRUNNER_"


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _add_pipeline_args(parser: argparse.ArgumentParser):
    parser.add_argument("--pipeline", default=_env("pipeline"),
                        help="pipeline definition file (.yaml/.json)")
    parser.add_argument("--preset", default=_env("preset"),
                        help="bundled preset name (e.g. film)")
    parser.add_argument("--seed", type=int, default=int(_env("seed", 42)))
    parser.add_argument("--feedback", default=_env("feedback"),
                        help="feedback trace file")
    parser.add_argument("--policy", default=_env("policy", "NoLimits"),
                        choices=sorted(POLICIES))


def _load_graph(args):
    if args.pipeline:
        pipeline = load_pipeline(args.pipeline)
    else:
        pipeline = load_preset(args.preset or "film")
    return validate_pipeline(pipeline)


def _load_source(args):
    trace = load_trace(args.feedback) if args.feedback else []
    return ScriptedFeedbackSource(trace, POLICIES[args.policy])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="showrunner",
        description="dependency-aware pipeline runs with feedback-driven revocation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="compare serial and parallel makespans")
    _add_pipeline_args(p_sim)
    p_sim.add_argument("--mode", default=_env("mode", "both"),
                       choices=["parallel", "serial", "both"])
    p_sim.add_argument("--out", default=_env("out"), help="also write report here")
    p_sim.add_argument("--runs-dir", default=_env("runs_dir"),
                       help="keep run logs under this directory")

    p_run = sub.add_parser("run", help="execute once on the wall clock")
    _add_pipeline_args(p_run)
    p_run.add_argument("--mode", default=_env("mode", "parallel"),
                       choices=["parallel", "serial"])
    p_run.add_argument("--clock", default=_env("clock", "wall"),
                       choices=["wall", "virtual"])
    p_run.add_argument("--time-scale", type=float,
                       default=float(_env("time_scale", 1.0)))
    p_run.add_argument("--runs-dir", default=_env("runs_dir", "runs"))
    p_run.add_argument("--run-id", default=_env("run_id"))

    p_replay = sub.add_parser("replay", help="fold a log and verify the stored state")
    p_replay.add_argument("run_id")
    p_replay.add_argument("--runs-dir", default=_env("runs_dir", "runs"))

    p_gantt = sub.add_parser("gantt", help="export per-attempt timeline rows")
    p_gantt.add_argument("run_id")
    p_gantt.add_argument("--runs-dir", default=_env("runs_dir", "runs"))
    p_gantt.add_argument("--out", default=_env("out"))

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--listen", default=_env("listen", "127.0.0.1:8420"))
    p_serve.add_argument("--runs-dir", default=_env("runs_dir", "runs"))
    p_serve.add_argument("--static-dir", default=_env("static_dir"),
                         help="serve the director console from this directory")
    return parser


def cmd_simulate(args) -> int:
    graph = _load_graph(args)
    trace = load_trace(args.feedback) if args.feedback else []
    store = RunStore(args.runs_dir) if args.runs_dir else None
    report = simulate(graph, trace=trace, policy=POLICIES[args.policy],
                      seed=args.seed, store=store)
    payload = report.to_payload()
    if args.mode != "both":
        keep = {"pipeline", "seed", f"{args.mode}_makespan", "slice_count",
                "revocations", "attempts"}
        payload = {k: v for k, v in payload.items() if k in keep}
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_run(args) -> int:
    graph = _load_graph(args)
    store = RunStore(args.runs_dir)
    result = run_pipeline(
        graph, mock_registry_for(graph), feedback_source=_load_source(args),
        store=store, run_id=args.run_id, mode=args.mode, seed=args.seed,
        wall=args.clock == "wall", time_scale=args.time_scale,
    )
    print(json.dumps({
        "run_id": result.run_id,
        "status": result.status,
        "makespan": result.makespan,
        "slice_count": result.slice_count,
        "revocations": result.revocation_count,
        "log": result.event_log_ref,
    }, indent=2, sort_keys=True))
    return 0 if result.status == "completed" else 2


def cmd_replay(args) -> int:
    store = RunStore(args.runs_dir)
    replayed = store.replay(args.run_id)
    stored = store.read_state(args.run_id)
    mismatches = []
    if replayed.latest_report != stored.latest_report:
        mismatches.append("latest_report")
    if replayed.status != stored.status:
        mismatches.append("status")
    if replayed.slice_count != stored.slice_count:
        mismatches.append("slice_count")
    if mismatches:
        print(f"MISMATCH: replay disagrees with stored state on "
              f"{', '.join(mismatches)}", file=sys.stderr)
        return 2
    print(json.dumps({"run_id": args.run_id, "status": "verified",
                      "slices": replayed.slice_count,
                      "records": len(store.records(args.run_id))},
                     indent=2, sort_keys=True))
    return 0


def cmd_gantt(args) -> int:
    store = RunStore(args.runs_dir)
    rows = gantt_rows(store.records(args.run_id))
    text = json.dumps({"run_id": args.run_id, "rows": rows},
                      indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    host, _, port = args.listen.rpartition(":")
    app = create_app(store_root=args.runs_dir, static_dir=args.static_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    except (SystemExit, OSError) as exc:    # uvicorn wraps bind errors in SystemExit
        print(f"error: cannot listen on {args.listen}: {exc}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "run": cmd_run,
    "replay": cmd_replay,
    "gantt": cmd_gantt,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ShowrunnerError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
