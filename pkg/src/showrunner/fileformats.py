"""Pipeline definition and feedback trace files.

Both ship in two equivalent human-editable formats, YAML and JSON, chosen by
file extension. A pipeline document looks like::

    name: film
    events:
      - id: script
        role: scriptwriter
        params: {scenes: 3}
        deps: []
        duration: 10

and a feedback trace is a list of items::

    - trigger: dialogue          # event id (fires at completion) or a time
      target: dialogue
      kind: Detailed             # YesNo | Critical | Detailed
      verdict: reject
      note: tighten the fifth act
      amendments: {tone: urgent}
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidParams
from .feedback import TraceItem
from .graph import EventSpec, PipelineDef

__all__ = [
    "load_pipeline",
    "parse_pipeline_doc",
    "pipeline_to_doc",
    "load_trace",
    "parse_trace_doc",
    "load_preset",
    "PRESET_NAMES",
]

PRESET_NAMES = ("film",)


def _read_doc(path: str | Path) -> Any:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return json.loads(text)
    if path.suffix.lower() in (".yaml", ".yml"):
        return yaml.safe_load(text)
    raise InvalidParams(f"unsupported file format {path.suffix!r} "
                        f"(use .yaml, .yml, or .json)")


def parse_pipeline_doc(doc: Any) -> PipelineDef:
    if not isinstance(doc, dict) or "events" not in doc:
        raise InvalidParams("pipeline document needs 'name' and 'events'")
    events = []
    for item in doc["events"]:
        if "id" not in item:
            raise InvalidParams(f"event without id: {item!r}")
        duration = item.get("duration")
        events.append(EventSpec(
            id=str(item["id"]),
            role=str(item.get("role", "crew")),
            params=dict(item.get("params") or {}),
            dependencies=frozenset(item.get("deps") or item.get("dependencies") or ()),
            duration=float(duration) if duration is not None else None,
        ))
    return PipelineDef(name=str(doc.get("name", "pipeline")), events=tuple(events))


def pipeline_to_doc(pipeline: PipelineDef) -> dict[str, Any]:
    return {
        "name": pipeline.name,
        "events": [
            {
                "id": e.id,
                "role": e.role,
                "params": dict(e.params),
                "deps": sorted(e.dependencies),
                **({"duration": e.duration} if e.duration is not None else {}),
            }
            for e in pipeline.events
        ],
    }


def load_pipeline(path: str | Path) -> PipelineDef:
    return parse_pipeline_doc(_read_doc(path))


def parse_trace_doc(doc: Any) -> list[TraceItem]:
    if doc is None:
        return []
    if not isinstance(doc, list):
        raise InvalidParams("feedback trace must be a list")
    items = []
    for entry in doc:
        if "trigger" not in entry or "target" not in entry:
            raise InvalidParams(f"trace item needs trigger and target: {entry!r}")
        trigger = entry["trigger"]
        if not isinstance(trigger, (int, float)):
            trigger = str(trigger)
        fields = {
            "target": str(entry["target"]),
            "kind": entry.get("kind", "YesNo"),
            "verdict": entry.get("verdict", "approve"),
            "note": entry.get("note", ""),
            "amendments": dict(entry.get("amendments") or {}),
        }
        if "id" in entry:
            fields["id"] = str(entry["id"])
        items.append(TraceItem(trigger=trigger, feedback_fields=fields))
    return items


def load_trace(path: str | Path) -> list[TraceItem]:
    return parse_trace_doc(_read_doc(path))


def load_preset(name: str) -> PipelineDef:
    if name not in PRESET_NAMES:
        raise InvalidParams(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    text = resources.files("showrunner.presets").joinpath(f"{name}.yaml").read_text()
    return parse_pipeline_doc(yaml.safe_load(text))
