"""Pipeline and trace documents: YAML and JSON, bundled preset."""
import json

import pytest
import yaml

from showrunner import (
    film_pipeline_preset,
    load_pipeline,
    load_preset,
    load_trace,
    pipeline_to_doc,
    validate_pipeline,
)
from showrunner.errors import InvalidParams


def test_bundled_preset_matches_programmatic_definition():
    from_file = load_preset("film")
    from_code = film_pipeline_preset()
    assert pipeline_to_doc(from_file) == pipeline_to_doc(from_code)


def test_unknown_preset():
    with pytest.raises(InvalidParams):
        load_preset("opera")


@pytest.mark.parametrize("suffix, dumper", [
    (".yaml", lambda doc: yaml.safe_dump(doc)),
    (".json", lambda doc: json.dumps(doc)),
])
def test_round_trip_both_formats(tmp_path, suffix, dumper):
    doc = pipeline_to_doc(film_pipeline_preset())
    path = tmp_path / f"pipeline{suffix}"
    path.write_text(dumper(doc))
    loaded = load_pipeline(path)
    assert pipeline_to_doc(loaded) == doc
    validate_pipeline(loaded)


def test_unsupported_extension(tmp_path):
    path = tmp_path / "pipeline.toml"
    path.write_text("x = 1")
    with pytest.raises(InvalidParams):
        load_pipeline(path)


def test_event_without_id_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "events": [{"role": "crew"}]}))
    with pytest.raises(InvalidParams):
        load_pipeline(path)


def test_trace_loading_time_and_completion_triggers(tmp_path):
    path = tmp_path / "trace.yaml"
    path.write_text(yaml.safe_dump([
        {"trigger": "dialogue", "target": "dialogue", "kind": "Critical",
         "verdict": "reject", "note": "flat"},
        {"trigger": 12.5, "target": "script", "kind": "YesNo",
         "verdict": "approve"},
    ]))
    items = load_trace(path)
    assert items[0].trigger == "dialogue"
    assert items[0].feedback_fields["note"] == "flat"
    assert items[1].trigger == 12.5
    assert not items[0].is_time_trigger()
    assert items[1].is_time_trigger()


def test_trace_must_be_list(tmp_path):
    path = tmp_path / "trace.yaml"
    path.write_text(yaml.safe_dump({"trigger": "x"}))
    with pytest.raises(InvalidParams):
        load_trace(path)
