import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from showrunner import (
    RunStore,
    TraceItem,
    film_pipeline_preset,
    validate_pipeline,
)


@pytest.fixture
def film_graph():
    return validate_pipeline(film_pipeline_preset())


@pytest.fixture
def film_durations(film_graph):
    return film_graph.duration_map()


@pytest.fixture
def store(tmp_path):
    return RunStore(tmp_path / "runs")


def rejected_dialogue_trace():
    """Reject the completed dialogue with a detailed note, once."""
    return [TraceItem(trigger="dialogue", feedback_fields={
        "target": "dialogue", "kind": "Detailed", "verdict": "reject",
        "note": "tighten the fifth act",
    })]


@pytest.fixture
def rejected_dialogue_items():
    return rejected_dialogue_trace()
