"""Bundled example: an East Asian GDP-growth article plus scripted backend
responses, used to author a mock fixture pack for offline runs and tests.

``write_fixture_pack`` replays the scripted responses through a recording
backend, producing ``<sha256(prompt)>.json`` fixtures that the mock backend
can replay byte-identically afterwards.
"""

from __future__ import annotations

import json
from pathlib import Path

from .backend import MockBackend, RecordingBackend, ScriptedBackend
from .pipeline import PipelineOptions, PipelineResult, run_pipeline

DOCUMENT = """\
Seoul's statistics bureau released a retrospective on East Asian growth last week, \
and the numbers reward a close read. In 2000, Korea's economy expanded by between \
4% and 5%, China's output exceeded 8%, and Japan managed just 2.3%. A decade on, \
the gap narrowed: Korea's GDP growth in 2010 came to 7%, China recorded 10.6%, and \
Japan landed between 3% and 5%.

The intervening years tell their own story. In 2005, Korea grew 3.9% while China \
surged 11.4% and Japan added 1.7%. By 2015 the pattern had cooled: Korea posted \
2.6%, China slowed to 6.9%, and Japan eked out 1.6%.

The pandemic year scrambled everything. China still reported growth of 2.2% in \
2020, and Japan's figure came in at about 1.2%. Korea's bureau has not finalized \
its 2020 number, though most analysts reckon the economy expanded a little less \
than one percent.
"""

STATEMENT = (
    "In 2000, Korea's economy expanded by between 4% and 5%, China's output "
    "exceeded 8%, and Japan managed just 2.3%. A decade on, the gap narrowed: "
    "Korea's GDP growth in 2010 came to 7%, China recorded 10.6%, and Japan "
    "landed between 3% and 5%."
)


def statement_span() -> tuple[int, int]:
    offset = DOCUMENT.find(STATEMENT)
    assert offset != -1
    return offset, len(STATEMENT)


_KEY_MESSAGES = {
    "messages": [
        {"text": "Korea's growth rate in 2000 was between 4% and 5%.",
         "quote": "between 4% and 5%"},
        {"text": "China's growth rate in 2000 was larger than 8%.",
         "quote": "exceeded 8%"},
        {"text": "Japan's growth rate in 2000 was 2.3%.", "quote": "2.3%"},
        {"text": "Korea's growth rate in 2010 was 7%.", "quote": "7%"},
        {"text": "China's growth rate in 2010 was 10.6%.", "quote": "10.6%"},
        {"text": "Japan's growth rate in 2010 was between 3% and 5%.",
         "quote": "between 3% and 5%"},
    ]
}

_TOPICS_FINE = {
    "topics": [
        {"title": "GDP growth of Korea, China and Japan, 2000-2020",
         "message_indices": [0, 1, 2, 3, 4, 5]},
    ]
}

_TOPICS_COARSE = {
    "topics": [
        {"title": "East Asian economic development since 2000",
         "message_indices": [0, 1, 2, 3, 4, 5]},
    ]
}

_SCHEMA = {"columns": ["Korea", "China", "Japan"], "rows": ["2000", "2010", "2020"]}

_POPULATE = {
    "cells": [
        {"row": "2000", "col": "Korea", "quote": "between 4% and 5%"},
        {"row": "2000", "col": "China", "quote": "exceeded 8%"},
        {"row": "2000", "col": "Japan", "quote": "2.3%"},
        {"row": "2010", "col": "Korea", "quote": "7%"},
        {"row": "2010", "col": "China", "quote": "10.6%"},
        {"row": "2010", "col": "Japan", "quote": "between 3% and 5%"},
        {"row": "2020", "col": "China", "quote": "2.2%"},
        {"row": "2020", "col": "Japan", "quote": "about 1.2%"},
    ]
}

_INFER = {
    "cells": [
        {"row": "2000", "col": "Korea", "value": 4.5, "uncertainty": 10},
        {"row": "2000", "col": "China", "value": 8.1, "uncertainty": 20},
        {"row": "2010", "col": "Japan", "value": 4.0, "uncertainty": 10},
        {"row": "2020", "col": "Japan", "value": 1.2, "uncertainty": 10},
        {"row": "2020", "col": "Korea", "value": 0.9, "kind": "exact",
         "unit": "percent", "uncertainty": 50},
    ],
    "new_rows": [
        {"row": "2005", "cells": [
            {"col": "Korea", "quote": "3.9%"},
            {"col": "China", "quote": "11.4%"},
            {"col": "Japan", "quote": "1.7%"},
        ]},
        {"row": "2015", "cells": [
            {"col": "Korea", "quote": "2.6%"},
            {"col": "China", "quote": "6.9%"},
            {"col": "Japan", "quote": "1.6%"},
        ]},
    ],
}

_SENTIMENT = {
    "sentiment": "neutral",
    "narrative": "Two decades of steady, if uneven, East Asian growth.",
    "linked_cells": [],
}

_CHART = {"chart_type": "line", "x": "rows", "y": ["Korea", "China", "Japan"]}


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


def scripted_responses(granularity: str = "fine") -> list[str]:
    """Stage responses in the exact order run_pipeline consumes them."""
    per_topic = [_dump(_SCHEMA), _dump(_POPULATE), _dump(_INFER),
                 _dump(_SENTIMENT), _dump(_CHART)]
    out = [_dump(_KEY_MESSAGES)]
    if granularity in ("fine", "both"):
        out.extend([_dump(_TOPICS_FINE)] + per_topic)
    if granularity in ("coarse", "both"):
        out.extend([_dump(_TOPICS_COARSE)] + per_topic)
    return out


def write_fixture_pack(out_dir: str | Path, granularity: str = "fine") -> PipelineResult:
    """Author the mock fixture pack by replaying scripted responses."""
    backend = RecordingBackend(ScriptedBackend(scripted_responses(granularity)), out_dir)
    options = PipelineOptions(granularity=granularity)
    return run_pipeline(STATEMENT, DOCUMENT, backend, options)


def mock_backend(fixture_dir: str | Path) -> MockBackend:
    return MockBackend(fixture_dir)
