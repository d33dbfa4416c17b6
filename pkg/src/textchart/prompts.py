"""Prompt pack: per-stage templates, in-context examples and response contracts.

A pack is a directory with one subdirectory per stage, each holding
``template.txt`` and ``examples.json``; ``pack.json`` carries the pack
version. The default pack ships with the package. Prompts are rendered
deterministically so the mock backend's prompt-hash keying is stable.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from pathlib import Path

STAGES = ("key_messages", "topics", "schema", "populate", "infer", "sentiment", "chart")

FINE = "fine"
COARSE = "coarse"


@dataclass(frozen=True)
class PromptPack:
    version: int
    templates: dict  # stage -> template text
    examples: dict   # stage -> list of example objects

    def render(self, stage: str, **fields: str) -> str:
        template = self.templates[stage]
        examples = self.examples.get(stage) or []
        if examples:
            rendered = "Examples:\n" + json.dumps(examples, indent=2, ensure_ascii=False)
        else:
            rendered = ""
        return template.format(examples=rendered, **fields).strip() + "\n"


def _read_default(relpath: str) -> str:
    ref = importlib.resources.files("textchart").joinpath("prompts", relpath)
    return ref.read_text(encoding="utf-8")


def load_pack(path: str | Path | None = None) -> PromptPack:
    """Load a prompt pack from a directory, or the packaged default."""
    if path is None:
        meta = json.loads(_read_default("pack.json"))
        templates = {s: _read_default(f"{s}/template.txt") for s in STAGES}
        examples = {s: json.loads(_read_default(f"{s}/examples.json")) for s in STAGES}
    else:
        root = Path(path)
        meta = json.loads((root / "pack.json").read_text(encoding="utf-8"))
        templates = {s: (root / s / "template.txt").read_text(encoding="utf-8") for s in STAGES}
        examples = {
            s: json.loads((root / s / "examples.json").read_text(encoding="utf-8"))
            for s in STAGES
        }
    return PromptPack(version=meta["version"], templates=templates, examples=examples)


# --- per-stage response contracts (JSON schema) -----------------------------

KEY_MESSAGES_CONTRACT = {
    "type": "object",
    "required": ["messages"],
    "properties": {
        "messages": {
            "type": "array",
            "minItems": 0,
            "items": {
                "type": "object",
                "required": ["text", "quote"],
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "quote": {"type": "string", "minLength": 1},
                },
            },
        }
    },
}

TOPICS_CONTRACT = {
    "type": "object",
    "required": ["topics"],
    "properties": {
        "topics": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["title", "message_indices"],
                "properties": {
                    "title": {"type": "string", "minLength": 1},
                    "message_indices": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "integer", "minimum": 0},
                    },
                },
            },
        }
    },
}

SCHEMA_CONTRACT = {
    "type": "object",
    "required": ["columns", "rows"],
    "properties": {
        "columns": {"type": "array", "items": {"type": "string", "minLength": 1}},
        "rows": {"type": "array", "items": {"type": "string", "minLength": 1}},
    },
}

POPULATE_CONTRACT = {
    "type": "object",
    "required": ["cells"],
    "properties": {
        "cells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["row", "col", "quote"],
                "properties": {
                    "row": {"type": "string"},
                    "col": {"type": "string"},
                    "quote": {"type": "string", "minLength": 1},
                },
            },
        }
    },
}

_RESOLUTION_PROPS = {
    "col": {"type": "string"},
    "value": {"type": ["number", "null"]},
    "kind": {"enum": ["exact", "closed_range", "open_lower", "open_upper", None]},
    "lo": {"type": ["number", "null"]},
    "hi": {"type": ["number", "null"]},
    "unit": {"type": ["string", "null"]},
    "uncertainty": {"type": ["integer", "null"]},
    "quote": {"type": ["string", "null"]},
    "computed_from": {
        "anyOf": [
            {"type": "null"},
            {
                "type": "object",
                "required": ["row", "col", "payload", "payload_kind"],
                "properties": {
                    "row": {"type": "string"},
                    "col": {"type": "string"},
                    "payload": {"type": "number"},
                    "payload_kind": {"enum": ["factor", "delta"]},
                },
            },
        ]
    },
}

INFER_CONTRACT = {
    "type": "object",
    "required": ["cells", "new_rows"],
    "properties": {
        "cells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["row", "col"],
                "properties": {"row": {"type": "string"}, **_RESOLUTION_PROPS},
            },
        },
        "new_rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["row", "cells"],
                "properties": {
                    "row": {"type": "string", "minLength": 1},
                    "cells": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["col"],
                            "properties": dict(_RESOLUTION_PROPS),
                        },
                    },
                },
            },
        },
    },
}

SENTIMENT_CONTRACT = {
    "type": "object",
    "required": ["sentiment", "narrative"],
    "properties": {
        "sentiment": {"enum": ["positive", "negative", "neutral"]},
        "narrative": {"type": "string", "minLength": 1},
        "linked_cells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["row", "col"],
                "properties": {"row": {"type": "string"}, "col": {"type": "string"}},
            },
        },
    },
}

CHART_CONTRACT = {
    "type": "object",
    "required": ["chart_type", "x", "y"],
    "properties": {
        "chart_type": {"enum": ["bar", "line", "pie", "scatter"]},
        "x": {"type": "string"},
        "y": {"type": "array", "minItems": 1, "items": {"type": "string"}},
    },
}

CONTRACTS = {
    "key_messages": KEY_MESSAGES_CONTRACT,
    "topics": TOPICS_CONTRACT,
    "schema": SCHEMA_CONTRACT,
    "populate": POPULATE_CONTRACT,
    "infer": INFER_CONTRACT,
    "sentiment": SENTIMENT_CONTRACT,
    "chart": CHART_CONTRACT,
}


# --- prompt builders ---------------------------------------------------------

def key_messages_prompt(pack: PromptPack, statement: str, context: str) -> str:
    return pack.render("key_messages", statement=statement, context=context)


def topics_prompt(pack: PromptPack, messages: list[str], granularity: str) -> str:
    listing = "\n".join(f"{i}. {text}" for i, text in enumerate(messages))
    if granularity == FINE:
        instruction = ("Cluster at a fine-grained level: each topic covers one narrowly "
                       "scoped subject (one metric, one entity, or one close comparison).")
    else:
        instruction = ("Cluster at a coarse-grained level: each topic gives a broad "
                       "overview grouping related subjects together.")
    return pack.render("topics", messages=listing, granularity_instruction=instruction)


def schema_prompt(pack: PromptPack, title: str, messages: list[str]) -> str:
    listing = "\n".join(f"- {text}" for text in messages)
    return pack.render("schema", title=title, messages=listing)


def populate_prompt(pack: PromptPack, columns: list[str], rows: list[str], context: str) -> str:
    return pack.render(
        "populate",
        columns=json.dumps(columns, ensure_ascii=False),
        rows=json.dumps(rows, ensure_ascii=False),
        context=context,
    )


def infer_prompt(
    pack: PromptPack,
    columns: list[str],
    rows: list[str],
    pending: list[dict],
    missing: list[dict],
    context: str,
) -> str:
    return pack.render(
        "infer",
        columns=json.dumps(columns, ensure_ascii=False),
        rows=json.dumps(rows, ensure_ascii=False),
        pending=json.dumps(pending, indent=2, ensure_ascii=False),
        missing=json.dumps(missing, indent=2, ensure_ascii=False),
        context=context,
    )


def sentiment_prompt(pack: PromptPack, title: str, messages: list[str],
                     columns: list[str], rows: list[str]) -> str:
    listing = "\n".join(f"- {text}" for text in messages)
    return pack.render(
        "sentiment",
        title=title,
        messages=listing,
        columns=json.dumps(columns, ensure_ascii=False),
        rows=json.dumps(rows, ensure_ascii=False),
    )


def chart_prompt(pack: PromptPack, columns: list[str], rows: list[str],
                 table_summary: str) -> str:
    return pack.render(
        "chart",
        columns=json.dumps(columns, ensure_ascii=False),
        rows=json.dumps(rows, ensure_ascii=False),
        table_summary=table_summary,
    )
