"""Artifact writing shared by the CLI and the service.

For each topic k (per granularity) three files are written: table-{k}.json,
spec-{k}.json and chart-{k}.svg, plus one trace.json per run. Artifacts carry
no timestamps; with the mock backend they are byte-identical across runs.
"""

from __future__ import annotations

from pathlib import Path

from .pipeline import PipelineResult
from .render import render_svg, spec_to_json
from .table import to_json as table_to_json


def write_artifacts(result: PipelineResult, out_dir: str | Path,
                    theme: dict | None = None) -> list[str]:
    """Write all run artifacts; returns relative paths in a stable order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    single = len(result.results) == 1
    written: list[str] = []
    for granularity in sorted(result.results):
        base = out if single else out / granularity
        base.mkdir(parents=True, exist_ok=True)
        for k, topic_result in enumerate(result.results[granularity]):
            for name, payload in (
                (f"table-{k}.json", table_to_json(topic_result.table)),
                (f"spec-{k}.json", spec_to_json(topic_result.spec)),
                (f"chart-{k}.svg", render_svg(topic_result.spec, theme)),
            ):
                (base / name).write_text(payload, encoding="utf-8")
                written.append(str((base / name).relative_to(out)))
    (out / "trace.json").write_text(result.trace.to_json(), encoding="utf-8")
    written.append("trace.json")
    return written
