"""Command-line driver for the pipeline and its sub-stages.

Exit codes map failure stages: 2 input/parse, 3 grounding, 4 backend,
5 rendering.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import quantity as Q
from . import recommend as R
from .artifacts import write_artifacts
from .backend import LiveBackend, MockBackend
from .config import load_backend_config, load_pipeline_options
from .errors import (
    EXIT_PARSE,
    EXIT_RENDER,
    AmbiguousPhrase,
    NoDataError,
    SchemaViolation,
    StageError,
    TextchartError,
    UnparsableNumber,
    stage_exit_code,
)
from .pipeline import run_pipeline
from .render import load_theme, render_svg, spec_from_json
from .table import from_json as table_from_json


@click.group()
def main():
    """Turn data-involved text into annotated tables and augmented charts."""


@main.command()
@click.option("--doc", "doc_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Path to the document (plain text or markdown).")
@click.option("--statement", default=None, help="Statement text to analyze.")
@click.option("--span", default=None, metavar="OFFSET:LENGTH",
              help="Statement as a byte span into the document.")
@click.option("--backend", "backend_kind", type=click.Choice(["mock", "live"]), default="mock",
              show_default=True)
@click.option("--fixtures", default=None, type=click.Path(file_okay=False),
              help="Fixture pack directory (required with --backend mock).")
@click.option("--granularity", type=click.Choice(["fine", "coarse", "both"]), default="fine",
              show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def run(doc_path, statement, span, backend_kind, fixtures, granularity, out_dir):
    """Run the full pipeline and write table/spec/chart/trace artifacts."""
    document = Path(doc_path).read_text(encoding="utf-8")
    if (statement is None) == (span is None):
        raise click.UsageError("provide exactly one of --statement or --span")
    if span is not None:
        try:
            offset_s, length_s = span.split(":", 1)
            offset, length = int(offset_s), int(length_s)
        except ValueError:
            raise click.UsageError("--span must be OFFSET:LENGTH")
        if offset < 0 or length <= 0 or offset + length > len(document):
            click.echo(f"error [parse]: span {span} outside document bounds", err=True)
            sys.exit(EXIT_PARSE)
        statement = document[offset:offset + length]

    if backend_kind == "mock":
        if not fixtures:
            raise click.UsageError("--backend mock requires --fixtures")
        backend = MockBackend(fixtures)
    else:
        backend = LiveBackend(load_backend_config())

    options = load_pipeline_options(granularity)
    try:
        result = run_pipeline(statement, document, backend, options)
        written = write_artifacts(result, out_dir)
    except TextchartError as err:
        stage = err.stage if isinstance(err, StageError) else "run"
        click.echo(f"error [{stage}]: {err}", err=True)
        sys.exit(stage_exit_code(err))
    for path in written:
        click.echo(path)


@main.command("parse-quantity")
@click.argument("phrase")
def parse_quantity_cmd(phrase):
    """Parse an English numeric phrase and print the typed quantity as JSON."""
    try:
        q = Q.parse_quantity(phrase)
    except (UnparsableNumber, AmbiguousPhrase) as err:
        click.echo(f"error [parse]: {err}", err=True)
        sys.exit(EXIT_PARSE)
    click.echo(json.dumps(Q.quantity_to_json(q), indent=2))


@main.command()
@click.argument("table_path", type=click.Path(exists=True, dir_okay=False))
def recommend(table_path):
    """Profile a table JSON file and print the rule-engine chart choice."""
    try:
        table = table_from_json(Path(table_path).read_text(encoding="utf-8"))
        profile = R.characterize(table)
        choice = R.rule_recommend(profile, table)
    except SchemaViolation as err:
        click.echo(f"error [parse]: {err}", err=True)
        sys.exit(EXIT_PARSE)
    except NoDataError as err:
        click.echo(f"error [recommend]: {err}", err=True)
        sys.exit(EXIT_RENDER)
    click.echo(json.dumps(R.choice_to_json(choice), indent=2))


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theme", "theme_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False))
def render(spec_path, theme_path, output):
    """Render a chart spec JSON file to SVG (stdout or a file)."""
    try:
        spec = spec_from_json(Path(spec_path).read_text(encoding="utf-8"))
        svg = render_svg(spec, load_theme(theme_path))
    except (KeyError, ValueError, json.JSONDecodeError) as err:
        click.echo(f"error [render]: invalid spec: {err}", err=True)
        sys.exit(EXIT_RENDER)
    except NoDataError as err:
        click.echo(f"error [render]: {err}", err=True)
        sys.exit(EXIT_RENDER)
    if output:
        Path(output).write_text(svg, encoding="utf-8")
    else:
        click.echo(svg, nl=False)


@main.command("make-demo-pack")
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--granularity", type=click.Choice(["fine", "coarse", "both"]), default="fine",
              show_default=True)
def make_demo_pack(out_dir, granularity):
    """Write the bundled example document and its mock fixture pack."""
    from . import demo

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    demo.write_fixture_pack(out / "fixtures", granularity)
    (out / "document.txt").write_text(demo.DOCUMENT, encoding="utf-8")
    (out / "statement.txt").write_text(demo.STATEMENT, encoding="utf-8")
    offset, length = demo.statement_span()
    click.echo(f"fixtures: {out / 'fixtures'}")
    click.echo(f"document: {out / 'document.txt'}")
    click.echo(f"statement span: {offset}:{length}")


@main.command()
@click.option("--port", default=None, type=int, help="Override PORT.")
@click.option("--data-dir", default=None, help="Override DATA_DIR.")
def serve(port, data_dir):
    """Start the HTTP service (documents, runs, artifacts)."""
    import os

    import uvicorn

    if port is not None:
        os.environ["PORT"] = str(port)
    if data_dir is not None:
        os.environ["DATA_DIR"] = data_dir
    from .service import create_app
    from .config import load_service_config

    config = load_service_config()
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)


if __name__ == "__main__":
    main()
