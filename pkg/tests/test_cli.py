"""CLI tests: the run command, stage subcommands and exit codes."""

import json

import pytest
from click.testing import CliRunner

from textchart import demo
from textchart import table as T
from textchart.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def doc_file(tmp_path):
    path = tmp_path / "document.txt"
    path.write_text(demo.DOCUMENT, encoding="utf-8")
    return path


class TestRun:
    def test_full_run_writes_artifacts(self, runner, doc_file, gdp_pack, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--statement", demo.STATEMENT,
            "--backend", "mock", "--fixtures", str(gdp_pack), "--out", str(out)])
        assert result.exit_code == 0, result.output
        names = {p.name for p in out.iterdir()}
        assert names == {"table-0.json", "spec-0.json", "chart-0.svg", "trace.json"}
        table = T.from_json((out / "table-0.json").read_text())
        assert table.schema.column_labels == ("Korea", "China", "Japan")
        assert (out / "chart-0.svg").read_text().startswith("<svg")

    def test_span_selection(self, runner, doc_file, gdp_pack, tmp_path):
        offset, length = demo.statement_span()
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--span", f"{offset}:{length}",
            "--backend", "mock", "--fixtures", str(gdp_pack), "--out", str(out)])
        assert result.exit_code == 0, result.output

    def test_invalid_span_exits_2(self, runner, doc_file, gdp_pack, tmp_path):
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--span", "999999:50",
            "--backend", "mock", "--fixtures", str(gdp_pack),
            "--out", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_statement_and_span_conflict(self, runner, doc_file, gdp_pack, tmp_path):
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--statement", "x", "--span", "0:5",
            "--backend", "mock", "--fixtures", str(gdp_pack),
            "--out", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_missing_fixture_exits_4(self, runner, doc_file, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--statement", demo.STATEMENT,
            "--backend", "mock", "--fixtures", str(empty),
            "--out", str(tmp_path / "out")])
        assert result.exit_code == 4

    def test_granularity_both_subdirectories(self, runner, doc_file, gdp_pack_both, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "run", "--doc", str(doc_file), "--statement", demo.STATEMENT,
            "--backend", "mock", "--fixtures", str(gdp_pack_both),
            "--granularity", "both", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "fine" / "table-0.json").exists()
        assert (out / "coarse" / "table-0.json").exists()
        assert (out / "trace.json").exists()


class TestSubcommands:
    def test_parse_quantity(self, runner):
        result = runner.invoke(main, ["parse-quantity", "between 4% and 5%"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc == {"kind": "closed_range", "value": 4.5, "lo": 4.0, "hi": 5.0,
                       "unit": "percent", "modifier": None}

    def test_parse_quantity_unparsable_exits_2(self, runner):
        result = runner.invoke(main, ["parse-quantity", "no numbers"])
        assert result.exit_code == 2

    def test_recommend(self, runner, tmp_path, gdp_result):
        table = gdp_result.results["fine"][0].table
        path = tmp_path / "table.json"
        path.write_text(T.to_json(table))
        result = runner.invoke(main, ["recommend", str(path)])
        assert result.exit_code == 0
        assert json.loads(result.output)["chart_type"] == "line"

    def test_recommend_bad_table_exits_2(self, runner, tmp_path):
        path = tmp_path / "table.json"
        path.write_text("{}")
        result = runner.invoke(main, ["recommend", str(path)])
        assert result.exit_code == 2

    def test_render(self, runner, tmp_path, gdp_result):
        from textchart.render import spec_to_json

        spec = gdp_result.results["fine"][0].spec
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(spec_to_json(spec))
        out_path = tmp_path / "chart.svg"
        result = runner.invoke(main, ["render", str(spec_path), "-o", str(out_path)])
        assert result.exit_code == 0
        assert out_path.read_text().startswith("<svg")

    def test_render_stdout(self, runner, tmp_path, gdp_result):
        from textchart.render import spec_to_json

        spec = gdp_result.results["fine"][0].spec
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(spec_to_json(spec))
        result = runner.invoke(main, ["render", str(spec_path)])
        assert result.exit_code == 0
        assert result.output.startswith("<svg")

    def test_make_demo_pack(self, runner, tmp_path):
        out = tmp_path / "pack"
        result = runner.invoke(main, ["make-demo-pack", str(out)])
        assert result.exit_code == 0
        assert (out / "document.txt").exists()
        assert any((out / "fixtures").iterdir())


class TestConfigWiring:
    def test_config_file_sets_uncertainty_and_thresholds(self, tmp_path, monkeypatch):
        from textchart.config import load_pipeline_options

        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({
            "backend": {"max_retries": 5, "temperature": 0.25},
            "uncertainty": {"inferred": 77, "computed_min": 3},
            "recommender": {"min_scatter_rows": 9, "max_pie_slices": 4},
        }))
        monkeypatch.setenv("TEXTCHART_CONFIG", str(config_path))
        monkeypatch.delenv("BACKEND_MAX_RETRIES", raising=False)
        options = load_pipeline_options("coarse")
        assert options.granularity == "coarse"
        assert options.max_retries == 5
        assert options.uncertainty.inferred == 77
        assert options.uncertainty.computed_min == 3
        assert options.uncertainty.closed_range == 10  # untouched default
        assert options.thresholds.min_scatter_rows == 9
        assert options.thresholds.max_pie_slices == 4
        assert dict(options.decoding)["temperature"] == 0.25

    def test_defaults_without_config(self, monkeypatch):
        from textchart.config import load_pipeline_options
        from textchart.pipeline import UncertaintyDefaults

        monkeypatch.delenv("TEXTCHART_CONFIG", raising=False)
        options = load_pipeline_options()
        assert options.uncertainty == UncertaintyDefaults()
