import pytest

from textchart import demo


@pytest.fixture(scope="session")
def gdp_pack(tmp_path_factory):
    """Authored mock fixture pack for the bundled GDP example (fine)."""
    pack_dir = tmp_path_factory.mktemp("gdp_pack")
    demo.write_fixture_pack(pack_dir)
    return pack_dir


@pytest.fixture(scope="session")
def gdp_pack_both(tmp_path_factory):
    pack_dir = tmp_path_factory.mktemp("gdp_pack_both")
    demo.write_fixture_pack(pack_dir, granularity="both")
    return pack_dir


@pytest.fixture(scope="session")
def gdp_result(gdp_pack):
    """A completed pipeline run replayed from the fixture pack."""
    from textchart.backend import MockBackend
    from textchart.pipeline import PipelineOptions, run_pipeline

    return run_pipeline(demo.STATEMENT, demo.DOCUMENT, MockBackend(gdp_pack),
                        PipelineOptions())
