"""Rule-engine tests: profiling, the priority chain, and reconciliation."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textchart import quantity as Q
from textchart import recommend as R
from textchart import table as T
from textchart.errors import NoDataError
from util import grid_table, random_table


def gdp_table():
    return grid_table("gdp", ["Korea", "China", "Japan"],
                      ["2000", "2010", "2020"],
                      [[4.5, 8.1, 2.3], [7.0, 10.6, 4.0], [0.9, 2.2, 1.2]])


def shares_table():
    return grid_table("shares", ["Share"], ["Evangelical", "Mainline", "Historically Black"],
                      [[47.0], [33.0], [20.0]])


def ratings_table():
    return grid_table("ratings", ["Approval", "Disapproval"],
                      ["Trump", "Obama", "Clinton"],
                      [[40.0, 53.0], [61.0, 30.0], [55.0, 39.0]])


def strategies_table():
    rows = ["No interventions", "Mobility reduction", "25% mask adoption",
            "50% mask adoption", "75% mask adoption"]
    values = [[0.0, 0.0], [12.0, 9.0], [25.0, 21.0], [41.0, 37.0], [58.0, 52.0]]
    return grid_table("strategies", ["Deaths averted", "Hospitalizations averted"],
                      rows, values)


class TestCharacterize:
    def test_year_rows_are_temporal(self):
        profile = R.characterize(gdp_table())
        assert profile.row_axis_kind == "temporal"
        assert profile.series_count == 3
        assert profile.numeric_row_count == 3

    def test_part_of_whole_single_percent_series(self):
        profile = R.characterize(shares_table())
        assert profile.part_of_whole is True

    def test_part_of_whole_needs_sum_near_100(self):
        t = grid_table("t", ["Share"], ["a", "b"], [[20.0], [30.0]])
        assert R.characterize(t).part_of_whole is False

    def test_all_absent_raises_no_data(self):
        t = grid_table("t", ["a"], ["r1", "r2"], [[None], [None]])
        with pytest.raises(NoDataError):
            R.characterize(t)

    def test_open_range_flag(self):
        t = grid_table("t", ["a"], ["r"], [[Q.open_lower(8, Q.PERCENT)]])
        assert R.characterize(t).has_open_range is True

    def test_missing_flag(self):
        t = grid_table("t", ["a"], ["r1", "r2"], [[1.0], [None]])
        assert R.characterize(t).has_missing is True

    def test_temporal_label_forms(self):
        assert R.is_temporal_label("2007")
        assert R.is_temporal_label("2020-03")
        assert R.is_temporal_label("Mar 2020")
        assert not R.is_temporal_label("Trump")
        assert not R.is_temporal_label("Q3")


class TestRuleRecommend:
    def test_gdp_line(self):
        t = gdp_table()
        assert R.rule_recommend(R.characterize(t), t).chart_type == R.LINE

    def test_shares_pie(self):
        t = shares_table()
        assert R.rule_recommend(R.characterize(t), t).chart_type == R.PIE

    def test_ratings_bar(self):
        t = ratings_table()
        assert R.rule_recommend(R.characterize(t), t).chart_type == R.BAR

    def test_strategies_scatter(self):
        t = strategies_table()
        assert R.rule_recommend(R.characterize(t), t).chart_type == R.SCATTER

    def test_short_time_series_falls_back_to_bar(self):
        t = grid_table("t", ["a"], ["2019", "2020"], [[1.0], [2.0]])
        assert R.rule_recommend(R.characterize(t), t).chart_type == R.BAR

    def test_open_range_disqualifies_pie(self):
        t = grid_table("t", ["Share"], ["a", "b", "c"],
                       [[Q.open_lower(47, Q.PERCENT)], [33.0], [20.0]])
        profile = R.characterize(t)
        assert R.rule_recommend(profile, t).chart_type != R.PIE

    def test_axis_rule(self):
        for t in (gdp_table(), shares_table(), ratings_table(), strategies_table()):
            choice = R.rule_recommend(R.characterize(t), t)
            assert choice.x_binding == R.ROWS_BINDING
            assert set(choice.y_binding) <= set(t.schema.column_labels)


class TestReconcile:
    def test_llm_pie_on_non_part_of_whole_falls_back(self):
        t = ratings_table()
        profile = R.characterize(t)
        rule = R.rule_recommend(profile, t)
        llm = R.ChartChoice(R.PIE, R.ROWS_BINDING, ("Approval",), R.LLM)
        final = R.reconcile(llm, rule, profile, t)
        assert final.chart_type == R.BAR
        assert final.provenance == R.RULE

    def test_llm_agreement_accepted(self):
        t = gdp_table()
        profile = R.characterize(t)
        rule = R.rule_recommend(profile, t)
        llm = R.ChartChoice(R.LINE, R.ROWS_BINDING, tuple(t.schema.column_labels), R.LLM)
        final = R.reconcile(llm, rule, profile, t)
        assert final.chart_type == R.LINE
        assert final.provenance == R.LLM

    def test_unknown_binding_falls_back(self):
        t = gdp_table()
        profile = R.characterize(t)
        rule = R.rule_recommend(profile, t)
        llm = R.ChartChoice(R.LINE, R.ROWS_BINDING, ("Atlantis",), R.LLM)
        assert R.reconcile(llm, rule, profile, t).provenance == R.RULE

    def test_none_choice_uses_rule(self):
        t = gdp_table()
        profile = R.characterize(t)
        rule = R.rule_recommend(profile, t)
        assert R.reconcile(None, rule, profile, t).chart_type == rule.chart_type


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_totality_and_pie_safety(seed):
    """rule_recommend is total and never reconciles into an unsafe pie."""
    rng = random.Random(seed)
    table = random_table(rng)
    numeric = [c for c in table.cells if c.quantity is not None]
    if not numeric:
        with pytest.raises(NoDataError):
            R.characterize(table)
        return
    profile = R.characterize(table)
    rule = R.rule_recommend(profile, table)
    assert rule.chart_type in R.CHART_TYPES

    llm = R.ChartChoice(
        rng.choice(R.CHART_TYPES),
        rng.choice([R.ROWS_BINDING, "bogus"]),
        (rng.choice(table.schema.column_labels + ("bogus",)),),
        R.LLM,
    )
    final = R.reconcile(llm, rule, profile, table)
    assert final.chart_type in R.CHART_TYPES
    if final.chart_type == R.PIE:
        assert profile.part_of_whole and not profile.has_open_range


def test_choice_json_round_trip():
    choice = R.ChartChoice(R.LINE, R.ROWS_BINDING, ("a", "b"), R.RECONCILED)
    assert R.choice_from_json(R.choice_to_json(choice)) == choice
