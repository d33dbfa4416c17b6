"""Annotated-table tests: invariant validation, serialization, augmentation."""

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textchart import quantity as Q
from textchart import table as T
from textchart.errors import ArityMismatch, DuplicateRowLabel, SchemaViolation
from util import grid_table, random_table


def quoted_cell(r, c, verbatim, offset, quantity=None, uncertainty=0):
    return T.Cell(r, c, T.QUOTED, T.Quote(offset, len(verbatim), verbatim),
                  quantity, uncertainty)


class TestSchema:
    def test_rejects_empty_columns(self):
        with pytest.raises(ValueError):
            T.TableSchema("t", (), ("a",))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError):
            T.TableSchema("t", ("a", "a"), ("r",))
        with pytest.raises(ValueError):
            T.TableSchema("t", ("a",), ("r", "r"))


class TestValidate:
    def test_quote_mismatch_detected(self):
        context = "Korea's GDP growth in 2010 was 7%."
        table = grid_table("t", ["Korea"], ["2010"], [[None]])
        bad = quoted_cell(0, 0, "9%", 5, Q.exact(9, Q.PERCENT), 0)
        table = T.with_cells(table, bad)
        violations = T.validate(table, context)
        assert [v.code for v in violations] == [T.QUOTE_MISMATCH]
        assert (violations[0].row, violations[0].col) == (0, 0)

    def test_gdp_fixture_table_is_valid(self, gdp_result):
        from textchart import demo

        table = gdp_result.results["fine"][0].table
        assert T.validate(table, demo.DOCUMENT) == []

    def test_uncertainty_rule_on_convertible_quote(self):
        context = "growth was 7% that year"
        offset = context.find("7%")
        table = grid_table("t", ["Korea"], ["2010"], [[None]])
        cell = quoted_cell(0, 0, "7%", offset, Q.exact(7, Q.PERCENT), uncertainty=5)
        violations = T.validate(T.with_cells(table, cell), context)
        assert [v.code for v in violations] == [T.UNCERTAINTY_RULE]

    def test_inferred_requires_positive_uncertainty(self):
        table = grid_table("t", ["a"], ["r"], [[None]])
        cell = T.Cell(0, 0, T.INFERRED, None, Q.exact(1), 0)
        assert [v.code for v in T.validate(T.with_cells(table, cell))] == [T.UNCERTAINTY_RULE]

    def test_absent_cell_with_quantity(self):
        schema = T.TableSchema("t", ("a",), ("r",))
        cell = T.Cell(0, 0, T.ABSENT, None, Q.exact(1), 0)
        table = T.AnnotatedTable(schema, (cell,))
        assert [v.code for v in T.validate(table)] == [T.ABSENT_QUANTITY]

    def test_uncertainty_bounds(self):
        schema = T.TableSchema("t", ("a",), ("r",))
        cell = T.Cell(0, 0, T.INFERRED, None, Q.exact(1), 150)
        table = T.AnnotatedTable(schema, (cell,))
        assert T.UNCERTAINTY_BOUNDS in [v.code for v in T.validate(table)]

    def test_grounding_skipped_without_context(self):
        table = grid_table("t", ["Korea"], ["2010"], [[None]])
        cell = quoted_cell(0, 0, "fabricated", 0, None, 0)
        assert T.validate(T.with_cells(table, cell)) == []


class TestSerialization:
    def test_round_trip_field_for_field(self):
        rng = random.Random(7)
        table = random_table(rng)
        assert T.from_json(T.to_json(table)) == table

    def test_uncertainty_out_of_bounds_pointer(self):
        doc = T.table_to_dict(grid_table("t", ["a"], ["r"], [[1.0]]))
        doc["cells"][0]["uncertainty"] = 150
        with pytest.raises(SchemaViolation) as err:
            T.table_from_dict(doc)
        assert err.value.pointer == "/cells/0/uncertainty"

    def test_missing_schema_key_pointer(self):
        doc = T.table_to_dict(grid_table("t", ["a"], ["r"], [[1.0]]))
        del doc["schema"]
        with pytest.raises(SchemaViolation) as err:
            T.table_from_dict(doc)
        assert err.value.pointer == "/schema"

    def test_invalid_origin_rejected(self):
        doc = T.table_to_dict(grid_table("t", ["a"], ["r"], [[1.0]]))
        doc["cells"][0]["origin"] = "guessed"
        with pytest.raises(SchemaViolation) as err:
            T.table_from_dict(doc)
        assert "/cells/0/origin" == err.value.pointer

    def test_not_json(self):
        with pytest.raises(SchemaViolation):
            T.from_json("{nope")

    def test_grid_shape_mismatch(self):
        doc = T.table_to_dict(grid_table("t", ["a", "b"], ["r"], [[1.0, 2.0]]))
        doc["cells"] = doc["cells"][:1]
        with pytest.raises(SchemaViolation) as err:
            T.table_from_dict(doc)
        assert err.value.pointer == "/cells"

    def test_published_schema_is_valid_jsonschema(self):
        import jsonschema

        jsonschema.Draft202012Validator.check_schema(T.published_schema())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_serialization_lossless_property(self, seed):
        table = random_table(random.Random(seed))
        assert T.from_json(T.to_json(table)) == table


class TestAugmentRows:
    def _gdp3(self):
        return grid_table("gdp", ["Korea", "China", "Japan"],
                          ["2000", "2010", "2020"],
                          [[4.5, 8.1, 2.3], [7.0, 10.6, 4.0], [0.9, 2.2, 1.2]])

    def test_appends_rows_and_records_indices(self):
        table = self._gdp3()
        rows = [
            ("2005", [T.Cell(0, c, T.INFERRED, None, Q.exact(1 + c, Q.PERCENT), 50)
                      for c in range(3)]),
            ("2015", [T.Cell(0, c, T.INFERRED, None, Q.exact(2 + c, Q.PERCENT), 50)
                      for c in range(3)]),
        ]
        out = T.augment_rows(table, rows)
        assert len(out.schema.row_labels) == 5
        assert out.schema.row_labels[3:] == ("2005", "2015")
        assert sorted(out.augmented_rows) == [3, 4]

    def test_zero_rows_identity(self):
        table = self._gdp3()
        assert T.augment_rows(table, []) == table

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            T.augment_rows(self._gdp3(), [("2005", [T.Cell(0, 0)])])

    def test_duplicate_label(self):
        cells = [T.Cell(0, c) for c in range(3)]
        with pytest.raises(DuplicateRowLabel):
            T.augment_rows(self._gdp3(), [("2010", cells)])

    def test_augmentation_is_monotone(self):
        table = self._gdp3()
        out = T.augment_rows(table, [("2005", [T.Cell(0, c) for c in range(3)])])
        for cell in table.cells:
            assert out.cell(cell.row, cell.col) == cell

    def test_original_untouched(self):
        table = self._gdp3()
        before = T.to_json(table)
        T.augment_rows(table, [("2005", [T.Cell(0, c) for c in range(3)])])
        assert T.to_json(table) == before


def test_json_field_names_match_published_contract():
    table = grid_table("t", ["a"], ["r"], [[1.0]])
    doc = json.loads(T.to_json(table))
    assert set(doc) == {"schema", "cells", "augmented_rows"}
    assert set(doc["schema"]) == {"topic_id", "column_labels", "row_labels"}
    cell = doc["cells"][0]
    assert set(cell) == {"row", "col", "quote", "quantity", "origin", "uncertainty"}
    assert set(cell["quote"]) == {"offset", "length", "verbatim"}
    assert set(cell["quantity"]) == {"kind", "value", "lo", "hi", "unit", "modifier"}
