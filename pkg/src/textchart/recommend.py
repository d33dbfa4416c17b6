"""Rule engine for chart type recommendation.

Characterizes a table (temporal vs categorical rows, series count,
part-of-whole shape, open ranges, missing cells) and picks one of four
chart types by a fixed priority chain: line for time series, pie for
part-of-whole shares, scatter for wide multi-series comparisons, bar as
the universal fallback. A backend-suggested choice is accepted only when
it passes the same validity predicates; otherwise the rule choice wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NoDataError
from .quantity import EXACT
from .table import ABSENT, AnnotatedTable

BAR = "bar"
LINE = "line"
PIE = "pie"
SCATTER = "scatter"

CHART_TYPES = (BAR, LINE, PIE, SCATTER)

ROWS_BINDING = "rows"  # reserved x-binding token for the row-identifier axis

RULE = "rule"
LLM = "llm"
RECONCILED = "reconciled"


@dataclass(frozen=True)
class Thresholds:
    """Rule-engine knobs; defaults baked in, overridable via configuration."""

    min_temporal_rows: int = 3
    max_pie_slices: int = 8
    min_scatter_rows: int = 5
    part_of_whole_lo: float = 95.0
    part_of_whole_hi: float = 105.0


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class TableProfile:
    row_axis_kind: str  # "temporal" | "categorical"
    series_count: int
    numeric_row_count: int
    part_of_whole: bool
    has_open_range: bool
    has_missing: bool

    def __post_init__(self):
        if self.series_count < 1:
            raise ValueError("series_count must be >= 1")
        if self.part_of_whole and self.series_count != 1:
            raise ValueError("part_of_whole implies a single series")


@dataclass(frozen=True)
class ChartChoice:
    chart_type: str
    x_binding: str
    y_binding: tuple[str, ...]
    provenance: str = RULE

    def __post_init__(self):
        object.__setattr__(self, "y_binding", tuple(self.y_binding))


_YEAR = re.compile(r"^(1[5-9]\d\d|20\d\d)$")
_ISO_DATE = re.compile(r"^(1[5-9]\d\d|20\d\d)-(0?[1-9]|1[0-2])(-(0?[1-9]|[12]\d|3[01]))?$")
_MONTH_YEAR = re.compile(
    r"^(jan|feb|mar|apr|may|jun|jul|aug|sep|oct|nov|dec)[a-z]*\.?\s+(1[5-9]\d\d|20\d\d)$",
    re.IGNORECASE,
)


def is_temporal_label(label: str) -> bool:
    label = label.strip()
    return bool(_YEAR.match(label) or _ISO_DATE.match(label) or _MONTH_YEAR.match(label))


def temporal_sort_key(label: str) -> tuple:
    """Chronological ordering key for temporal labels (years first)."""
    label = label.strip()
    m = _YEAR.match(label)
    if m:
        return (int(m.group(0)), 0)
    m = _ISO_DATE.match(label)
    if m:
        return (int(m.group(1)), int(m.group(2)), int(m.group(4) or 0))
    m = _MONTH_YEAR.match(label)
    if m:
        months = ("jan", "feb", "mar", "apr", "may", "jun",
                  "jul", "aug", "sep", "oct", "nov", "dec")
        return (int(m.group(2)), months.index(m.group(1).lower()[:3]) + 1)
    return (0,)


def characterize(table: AnnotatedTable, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> TableProfile:
    """Deterministically profile a complete table.

    Raises NoDataError when no cell carries a numeric value at all.
    """
    schema = table.schema
    numeric_cells = [c for c in table.cells if c.quantity is not None]
    if not numeric_cells:
        raise NoDataError(f"table {schema.topic_id!r} holds no numeric cells")

    temporal = bool(schema.row_labels) and all(is_temporal_label(l) for l in schema.row_labels)
    numeric_rows = {c.row for c in numeric_cells}
    has_open_range = any(c.quantity.kind in ("open_lower", "open_upper") for c in numeric_cells)
    has_missing = any(c.origin == ABSENT for c in table.cells)

    part_of_whole = False
    if len(schema.column_labels) == 1:
        col_cells = [c for c in numeric_cells if c.col == 0]
        if len(col_cells) == len(schema.row_labels) and all(
            c.quantity.kind == EXACT and c.quantity.unit.kind == "percent" for c in col_cells
        ):
            total = sum(c.quantity.value for c in col_cells)
            part_of_whole = thresholds.part_of_whole_lo <= total <= thresholds.part_of_whole_hi

    return TableProfile(
        row_axis_kind="temporal" if temporal else "categorical",
        series_count=len(schema.column_labels),
        numeric_row_count=len(numeric_rows),
        part_of_whole=part_of_whole,
        has_open_range=has_open_range,
        has_missing=has_missing,
    )


def rule_recommend(
    profile: TableProfile,
    table: AnnotatedTable,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> ChartChoice:
    """Total priority chain: line > pie > scatter > bar.

    Temporal or categorical identifiers always land on the x axis; the
    quantitative series on y.
    """
    series = tuple(table.schema.column_labels)
    if profile.row_axis_kind == "temporal" and profile.numeric_row_count >= thresholds.min_temporal_rows:
        return ChartChoice(LINE, ROWS_BINDING, series, RULE)
    if (
        profile.part_of_whole
        and profile.numeric_row_count <= thresholds.max_pie_slices
        and not profile.has_open_range
    ):
        return ChartChoice(PIE, ROWS_BINDING, series, RULE)
    if (
        profile.row_axis_kind != "temporal"
        and profile.series_count >= 2
        and profile.numeric_row_count >= thresholds.min_scatter_rows
    ):
        return ChartChoice(SCATTER, ROWS_BINDING, series, RULE)
    return ChartChoice(BAR, ROWS_BINDING, series, RULE)


def is_valid_choice(
    choice: ChartChoice,
    profile: TableProfile,
    table: AnnotatedTable,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> bool:
    """Validity predicates a choice must pass regardless of who produced it."""
    if choice.chart_type not in CHART_TYPES:
        return False
    if choice.x_binding != ROWS_BINDING:
        return False
    known = set(table.schema.column_labels)
    if not choice.y_binding or not set(choice.y_binding) <= known:
        return False
    if choice.chart_type == PIE:
        if not profile.part_of_whole or profile.has_open_range:
            return False
        if profile.numeric_row_count > thresholds.max_pie_slices:
            return False
        if len(choice.y_binding) != 1:
            return False
    if choice.chart_type == LINE and profile.row_axis_kind != "temporal":
        return False
    if choice.chart_type == SCATTER and profile.series_count < 2:
        return False
    return True


def reconcile(
    llm_choice: ChartChoice | None,
    rule_choice: ChartChoice,
    profile: TableProfile,
    table: AnnotatedTable,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> ChartChoice:
    """Accept the backend suggestion only when guideline-compliant; else fall back."""
    if llm_choice is not None and is_valid_choice(llm_choice, profile, table, thresholds):
        provenance = LLM if llm_choice.chart_type == rule_choice.chart_type else RECONCILED
        return ChartChoice(llm_choice.chart_type, llm_choice.x_binding, llm_choice.y_binding, provenance)
    return ChartChoice(rule_choice.chart_type, rule_choice.x_binding, rule_choice.y_binding, RULE)


def choice_to_json(choice: ChartChoice) -> dict:
    return {
        "chart_type": choice.chart_type,
        "x_binding": choice.x_binding,
        "y_binding": list(choice.y_binding),
        "provenance": choice.provenance,
    }


def choice_from_json(d: dict) -> ChartChoice:
    return ChartChoice(d["chart_type"], d["x_binding"], tuple(d["y_binding"]), d.get("provenance", RULE))
