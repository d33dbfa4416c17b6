"""Annotated-table data model.

Tables carry everything the inference stages learn about each cell: quote
provenance (byte offsets into the source context), a typed quantity with
optional range bounds, the cell's origin (quoted / inferred / computed /
absent) and an integer uncertainty score 0-100. The grid is dense: missing
cells are present with origin "absent" so the renderer can encode them.

All values are immutable; operations return new tables.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass, field, replace

import jsonschema

from .errors import ArityMismatch, DuplicateRowLabel, SchemaViolation
from .quantity import (
    ParsedQuantity,
    is_directly_convertible,
    parse_quantity,
    quantity_from_json,
    quantity_to_json,
)
from .errors import AmbiguousPhrase, UnparsableNumber

QUOTED = "quoted"
INFERRED = "inferred"
COMPUTED = "computed"
ABSENT = "absent"

ORIGINS = (QUOTED, INFERRED, COMPUTED, ABSENT)

SCHEMA_FILENAME = "annotated_table.schema.json"


@dataclass(frozen=True)
class TableSchema:
    """Header row (column labels) plus row identifiers."""

    topic_id: str
    column_labels: tuple[str, ...]
    row_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        if not self.column_labels:
            raise ValueError("column_labels must be nonempty")
        if len(set(self.column_labels)) != len(self.column_labels):
            raise ValueError("column_labels must be pairwise distinct")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("row_labels must be pairwise distinct")


@dataclass(frozen=True)
class Quote:
    """Verbatim span of the source context backing a cell."""

    source_offset: int
    length: int
    verbatim: str


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    origin: str = ABSENT
    quote: Quote | None = None
    quantity: ParsedQuantity | None = None
    uncertainty: int = 0

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")


@dataclass(frozen=True)
class AnnotatedTable:
    """Dense grid of cells over a schema, with augmented-row bookkeeping."""

    schema: TableSchema
    cells: tuple[Cell, ...]
    augmented_rows: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "augmented_rows", frozenset(self.augmented_rows))

    def cell(self, row: int, col: int) -> Cell:
        return self.cells[row * len(self.schema.column_labels) + col]

    def rows(self) -> range:
        return range(len(self.schema.row_labels))

    def cols(self) -> range:
        return range(len(self.schema.column_labels))


def empty_table(schema: TableSchema) -> AnnotatedTable:
    """Dense all-absent grid for the given schema."""
    cells = tuple(
        Cell(r, c)
        for r in range(len(schema.row_labels))
        for c in range(len(schema.column_labels))
    )
    return AnnotatedTable(schema, cells)


def with_cells(table: AnnotatedTable, *cells: Cell) -> AnnotatedTable:
    """Return a new table with the given cells replacing their grid slots."""
    ncols = len(table.schema.column_labels)
    grid = list(table.cells)
    for cell in cells:
        if not (0 <= cell.row < len(table.schema.row_labels) and 0 <= cell.col < ncols):
            raise IndexError(f"cell ({cell.row}, {cell.col}) outside grid")
        grid[cell.row * ncols + cell.col] = cell
    return replace(table, cells=tuple(grid))


# --- validation -------------------------------------------------------------

QUOTE_MISMATCH = "quote_mismatch"
MISSING_QUOTE = "missing_quote"
UNCERTAINTY_RULE = "uncertainty_rule"
UNCERTAINTY_BOUNDS = "uncertainty_bounds"
ABSENT_QUANTITY = "absent_quantity"
GRID_SHAPE = "grid_shape"
AUGMENT_INDEX = "augment_index"


@dataclass(frozen=True)
class Violation:
    code: str
    row: int | None
    col: int | None
    message: str


def validate(table: AnnotatedTable, context: str | None = None) -> list[Violation]:
    """Collect every invariant violation; an empty list means valid.

    Quote-grounding checks (verbatim text equals context[offset:offset+length])
    run only when the source ``context`` is supplied.
    """
    out: list[Violation] = []
    nrows, ncols = len(table.schema.row_labels), len(table.schema.column_labels)
    if len(table.cells) != nrows * ncols:
        out.append(Violation(GRID_SHAPE, None, None,
                             f"expected {nrows * ncols} cells, found {len(table.cells)}"))
        return out
    for r in range(nrows):
        for c in range(ncols):
            cell = table.cell(r, c)
            if (cell.row, cell.col) != (r, c):
                out.append(Violation(GRID_SHAPE, r, c, "cell indexed at the wrong grid slot"))
    for bad in sorted(table.augmented_rows - set(range(nrows))):
        out.append(Violation(AUGMENT_INDEX, bad, None, "augmented row index outside the grid"))

    for cell in table.cells:
        r, c = cell.row, cell.col
        if not 0 <= cell.uncertainty <= 100:
            out.append(Violation(UNCERTAINTY_BOUNDS, r, c,
                                 f"uncertainty {cell.uncertainty} outside 0-100"))
        if cell.origin == QUOTED:
            if cell.quote is None:
                out.append(Violation(MISSING_QUOTE, r, c, "quoted cell without a quote"))
            else:
                if context is not None:
                    start = cell.quote.source_offset
                    extract = context[start:start + cell.quote.length]
                    if extract != cell.quote.verbatim:
                        out.append(Violation(
                            QUOTE_MISMATCH, r, c,
                            f"context[{start}:{start + cell.quote.length}] != quote verbatim"))
                if _directly_convertible_quote(cell.quote.verbatim) and cell.uncertainty != 0:
                    out.append(Violation(UNCERTAINTY_RULE, r, c,
                                         "directly convertible quote must have uncertainty 0"))
        elif cell.origin in (INFERRED, COMPUTED):
            if cell.uncertainty <= 0:
                out.append(Violation(UNCERTAINTY_RULE, r, c,
                                     f"{cell.origin} cell must have uncertainty > 0"))
        elif cell.origin == ABSENT:
            if cell.quantity is not None:
                out.append(Violation(ABSENT_QUANTITY, r, c, "absent cell carries a quantity"))
    return out


def _directly_convertible_quote(verbatim: str) -> bool:
    try:
        return is_directly_convertible(parse_quantity(verbatim))
    except (UnparsableNumber, AmbiguousPhrase):
        return False


# --- serialization ----------------------------------------------------------

def _load_published_schema() -> dict:
    ref = importlib.resources.files("textchart").joinpath("schemas", SCHEMA_FILENAME)
    return json.loads(ref.read_text(encoding="utf-8"))


_PUBLISHED_SCHEMA: dict | None = None


def published_schema() -> dict:
    global _PUBLISHED_SCHEMA
    if _PUBLISHED_SCHEMA is None:
        _PUBLISHED_SCHEMA = _load_published_schema()
    return _PUBLISHED_SCHEMA


def table_to_dict(table: AnnotatedTable) -> dict:
    cells = []
    for cell in table.cells:
        cells.append({
            "row": cell.row,
            "col": cell.col,
            "quote": None if cell.quote is None else {
                "offset": cell.quote.source_offset,
                "length": cell.quote.length,
                "verbatim": cell.quote.verbatim,
            },
            "quantity": None if cell.quantity is None else quantity_to_json(cell.quantity),
            "origin": cell.origin,
            "uncertainty": cell.uncertainty,
        })
    return {
        "schema": {
            "topic_id": table.schema.topic_id,
            "column_labels": list(table.schema.column_labels),
            "row_labels": list(table.schema.row_labels),
        },
        "cells": cells,
        "augmented_rows": sorted(table.augmented_rows),
    }


def to_json(table: AnnotatedTable) -> str:
    """Serialize to the published JSON format (stable field order)."""
    return json.dumps(table_to_dict(table), indent=2, ensure_ascii=False)


def _pointer(error: jsonschema.ValidationError) -> str:
    path = list(error.absolute_path)
    if error.validator == "required":
        # Point at the missing property, not its parent object.
        missing = str(error.message).split("'")
        if len(missing) >= 2:
            path.append(missing[1])
    return "/" + "/".join(str(p) for p in path)


def table_from_dict(doc: dict) -> AnnotatedTable:
    validator = jsonschema.Draft202012Validator(published_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaViolation(_pointer(errors[0]), errors[0].message)

    schema = TableSchema(
        topic_id=doc["schema"]["topic_id"],
        column_labels=tuple(doc["schema"]["column_labels"]),
        row_labels=tuple(doc["schema"]["row_labels"]),
    )
    nrows, ncols = len(schema.row_labels), len(schema.column_labels)
    if len(doc["cells"]) != nrows * ncols:
        raise SchemaViolation("/cells", f"expected {nrows * ncols} cells for the schema grid")
    cells: list[Cell | None] = [None] * (nrows * ncols)
    for i, cd in enumerate(doc["cells"]):
        r, c = cd["row"], cd["col"]
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise SchemaViolation(f"/cells/{i}", "cell indices outside the schema grid")
        quote = None
        if cd.get("quote") is not None:
            q = cd["quote"]
            quote = Quote(q["offset"], q["length"], q["verbatim"])
        quantity = None
        if cd.get("quantity") is not None:
            try:
                quantity = quantity_from_json(cd["quantity"])
            except ValueError as exc:
                raise SchemaViolation(f"/cells/{i}/quantity", str(exc))
        try:
            cell = Cell(r, c, cd["origin"], quote, quantity, cd["uncertainty"])
        except ValueError as exc:
            raise SchemaViolation(f"/cells/{i}", str(exc))
        slot = r * ncols + c
        if cells[slot] is not None:
            raise SchemaViolation(f"/cells/{i}", f"duplicate cell for ({r}, {c})")
        cells[slot] = cell
    augmented = frozenset(doc.get("augmented_rows", []))
    if not augmented <= set(range(nrows)):
        raise SchemaViolation("/augmented_rows", "augmented row index outside the grid")
    try:
        schema_obj = schema
        return AnnotatedTable(schema_obj, tuple(c for c in cells if c is not None), augmented)
    except ValueError as exc:
        raise SchemaViolation("/", str(exc))


def from_json(text: str) -> AnnotatedTable:
    """Parse the published JSON format; raises SchemaViolation with a JSON pointer."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise SchemaViolation("/", "document root must be an object")
    return table_from_dict(doc)


# --- row augmentation ---------------------------------------------------------

def augment_rows(table: AnnotatedTable, new_rows: list[tuple[str, list[Cell]]]) -> AnnotatedTable:
    """Append rows discovered during inference; indices land in augmented_rows.

    Cells are re-indexed onto the appended row, so callers may pass cells with
    placeholder row/col values. The original table is untouched.
    """
    if not new_rows:
        return table
    labels = list(table.schema.row_labels)
    ncols = len(table.schema.column_labels)
    cells = list(table.cells)
    added: set[int] = set()
    for label, row_cells in new_rows:
        if label in labels:
            raise DuplicateRowLabel(label)
        if len(row_cells) != ncols:
            raise ArityMismatch(f"row {label!r} has {len(row_cells)} cells, expected {ncols}")
        r = len(labels)
        labels.append(label)
        added.add(r)
        cells.extend(replace(cell, row=r, col=c) for c, cell in enumerate(row_cells))
    schema = replace(table.schema, row_labels=tuple(labels))
    return AnnotatedTable(schema, tuple(cells), table.augmented_rows | added)
