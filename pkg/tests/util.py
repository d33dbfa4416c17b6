"""Shared builders for tests: quick tables, seeded random tables and
(context, table) pairs with known-good grounding."""

from __future__ import annotations

import random

from textchart import quantity as Q
from textchart import table as T


def cell_for(row: int, col: int, value=None, *, origin=T.QUOTED, quote=None,
             quantity=None, uncertainty=0) -> T.Cell:
    if quantity is None and value is not None:
        quantity = Q.exact(value, Q.PERCENT)
    return T.Cell(row, col, origin, quote, quantity, uncertainty)


def grid_table(topic_id: str, columns, rows, values, *, unit=Q.PERCENT,
               uncertainties=None, origins=None) -> T.AnnotatedTable:
    """Dense table from a values matrix; None entries stay absent."""
    schema = T.TableSchema(topic_id, tuple(columns), tuple(rows))
    table = T.empty_table(schema)
    cells = []
    for r, row_vals in enumerate(values):
        for c, v in enumerate(row_vals):
            if v is None:
                continue
            u = uncertainties[r][c] if uncertainties else 0
            origin = origins[r][c] if origins else T.QUOTED
            q = v if isinstance(v, Q.ParsedQuantity) else Q.exact(float(v), unit)
            quote = None
            if origin == T.QUOTED:
                verbatim = Q.canonical_phrase(q)
                quote = T.Quote(0, len(verbatim), verbatim)
                if not Q.is_directly_convertible(q):
                    u = max(u, 10)
            cells.append(T.Cell(r, c, origin, quote, q, u))
    return T.with_cells(table, *cells)


_WORDS = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
          "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi")


def random_quantity(rng: random.Random) -> Q.ParsedQuantity:
    unit = rng.choice([Q.PERCENT, Q.COUNT, Q.UNITLESS, Q.currency("USD")])
    if unit == Q.COUNT:
        a, b = sorted((float(rng.randrange(0, 100000)), float(rng.randrange(0, 100000))))
    elif unit == Q.UNITLESS:
        a, b = sorted((rng.uniform(0.001, 999.0) + 0.0001, rng.uniform(0.001, 999.0) + 0.0002))
    else:
        a, b = sorted((round(rng.uniform(0, 100), 3), round(rng.uniform(0, 100), 3)))
    kind = rng.choice([Q.EXACT, Q.EXACT, Q.CLOSED_RANGE, Q.OPEN_LOWER, Q.OPEN_UPPER])
    modifier = Q.APPROXIMATE if rng.random() < 0.2 else Q.NO_MODIFIER
    if rng.random() < 0.1:
        modifier = (Q.comparative_factor(rng.randrange(2, 5))
                    if rng.random() < 0.5 else Q.comparative_delta(rng.choice([-1, 1]) * rng.randrange(1, 30)))
    if kind == Q.EXACT:
        return Q.exact(a, unit, modifier)
    if kind == Q.CLOSED_RANGE:
        return Q.closed_range(a, b, unit, modifier)
    if kind == Q.OPEN_LOWER:
        return Q.open_lower(a, unit, modifier)
    return Q.open_upper(b, unit, modifier)


def random_table(rng: random.Random) -> T.AnnotatedTable:
    """Random valid table for serialization properties (quotes not grounded)."""
    ncols = rng.randrange(1, 5)
    nrows = rng.randrange(1, 6)
    columns = rng.sample(_WORDS, ncols)
    rows = [f"{w}-{i}" for i, w in enumerate(rng.sample(_WORDS, nrows))]
    schema = T.TableSchema(f"topic-{rng.randrange(10**6)}", tuple(columns), tuple(rows))
    cells = []
    for r in range(nrows):
        for c in range(ncols):
            origin = rng.choice([T.QUOTED, T.INFERRED, T.COMPUTED, T.ABSENT])
            if origin == T.ABSENT:
                cells.append(T.Cell(r, c))
                continue
            quantity = random_quantity(rng)
            if origin == T.QUOTED:
                verbatim = Q.canonical_phrase(quantity)
                quote = T.Quote(rng.randrange(0, 5000), len(verbatim), verbatim)
                uncertainty = rng.choice([0, 10, 20, 35])
            else:
                quote = None
                uncertainty = rng.randrange(1, 101)
            cells.append(T.Cell(r, c, origin, quote, quantity, uncertainty))
    n_aug = rng.randrange(0, nrows + 1)
    augmented = frozenset(rng.sample(range(nrows), n_aug))
    return T.AnnotatedTable(schema, tuple(cells), augmented)


def grounded_pair(rng: random.Random) -> tuple[str, T.AnnotatedTable]:
    """A (context, table) pair whose quoted cells all ground offset-exactly."""
    ncols = rng.randrange(1, 4)
    nrows = rng.randrange(1, 5)
    columns = rng.sample(_WORDS, ncols)
    rows = [f"{w}-{i}" for i, w in enumerate(rng.sample(_WORDS, nrows))]
    schema = T.TableSchema(f"topic-{rng.randrange(10**6)}", tuple(columns), tuple(rows))

    parts: list[str] = []
    pos = 0
    cells = []
    for r in range(nrows):
        for c in range(ncols):
            if rng.random() < 0.25:
                cells.append(T.Cell(r, c))
                continue
            value = rng.randrange(0, 10000)
            verbatim = f"{value} units" if rng.random() < 0.5 else f"{value}%"
            lead = f"For {rows[r]} the {columns[c]} reading was "
            parts.append(lead)
            pos += len(lead)
            offset = pos
            parts.append(verbatim)
            pos += len(verbatim)
            parts.append(". ")
            pos += 2
            quote = T.Quote(offset, len(verbatim), verbatim)
            cells.append(T.Cell(r, c, T.QUOTED, quote, Q.exact(float(value)), 0))
    context = "".join(parts)
    return context, T.with_cells(T.empty_table(schema), *cells)
