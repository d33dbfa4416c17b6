"""Pipeline orchestration: statement -> topics -> schema -> grounded table ->
inferred values -> sentiment -> chart suggestion, with a replayable trace.

Every stage demands structured JSON from the completion backend, validates it
(contract first, then stage semantics such as quote grounding), retries a
bounded number of times and records the exchange in the trace. Quotes must be
exact substrings of the source context at recorded offsets; fabricated quotes
never survive into a table. With the mock backend the whole run is a pure
function of (statement, context, fixture pack, options).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from . import prompts as P
from . import quantity as Q
from . import recommend as R
from . import render as V
from . import table as T
from .backend import ResponseContractError, parse_structured
from .errors import (
    AmbiguousPhrase,
    BackendFailure,
    ContractViolation,
    DegenerateSchema,
    EmptyExtraction,
    EmptyStatement,
    GroundingFailure,
    InvalidBinding,
    NoDataError,
    StageError,
    TextchartError,
    UnparsableNumber,
)

FINE = P.FINE
COARSE = P.COARSE


@dataclass(frozen=True)
class SourceSpan:
    source: str  # statement | context
    offset: int
    length: int


@dataclass(frozen=True)
class KeyMessage:
    text: str
    source_span: SourceSpan

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("key message text must be nonempty")


@dataclass(frozen=True)
class Topic:
    id: str
    granularity: str
    messages: tuple[KeyMessage, ...]
    title: str
    sentiment: str | None = None
    narrative: str | None = None
    linked_cells: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.messages:
            raise ValueError("topic requires at least one message")
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "linked_cells", tuple(tuple(c) for c in self.linked_cells))


@dataclass(frozen=True)
class UncertaintyDefaults:
    """Scores used when the backend omits them; higher = more uncertain."""

    direct: int = 0
    closed_range: int = 10
    open_range: int = 20
    approximate: int = 10
    inferred: int = 50
    computed_min: int = 1

    def for_quantity(self, q: Q.ParsedQuantity) -> int:
        if q.kind == Q.CLOSED_RANGE:
            base = self.closed_range
        elif q.kind in (Q.OPEN_LOWER, Q.OPEN_UPPER):
            base = self.open_range
        else:
            base = self.direct
        if q.modifier.tag == "approximate":
            base = max(base, self.approximate)
        return base


@dataclass(frozen=True)
class PipelineOptions:
    granularity: str = FINE  # fine | coarse | both
    max_retries: int = 3
    uncertainty: UncertaintyDefaults = field(default_factory=UncertaintyDefaults)
    thresholds: R.Thresholds = field(default_factory=R.Thresholds)
    decoding: tuple[tuple[str, float], ...] = (("temperature", 0.0),)

    def granularities(self) -> tuple[str, ...]:
        if self.granularity == "both":
            return (FINE, COARSE)
        if self.granularity in (FINE, COARSE):
            return (self.granularity,)
        raise ValueError(f"unknown granularity {self.granularity!r}")


@dataclass
class TraceEntry:
    stage: str
    prompt: str
    raw_response: str
    validation_outcome: str
    retry_count: int


@dataclass
class PipelineTrace:
    decoding: dict = field(default_factory=dict)
    pack_version: int = 0
    entries: list[TraceEntry] = field(default_factory=list)
    recommendations: list[dict] = field(default_factory=list)

    def record(self, stage: str, prompt: str, raw: str, outcome: str, retry_count: int) -> None:
        self.entries.append(TraceEntry(stage, prompt, raw, outcome, retry_count))

    def to_dict(self) -> dict:
        return {
            "decoding": self.decoding,
            "pack_version": self.pack_version,
            "entries": [
                {
                    "stage": e.stage,
                    "prompt": e.prompt,
                    "raw_response": e.raw_response,
                    "validation_outcome": e.validation_outcome,
                    "retry_count": e.retry_count,
                }
                for e in self.entries
            ],
            "recommendations": self.recommendations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        ).hexdigest()


class _RetryStage(Exception):
    """Stage-level semantic rejection; retried, then surfaced as ``terminal``."""

    def __init__(self, reason: str, terminal: type[Exception] = BackendFailure):
        super().__init__(reason)
        self.reason = reason
        self.terminal = terminal


def _call_stage(backend, stage: str, prompt: str, *, trace: PipelineTrace | None,
                max_retries: int, postprocess=None):
    contract = P.CONTRACTS[stage]
    last: Exception | None = None
    for attempt in range(max_retries):
        try:
            raw = backend.complete(prompt, contract)
        except BackendFailure as err:
            last = err
            if trace:
                trace.record(stage, prompt, "", f"backend_error: {err}", attempt)
            continue
        try:
            doc = parse_structured(raw, contract)
            result = postprocess(doc) if postprocess is not None else doc
        except ResponseContractError as err:
            last = err
            if trace:
                trace.record(stage, prompt, raw, f"contract: {err}", attempt)
            continue
        except _RetryStage as err:
            last = err
            if trace:
                trace.record(stage, prompt, raw, f"rejected: {err.reason}", attempt)
            continue
        if trace:
            trace.record(stage, prompt, raw, "ok", attempt)
        return result
    if isinstance(last, _RetryStage) and last.terminal is not BackendFailure:
        raise last.terminal(last.reason)
    raise BackendFailure(f"stage {stage} failed after {max_retries} attempts: {last}")


# --- context chunking -------------------------------------------------------

def _chunk_spans(context: str, budget: int) -> list[tuple[int, int]]:
    """Split the context into [start, end) spans on paragraph boundaries."""
    if budget <= 0:
        budget = 1
    if len(context) <= budget:
        return [(0, len(context))]
    boundaries = []
    i = context.find("\n\n")
    while i != -1:
        boundaries.append(i + 2)
        i = context.find("\n\n", i + 2)
    boundaries.append(len(context))
    # Greedy packing over paragraph spans; oversized paragraphs hard-split.
    spans: list[tuple[int, int]] = []
    start = 0
    prev_boundary = 0
    for b in boundaries:
        if b - start > budget and prev_boundary > start:
            spans.append((start, prev_boundary))
            start = prev_boundary
        while b - start > budget:
            spans.append((start, start + budget))
            start = start + budget
        prev_boundary = b
    if start < len(context):
        spans.append((start, len(context)))
    return spans


def _context_chunks(backend, pack: P.PromptPack, stage_overhead: int, context: str) -> list[tuple[int, str]]:
    budget = backend.capabilities.max_input_chars - stage_overhead
    if budget <= 0 and context:
        raise BackendFailure(
            f"backend max_input_chars {backend.capabilities.max_input_chars} leaves "
            f"no room for the context after a {stage_overhead}-char prompt")
    return [(s, context[s:e]) for s, e in _chunk_spans(context, budget)]


# --- stages -------------------------------------------------------------------

def extract_key_messages(statement: str, context: str, backend, *,
                         pack: P.PromptPack | None = None,
                         trace: PipelineTrace | None = None,
                         max_retries: int = 3) -> list[KeyMessage]:
    """Extract atomic claims from the statement, each with a validated span."""
    if not statement.strip():
        raise EmptyStatement("statement is empty")
    pack = pack or P.load_pack()
    overhead = len(P.key_messages_prompt(pack, statement, ""))
    window = _statement_window(context, statement, backend.capabilities.max_input_chars - overhead)
    prompt = P.key_messages_prompt(pack, statement, window)

    def check(doc: dict) -> list[KeyMessage]:
        out = []
        for item in doc["messages"]:
            span = _find_span(item["quote"], statement, context)
            if span is None:
                raise _RetryStage(f"quote {item['quote']!r} not found in statement or context")
            out.append(KeyMessage(item["text"].strip(), span))
        return out

    messages = _call_stage(backend, "key_messages", prompt,
                           trace=trace, max_retries=max_retries, postprocess=check)
    if not messages:
        raise EmptyExtraction("no key messages extracted from the statement")
    return messages


def _statement_window(context: str, statement: str, budget: int) -> str:
    """The context, or the slice around the statement when it will not fit."""
    if len(context) <= budget:
        return context
    anchor = context.find(statement)
    if anchor == -1:
        anchor = 0
    half = max(0, (budget - len(statement)) // 2)
    start = max(0, anchor - half)
    end = min(len(context), anchor + len(statement) + half)
    return context[start:end]


def _find_span(quote: str, statement: str, context: str) -> SourceSpan | None:
    i = statement.find(quote)
    if i != -1:
        return SourceSpan("statement", i, len(quote))
    i = context.find(quote)
    if i != -1:
        return SourceSpan("context", i, len(quote))
    return None


def cluster_topics(messages: list[KeyMessage], granularity: str, backend, *,
                   pack: P.PromptPack | None = None,
                   trace: PipelineTrace | None = None,
                   max_retries: int = 3) -> list[Topic]:
    """Partition messages into topics at the given granularity."""
    if not messages:
        raise EmptyExtraction("cannot cluster an empty message list")
    if granularity not in (FINE, COARSE):
        raise ValueError(f"unknown granularity {granularity!r}")
    pack = pack or P.load_pack()
    prompt = P.topics_prompt(pack, [m.text for m in messages], granularity)

    def check(doc: dict) -> list[Topic]:
        seen: list[int] = []
        for t in doc["topics"]:
            seen.extend(t["message_indices"])
        if sorted(seen) != list(range(len(messages))):
            raise _RetryStage("topics must partition the message indices exactly")
        out = []
        for i, t in enumerate(doc["topics"]):
            out.append(Topic(
                id=f"{granularity}-{i}",
                granularity=granularity,
                messages=tuple(messages[j] for j in t["message_indices"]),
                title=t["title"].strip(),
            ))
        return out

    return _call_stage(backend, "topics", prompt,
                       trace=trace, max_retries=max_retries, postprocess=check)


def create_schema(topic: Topic, backend, *,
                  pack: P.PromptPack | None = None,
                  trace: PipelineTrace | None = None,
                  max_retries: int = 3) -> T.TableSchema:
    """Derive a header row and row identifiers for a topic."""
    pack = pack or P.load_pack()
    prompt = P.schema_prompt(pack, topic.title, [m.text for m in topic.messages])

    def check(doc: dict) -> T.TableSchema:
        columns, rows = doc["columns"], doc["rows"]
        if not columns:
            raise _RetryStage("schema requires at least one column label")
        if len(set(columns)) != len(columns) or len(set(rows)) != len(rows):
            raise _RetryStage("schema labels must be pairwise distinct")
        if not rows:
            raise _RetryStage("schema requires row identifiers", terminal=DegenerateSchema)
        return T.TableSchema(topic.id, tuple(columns), tuple(rows))

    return _call_stage(backend, "schema", prompt,
                       trace=trace, max_retries=max_retries, postprocess=check)


def populate_table(schema: T.TableSchema, context: str, backend, *,
                   pack: P.PromptPack | None = None,
                   trace: PipelineTrace | None = None,
                   max_retries: int = 3,
                   defaults: UncertaintyDefaults | None = None) -> T.AnnotatedTable:
    """Fill the schema with verbatim quotes from the context.

    Directly convertible quotes (an exact figure, no modifier) get their
    parsed quantity and uncertainty 0; other quotes stay pending for the
    inference stage; unsupported cells stay absent. A response quoting text
    not present in its chunk is rejected and retried, then surfaces as
    GroundingFailure: fabricated quotes cannot enter a table.
    """
    pack = pack or P.load_pack()
    defaults = defaults or UncertaintyDefaults()
    columns, rows = list(schema.column_labels), list(schema.row_labels)
    overhead = len(P.populate_prompt(pack, columns, rows, ""))
    chunks = _context_chunks(backend, pack, overhead, context)

    candidates: dict[tuple[int, int], T.Cell] = {}
    for base, chunk_text in chunks:
        prompt = P.populate_prompt(pack, columns, rows, chunk_text)

        def check(doc: dict, _base=base, _text=chunk_text) -> list[T.Cell]:
            cells = []
            for item in doc["cells"]:
                r, c = _label_indices(schema, item["row"], item["col"])
                local = _text.find(item["quote"])
                if local == -1:
                    raise _RetryStage(
                        f"quote {item['quote']!r} is not a substring of the context",
                        terminal=GroundingFailure)
                quote = T.Quote(_base + local, len(item["quote"]), item["quote"])
                quantity, uncertainty = None, 0
                try:
                    parsed = Q.parse_quantity(item["quote"])
                    if Q.is_directly_convertible(parsed):
                        quantity, uncertainty = parsed, defaults.direct
                except (UnparsableNumber, AmbiguousPhrase):
                    pass
                cells.append(T.Cell(r, c, T.QUOTED, quote, quantity, uncertainty))
            return cells

        for cell in _call_stage(backend, "populate", prompt,
                                trace=trace, max_retries=max_retries, postprocess=check):
            key = (cell.row, cell.col)
            prev = candidates.get(key)
            if prev is None or _merge_rank(cell) < _merge_rank(prev):
                candidates[key] = cell

    return T.with_cells(T.empty_table(schema), *candidates.values())


def _merge_rank(cell: T.Cell) -> tuple:
    offset = cell.quote.source_offset if cell.quote else 1 << 60
    return (cell.uncertainty, offset)


def _label_indices(schema: T.TableSchema, row: str, col: str) -> tuple[int, int]:
    try:
        return schema.row_labels.index(row), schema.column_labels.index(col)
    except ValueError:
        raise _RetryStage(f"unknown row/column label ({row!r}, {col!r})")


def validate_quotes(table: T.AnnotatedTable, context: str) -> list[T.Violation]:
    """Offset-exact grounding check for every quoted cell (pure)."""
    out = []
    for v in T.validate(table, context):
        if v.code in (T.QUOTE_MISMATCH, T.MISSING_QUOTE):
            out.append(v)
    return out


def infer_values(table: T.AnnotatedTable, context: str, backend, *,
                 pack: P.PromptPack | None = None,
                 trace: PipelineTrace | None = None,
                 max_retries: int = 3,
                 defaults: UncertaintyDefaults | None = None) -> T.AnnotatedTable:
    """Resolve pending quotes, infer missing cells, compute arithmetic
    relations and append context-supported rows.

    Settled cells are never altered. Backend scores outside 0-100, or point
    estimates contradicting a deterministic open bound (e.g. 7 for a quote
    reading "exceeded 8%"), raise ContractViolation.
    """
    if validate_quotes(table, context):
        raise GroundingFailure("table has ungrounded quotes; refusing to infer")
    pack = pack or P.load_pack()
    defaults = defaults or UncertaintyDefaults()
    schema = table.schema
    columns, rows = list(schema.column_labels), list(schema.row_labels)

    pending = []
    missing = []
    for cell in table.cells:
        ref = {"row": schema.row_labels[cell.row], "col": schema.column_labels[cell.col]}
        if cell.origin == T.QUOTED and cell.quantity is None and cell.quote is not None:
            pending.append({**ref, "quote": cell.quote.verbatim})
        elif cell.origin == T.ABSENT:
            missing.append(ref)

    overhead = len(P.infer_prompt(pack, columns, rows, pending, missing, ""))
    chunks = _context_chunks(backend, pack, overhead, context)

    resolved: dict[tuple[int, int], tuple[int, T.Cell]] = {}
    new_rows: dict[str, dict[int, T.Cell]] = {}
    new_row_order: list[str] = []

    for order, (base, chunk_text) in enumerate(chunks):
        prompt = P.infer_prompt(pack, columns, rows, pending, missing, chunk_text)

        def check(doc: dict, _base=base, _text=chunk_text):
            updates: list[tuple[tuple[int, int], T.Cell]] = []
            for item in doc["cells"]:
                r, c = _label_indices(schema, item["row"], item["col"])
                old = table.cell(r, c)
                if old.origin == T.QUOTED and old.quantity is not None:
                    continue  # settled: direct conversions are immutable
                if old.origin in (T.INFERRED, T.COMPUTED):
                    continue
                cell = _resolve_cell(table, r, c, old, item, _text, _base, defaults)
                if cell is not None:
                    updates.append(((r, c), cell))
            rows_out: list[tuple[str, list[T.Cell]]] = []
            for nr in doc["new_rows"]:
                label = nr["row"].strip()
                if not label or label in schema.row_labels:
                    raise _RetryStage(f"new row label {label!r} is empty or already present")
                row_cells: dict[int, T.Cell] = {}
                for item in nr["cells"]:
                    try:
                        c = schema.column_labels.index(item["col"])
                    except ValueError:
                        raise _RetryStage(f"unknown column {item['col']!r} in new row")
                    cell = _resolve_cell(table, 0, c, None, item, _text, _base, defaults)
                    if cell is not None:
                        row_cells[c] = cell
                if row_cells:
                    rows_out.append((label, [
                        row_cells.get(c, T.Cell(0, c)) for c in range(len(columns))
                    ]))
            return updates, rows_out

        updates, rows_out = _call_stage(backend, "infer", prompt,
                                        trace=trace, max_retries=max_retries,
                                        postprocess=check)
        for key, cell in updates:
            prev = resolved.get(key)
            # Lowest uncertainty wins; earliest chunk wins ties.
            if prev is None or cell.uncertainty < prev[1].uncertainty:
                resolved[key] = (order, cell)
        for label, cells in rows_out:
            if label not in new_rows:
                new_rows[label] = {i: c for i, c in enumerate(cells)}
                new_row_order.append(label)
            else:
                for i, c in enumerate(cells):
                    old = new_rows[label].get(i)
                    if old is None or (c.origin != T.ABSENT and c.uncertainty < old.uncertainty):
                        new_rows[label][i] = c

    out = T.with_cells(table, *(cell for _, cell in resolved.values()))
    if new_row_order:
        out = T.augment_rows(out, [
            (label, [new_rows[label][c] for c in range(len(columns))])
            for label in new_row_order
        ])
    return out


def _resolve_cell(table: T.AnnotatedTable, r: int, c: int, old: T.Cell | None,
                  item: dict, chunk_text: str, base: int,
                  defaults: UncertaintyDefaults) -> T.Cell | None:
    """Build the resolved cell for one backend resolution item."""
    quote = old.quote if old is not None and old.quote is not None else None
    if quote is None and item.get("quote"):
        local = chunk_text.find(item["quote"])
        if local == -1:
            raise _RetryStage(
                f"quote {item['quote']!r} is not a substring of the context",
                terminal=GroundingFailure)
        quote = T.Quote(base + local, len(item["quote"]), item["quote"])

    computed_from = item.get("computed_from")
    if computed_from:
        br, bc = _label_indices(table.schema, computed_from["row"], computed_from["col"])
        base_cell = table.cell(br, bc)
        if base_cell.quantity is None:
            raise _RetryStage("computed_from references a cell without a value")
        modifier = Q.Modifier("comparative", float(computed_from["payload"]),
                              computed_from["payload_kind"])
        value = Q.apply_comparative(base_cell.quantity.value, modifier)
        uncertainty = item.get("uncertainty")
        if uncertainty is None:
            uncertainty = max(base_cell.uncertainty, defaults.computed_min)
        _check_uncertainty(uncertainty)
        if uncertainty <= 0:
            raise ContractViolation("computed cells require uncertainty > 0")
        return T.Cell(r, c, T.COMPUTED, quote, Q.exact(value, base_cell.quantity.unit),
                      uncertainty)

    parsed: Q.ParsedQuantity | None = None
    if quote is not None:
        try:
            parsed = Q.parse_quantity(quote.verbatim)
        except (UnparsableNumber, AmbiguousPhrase):
            parsed = None

    if parsed is not None and Q.is_directly_convertible(parsed):
        # A verbatim figure (reachable via new rows or late-found quotes).
        return T.Cell(r, c, T.QUOTED, quote, parsed, defaults.direct)

    if parsed is not None:
        # Deterministic parse owns kind/bounds; backend may refine the point.
        q = parsed
        if item.get("value") is not None and q.kind != Q.CLOSED_RANGE:
            q = Q.with_value(q, float(item["value"]))
        _check_bounds(q)
        uncertainty = item.get("uncertainty")
        if uncertainty is None:
            uncertainty = defaults.for_quantity(q)
        _check_uncertainty(uncertainty)
        return T.Cell(r, c, T.QUOTED, quote, q, uncertainty)

    # No deterministic reading: the backend supplies the quantity.
    if item.get("value") is None and item.get("lo") is None and item.get("hi") is None:
        return None  # nothing to resolve; cell stays as it was
    kind = item.get("kind") or Q.EXACT
    unit = Q.unit_from_json(item["unit"]) if item.get("unit") else _default_unit(item, parsed)
    try:
        if kind == Q.EXACT:
            q = Q.exact(float(item["value"]), unit)
        elif kind == Q.CLOSED_RANGE:
            q = Q.closed_range(float(item["lo"]), float(item["hi"]), unit)
        elif kind == Q.OPEN_LOWER:
            q = Q.open_lower(float(item["lo"]), unit)
            if item.get("value") is not None:
                q = Q.with_value(q, float(item["value"]))
        else:
            q = Q.open_upper(float(item["hi"]), unit)
            if item.get("value") is not None:
                q = Q.with_value(q, float(item["value"]))
    except (TypeError, ValueError) as exc:
        raise _RetryStage(f"malformed quantity for ({item.get('row')}, {item['col']}): {exc}")
    _check_bounds(q)
    uncertainty = item.get("uncertainty")
    if uncertainty is None:
        uncertainty = defaults.inferred
    _check_uncertainty(uncertainty)
    origin = T.QUOTED if quote is not None else T.INFERRED
    if origin == T.INFERRED and uncertainty <= 0:
        raise ContractViolation("inferred cells require uncertainty > 0")
    return T.Cell(r, c, origin, quote, q, uncertainty)


def _default_unit(item: dict, parsed: Q.ParsedQuantity | None) -> Q.Unit:
    if parsed is not None:
        return parsed.unit
    value = item.get("value")
    if value is not None and float(value).is_integer():
        return Q.COUNT
    return Q.UNITLESS


def _check_uncertainty(u) -> None:
    if not isinstance(u, int) or isinstance(u, bool) or not 0 <= u <= 100:
        raise ContractViolation(f"uncertainty {u!r} outside the 0-100 integer scale")


def _check_bounds(q: Q.ParsedQuantity) -> None:
    if q.kind == Q.OPEN_LOWER and q.value < q.lo:
        raise ContractViolation(
            f"point estimate {q.value} contradicts the open lower bound {q.lo}")
    if q.kind == Q.OPEN_UPPER and q.value > q.hi:
        raise ContractViolation(
            f"point estimate {q.value} contradicts the open upper bound {q.hi}")


def classify_sentiment(topic: Topic, table: T.AnnotatedTable, backend, *,
                       pack: P.PromptPack | None = None,
                       trace: PipelineTrace | None = None,
                       max_retries: int = 3) -> Topic:
    """Classify topic sentiment, generate the narrative, link data points."""
    pack = pack or P.load_pack()
    schema = table.schema
    prompt = P.sentiment_prompt(pack, topic.title, [m.text for m in topic.messages],
                                list(schema.column_labels), list(schema.row_labels))

    def check(doc: dict) -> Topic:
        linked = []
        for ref in doc.get("linked_cells", []):
            linked.append(_label_indices(schema, ref["row"], ref["col"]))
        return replace(topic, sentiment=doc["sentiment"],
                       narrative=doc["narrative"].strip(),
                       linked_cells=tuple(linked))

    return _call_stage(backend, "sentiment", prompt,
                       trace=trace, max_retries=max_retries, postprocess=check)


def suggest_chart(table: T.AnnotatedTable, backend, *,
                  pack: P.PromptPack | None = None,
                  trace: PipelineTrace | None = None,
                  max_retries: int = 3) -> R.ChartChoice:
    """Ask the backend for a chart choice; bindings must reference the schema."""
    pack = pack or P.load_pack()
    schema = table.schema
    summary_rows = {}
    for r, row_label in enumerate(schema.row_labels):
        summary_rows[row_label] = {
            schema.column_labels[c]: (
                None if table.cell(r, c).quantity is None else table.cell(r, c).quantity.value
            )
            for c in range(len(schema.column_labels))
        }
    summary = json.dumps(summary_rows, sort_keys=True, ensure_ascii=False)
    prompt = P.chart_prompt(pack, list(schema.column_labels), list(schema.row_labels), summary)
    doc = _call_stage(backend, "chart", prompt, trace=trace, max_retries=max_retries)
    choice = R.ChartChoice(doc["chart_type"], doc["x"], tuple(doc["y"]), R.LLM)
    if choice.x_binding != R.ROWS_BINDING or not set(choice.y_binding) <= set(schema.column_labels):
        raise InvalidBinding(
            f"chart bindings x={choice.x_binding!r} y={choice.y_binding!r} "
            "do not reference the schema")
    return choice


# --- full pipeline ------------------------------------------------------------

@dataclass
class TopicResult:
    topic: Topic
    table: T.AnnotatedTable
    profile: R.TableProfile
    choice: R.ChartChoice
    spec: V.ChartSpec


@dataclass
class PipelineResult:
    results: dict  # granularity -> list[TopicResult]
    trace: PipelineTrace

    def all_results(self) -> list[TopicResult]:
        out = []
        for granularity in sorted(self.results):
            out.extend(self.results[granularity])
        return out


def run_pipeline(statement: str, context: str, backend,
                 options: PipelineOptions | None = None,
                 *, pack: P.PromptPack | None = None) -> PipelineResult:
    """Execute every stage per topic; the trace records every exchange."""
    options = options or PipelineOptions()
    if not statement.strip():
        raise StageError("key_messages", EmptyStatement("statement is empty"))
    if not context.strip():
        raise StageError("key_messages", EmptyStatement("context is empty"))
    pack = pack or P.load_pack()
    trace = PipelineTrace(decoding=dict(options.decoding), pack_version=pack.version)
    retries = options.max_retries

    def stage(name: str, fn, *args, **kwargs):
        try:
            return fn(*args, pack=pack, trace=trace, max_retries=retries, **kwargs)
        except TextchartError as exc:
            raise StageError(name, exc) from exc

    messages = stage("key_messages", extract_key_messages, statement, context, backend)

    results: dict[str, list[TopicResult]] = {}
    for granularity in options.granularities():
        topics = stage("topics", cluster_topics, messages, granularity, backend)
        out: list[TopicResult] = []
        for topic in topics:
            schema = stage("schema", create_schema, topic, backend)
            quoted = stage("populate", populate_table, schema, context, backend,
                           defaults=options.uncertainty)
            failures = validate_quotes(quoted, context)
            if failures:
                raise StageError("populate", GroundingFailure(
                    f"{len(failures)} ungrounded quotes survived population"))
            full = stage("infer", infer_values, quoted, context, backend,
                         defaults=options.uncertainty)
            topic = stage("sentiment", classify_sentiment, topic, full, backend)
            try:
                profile = R.characterize(full, options.thresholds)
            except NoDataError as exc:
                raise StageError("recommend", exc) from exc
            rule_choice = R.rule_recommend(profile, full, options.thresholds)
            try:
                llm_choice = stage("chart", suggest_chart, full, backend)
            except StageError as exc:
                if isinstance(exc.cause, InvalidBinding):
                    llm_choice = None
                else:
                    raise
            choice = R.reconcile(llm_choice, rule_choice, profile, full, options.thresholds)
            trace.recommendations.append({
                "topic_id": topic.id,
                "granularity": granularity,
                "profile": {
                    "row_axis_kind": profile.row_axis_kind,
                    "series_count": profile.series_count,
                    "numeric_row_count": profile.numeric_row_count,
                    "part_of_whole": profile.part_of_whole,
                    "has_open_range": profile.has_open_range,
                    "has_missing": profile.has_missing,
                },
                "rule_choice": R.choice_to_json(rule_choice),
                "llm_choice": None if llm_choice is None else R.choice_to_json(llm_choice),
                "final": R.choice_to_json(choice),
            })
            try:
                spec = V.build_spec(full, choice, topic)
            except TextchartError as exc:
                raise StageError("render", exc) from exc
            out.append(TopicResult(topic, full, profile, choice, spec))
        results[granularity] = out
    return PipelineResult(results, trace)
