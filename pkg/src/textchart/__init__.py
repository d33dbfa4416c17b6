"""textchart: turn data-involved text into annotated tables and augmented charts.

The pipeline has two halves: tabular data inference (key-message extraction,
topic clustering, schema creation, quote-grounded population and value
inference through a pluggable completion backend) and expressive chart
generation (rule-based chart recommendation plus SVG rendering with
uncertainty, range, missing-value and sentiment encodings).
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguousPhrase,
    ArityMismatch,
    BackendFailure,
    ContractViolation,
    DegenerateSchema,
    DuplicateRowLabel,
    EmptyExtraction,
    EmptyStatement,
    GroundingFailure,
    InvalidBinding,
    NoDataError,
    SchemaViolation,
    StageError,
    TextchartError,
    UnparsableNumber,
)
from .quantity import (
    Modifier,
    ParsedQuantity,
    Unit,
    apply_comparative,
    canonical_phrase,
    normalize_number,
    parse_quantity,
)
from .table import (
    AnnotatedTable,
    Cell,
    Quote,
    TableSchema,
    augment_rows,
    from_json,
    to_json,
    validate,
)

__all__ = [
    "AmbiguousPhrase",
    "AnnotatedTable",
    "ArityMismatch",
    "BackendFailure",
    "Cell",
    "ContractViolation",
    "DegenerateSchema",
    "DuplicateRowLabel",
    "EmptyExtraction",
    "EmptyStatement",
    "GroundingFailure",
    "InvalidBinding",
    "Modifier",
    "NoDataError",
    "ParsedQuantity",
    "Quote",
    "SchemaViolation",
    "StageError",
    "TableSchema",
    "TextchartError",
    "Unit",
    "UnparsableNumber",
    "apply_comparative",
    "augment_rows",
    "canonical_phrase",
    "from_json",
    "normalize_number",
    "parse_quantity",
    "to_json",
    "validate",
]
