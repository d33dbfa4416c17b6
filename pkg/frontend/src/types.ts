// Wire types mirroring the service's JSON formats.

export interface Quote {
  offset: number;
  length: number;
  verbatim: string;
}

export interface Quantity {
  kind: "exact" | "closed_range" | "open_lower" | "open_upper";
  value: number;
  lo: number | null;
  hi: number | null;
  unit: string;
  modifier: { tag: string; payload?: number | null; payload_kind?: string | null } | null;
}

export type Origin = "quoted" | "inferred" | "computed" | "absent";

export interface Cell {
  row: number;
  col: number;
  quote: Quote | null;
  quantity: Quantity | null;
  origin: Origin;
  uncertainty: number;
}

export interface AnnotatedTable {
  schema: { topic_id: string; column_labels: string[]; row_labels: string[] };
  cells: Cell[];
  augmented_rows: number[];
}

export interface RunError {
  stage: string;
  message: string;
  exit_code?: number;
}

export interface RunOutputs {
  tables: string[];
  specs: string[];
  charts: string[];
  trace: string;
}

export type RunStatus = "pending" | "running" | "done" | "failed";

export interface RunRecord {
  id: string;
  document_id: string;
  statement_span: { offset: number; length: number } | null;
  statement_text: string | null;
  options: { granularity: string };
  status: RunStatus;
  outputs: RunOutputs | null;
  error: RunError | null;
}

export interface DocumentRecord {
  id: string;
  title: string;
  body: string;
  created_at: string;
  content_hash: string;
}

export interface Span {
  offset: number;
  length: number;
}
