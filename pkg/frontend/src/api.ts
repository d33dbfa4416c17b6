// REST client for the textchart service. No direct LLM access: everything
// goes through the documents/runs endpoints.

import type { AnnotatedTable, DocumentRecord, RunRecord, Span } from "./types";

export interface RunRequestOptions {
  granularity: "fine" | "coarse" | "both";
  backend?: { kind: "mock" | "live"; fixture_dir?: string };
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      // keep statusText
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  async uploadDocument(body: string, title = ""): Promise<{ id: string }> {
    const response = await fetch(this.url("/documents"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ body, title }),
    });
    return asJson(response);
  }

  async getDocument(id: string): Promise<DocumentRecord> {
    return asJson(await fetch(this.url(`/documents/${id}`)));
  }

  async startRun(
    documentId: string,
    statement: { span: Span } | { text: string },
    options: RunRequestOptions,
  ): Promise<{ run_id: string }> {
    const payload: Record<string, unknown> = { options };
    if ("span" in statement) {
      payload.statement_span = { offset: statement.span.offset, length: statement.span.length };
    } else {
      payload.statement_text = statement.text;
    }
    const response = await fetch(this.url(`/documents/${documentId}/runs`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return asJson(response);
  }

  async getRun(runId: string): Promise<RunRecord> {
    return asJson(await fetch(this.url(`/runs/${runId}`)));
  }

  /** Poll every `intervalMs` (1 s by default) until the run settles. */
  pollRun(
    runId: string,
    intervalMs = 1000,
    onUpdate?: (record: RunRecord) => void,
  ): Promise<RunRecord> {
    return new Promise((resolve, reject) => {
      const tick = async () => {
        let record: RunRecord;
        try {
          record = await this.getRun(runId);
        } catch (err) {
          clearInterval(timer);
          reject(err);
          return;
        }
        if (onUpdate) onUpdate(record);
        if (record.status === "done" || record.status === "failed") {
          clearInterval(timer);
          resolve(record);
        }
      };
      const timer = setInterval(tick, intervalMs);
      void tick();
    });
  }

  async fetchTable(runId: string, k: number): Promise<AnnotatedTable> {
    return asJson(await fetch(this.url(`/runs/${runId}/tables/${k}.json`)));
  }

  async fetchChartSvg(runId: string, k: number): Promise<string> {
    const response = await fetch(this.url(`/runs/${runId}/charts/${k}.svg`));
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }
}
