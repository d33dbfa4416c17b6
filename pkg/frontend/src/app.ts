// Application wiring: load a document, select a statement, run the pipeline,
// explore the charts. Selection state keeps one active run; earlier runs stay
// in the history panel.

import { ApiClient } from "./api";
import { DocumentView } from "./document_view";
import { ChartPanel, ChartData } from "./panel";
import type { RunRecord, Span } from "./types";

interface HistoryEntry {
  runId: string;
  excerpt: string;
}

export class App {
  private api: ApiClient;
  private view: DocumentView;
  private panel: ChartPanel;
  private statusEl: HTMLElement;
  private historyEl: HTMLElement;
  private documentId: string | null = null;
  private activeRunId: string | null = null;
  private history: HistoryEntry[] = [];
  private granularity: "fine" | "both" = "both";

  constructor(root: Document, baseUrl = "") {
    this.api = new ApiClient(baseUrl);
    const readingEl = root.getElementById("reading")!;
    const panelEl = root.getElementById("panel")!;
    this.statusEl = root.getElementById("status")!;
    this.historyEl = root.getElementById("history")!;
    this.view = new DocumentView(readingEl);
    this.panel = new ChartPanel(panelEl, {
      onQuoteHover: (quote) => {
        this.view.setHighlight("quote", quote ? { offset: quote.offset, length: quote.length } : null);
        if (quote) this.view.scrollToHighlight("quote");
      },
    });
    this.panel.showMessage("Select a statement in the document to chart it.");

    readingEl.addEventListener("mouseup", () => void this.onSelection());
    const loadButton = root.getElementById("load-document");
    const input = root.getElementById("document-input") as HTMLTextAreaElement | null;
    if (loadButton && input) {
      loadButton.addEventListener("click", () => void this.loadDocument(input.value));
    }
  }

  async loadDocument(body: string, title = ""): Promise<void> {
    if (!body.trim()) {
      this.setStatus("Paste a document first.", "hint");
      return;
    }
    try {
      const { id } = await this.api.uploadDocument(body, title);
      this.documentId = id;
      this.view.setText(body);
      this.panel.showMessage("Select a statement in the document to chart it.");
      this.setStatus("Document loaded. Select a statement to visualize.", "ok");
    } catch (err) {
      this.setStatus(`Upload failed: ${(err as Error).message}`, "error");
    }
  }

  private async onSelection(): Promise<void> {
    const span = this.view.selectionSpan();
    if (!span) {
      this.setStatus("Select a full statement (drag across the text) to chart it.", "hint");
      return;
    }
    await this.runForSpan(span);
  }

  async runForSpan(span: Span): Promise<RunRecord | null> {
    if (!this.documentId) {
      this.setStatus("Load a document before selecting.", "hint");
      return null;
    }
    this.view.setHighlight("selection", span);
    this.setStatus("Running…", "busy");
    let runId: string;
    try {
      const res = await this.api.startRun(this.documentId, { span }, {
        granularity: this.granularity,
      });
      runId = res.run_id;
    } catch (err) {
      this.setStatus(`Request rejected: ${(err as Error).message}`, "error");
      return null;
    }
    if (this.activeRunId) {
      this.history.push({
        runId: this.activeRunId,
        excerpt: this.view.highlightedText("selection") ?? "",
      });
      this.renderHistory();
    }
    this.activeRunId = runId;
    const record = await this.api.pollRun(runId, 1000, (r) => {
      this.setStatus(`Run ${r.status}…`, "busy");
    });
    if (record.status === "failed" && record.error) {
      this.panel.showError(record.error);
      this.setStatus(`Run failed at ${record.error.stage}.`, "error");
      return record;
    }
    await this.showRunOutputs(record);
    this.setStatus("Done.", "ok");
    return record;
  }

  async showRunOutputs(record: RunRecord): Promise<void> {
    if (!record.outputs) return;
    const charts: ChartData[] = [];
    for (let k = 0; k < record.outputs.charts.length; k++) {
      const path = record.outputs.charts[k];
      const granularity = path.includes("/") ? path.split("/")[0] : "fine";
      const [table, svg] = await Promise.all([
        this.api.fetchTable(record.id, k),
        this.api.fetchChartSvg(record.id, k),
      ]);
      charts.push({ granularity, table, svg });
    }
    this.panel.showCharts(charts);
  }

  private renderHistory(): void {
    this.historyEl.textContent = "";
    for (const entry of [...this.history].reverse()) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = entry.excerpt ? `“${entry.excerpt.slice(0, 60)}…”` : "(earlier run)";
      link.addEventListener("click", (event) => {
        event.preventDefault();
        void this.reopenRun(entry.runId);
      });
      item.appendChild(link);
      this.historyEl.appendChild(item);
    }
  }

  private async reopenRun(runId: string): Promise<void> {
    try {
      const record = await this.api.getRun(runId);
      if (record.status === "done") {
        await this.showRunOutputs(record);
        this.setStatus("Showing an earlier run.", "ok");
      } else if (record.error) {
        this.panel.showError(record.error);
      }
    } catch (err) {
      this.setStatus(`Could not reopen run: ${(err as Error).message}`, "error");
    }
  }

  private setStatus(text: string, kind: "ok" | "busy" | "error" | "hint"): void {
    this.statusEl.textContent = text;
    this.statusEl.className = `status status-${kind}`;
  }
}

declare global {
  interface Window {
    textchartApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("reading")) {
  window.textchartApp = new App(document, "");
}
