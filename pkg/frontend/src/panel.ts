// Chart panel: renders fetched SVGs with a legend for the special encodings,
// topic tabs, a fine/coarse toggle, and hover wiring from marks back to the
// source text via table provenance offsets.
//
// Invariant: the panel never invents numeric text. Every numeral it draws
// (tooltip values, uncertainty scores) is copied from the fetched table JSON;
// chrome (tabs, legend, status) is numeral-free.

import type { AnnotatedTable, Cell, Quote, RunError } from "./types";

export interface ChartData {
  granularity: string; // "fine" | "coarse"
  table: AnnotatedTable;
  svg: string;
}

export interface PanelHooks {
  onQuoteHover?: (quote: Quote | null) => void;
}

const ENCODING_LABELS: Record<string, string> = {
  uncertainty: "Gradient stripe — uncertainty score (longer stripe = more uncertain)",
  range: "Caps and arrows — value ranges (inward arrows: closed range; single arrow: open bound)",
  missing: "Dashed outline — value inferred rather than stated in the text",
  sentiment: "Colored note — the author's sentiment, linked to data points",
};

const TAB_NAMES = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

function formatNumber(value: number): string {
  // Render exactly as JSON does so every numeral exists in the table payload.
  return Number.isInteger(value) ? String(value) : String(value);
}

export class ChartPanel {
  private charts: ChartData[] = [];
  private granularity = "fine";
  private active = 0;
  private tooltip: HTMLElement;

  constructor(private root: HTMLElement, private hooks: PanelHooks = {}) {
    this.root.classList.add("chart-panel");
    this.tooltip = document.createElement("div");
    this.tooltip.className = "mark-tooltip";
    this.tooltip.hidden = true;
  }

  showMessage(text: string): void {
    this.charts = [];
    this.root.textContent = "";
    const p = document.createElement("p");
    p.className = "panel-message";
    p.textContent = text;
    this.root.appendChild(p);
  }

  showError(error: RunError): void {
    this.charts = [];
    this.root.textContent = "";
    const p = document.createElement("p");
    p.className = "panel-error";
    p.setAttribute("data-stage", error.stage);
    p.textContent = `Run failed at stage "${error.stage}": ${error.message}`;
    this.root.appendChild(p);
  }

  showCharts(charts: ChartData[]): void {
    this.charts = charts;
    const granularities = this.granularitiesPresent();
    if (!granularities.includes(this.granularity) && granularities.length > 0) {
      this.granularity = granularities[0];
    }
    this.active = 0;
    this.render();
  }

  setGranularity(granularity: string): void {
    this.granularity = granularity;
    this.active = 0;
    this.render();
  }

  activeCharts(): ChartData[] {
    return this.charts.filter((c) => c.granularity === this.granularity);
  }

  private granularitiesPresent(): string[] {
    return Array.from(new Set(this.charts.map((c) => c.granularity)));
  }

  private render(): void {
    this.root.textContent = "";
    const charts = this.activeCharts();
    if (charts.length === 0) {
      this.showMessage("No charts for this selection yet.");
      return;
    }

    const granularities = this.granularitiesPresent();
    if (granularities.length > 1) {
      const toggle = document.createElement("div");
      toggle.className = "granularity-toggle";
      for (const g of granularities) {
        const button = document.createElement("button");
        button.textContent = g;
        button.setAttribute("data-granularity", g);
        if (g === this.granularity) button.classList.add("active");
        button.addEventListener("click", () => this.setGranularity(g));
        toggle.appendChild(button);
      }
      this.root.appendChild(toggle);
    }

    if (charts.length > 1) {
      const tabs = document.createElement("div");
      tabs.className = "topic-tabs";
      charts.forEach((_, i) => {
        const tab = document.createElement("button");
        tab.textContent = `Topic ${TAB_NAMES[i % TAB_NAMES.length]}`;
        if (i === this.active) tab.classList.add("active");
        tab.addEventListener("click", () => {
          this.active = i;
          this.render();
        });
        tabs.appendChild(tab);
      });
      this.root.appendChild(tabs);
    }

    const chart = charts[this.active];
    const host = document.createElement("div");
    host.className = "chart-host";
    host.innerHTML = chart.svg;
    this.root.appendChild(host);
    this.root.appendChild(this.tooltip);
    this.wireMarks(host, chart.table);
    this.renderLegend(host);
  }

  private renderLegend(host: HTMLElement): void {
    const present = new Set<string>();
    host.querySelectorAll("[data-encoding]").forEach((el) => {
      const name = el.getAttribute("data-encoding");
      if (name) present.add(name);
    });
    const legend = document.createElement("ul");
    legend.className = "encoding-legend";
    if (present.size === 0) {
      legend.hidden = true; // nothing special on this chart: collapse
      this.root.appendChild(legend);
      return;
    }
    for (const name of Object.keys(ENCODING_LABELS)) {
      if (!present.has(name)) continue;
      const item = document.createElement("li");
      item.setAttribute("data-legend", name);
      item.textContent = ENCODING_LABELS[name];
      legend.appendChild(item);
    }
    this.root.appendChild(legend);
  }

  private cellAt(table: AnnotatedTable, row: number, col: number): Cell | undefined {
    return table.cells.find((c) => c.row === row && c.col === col);
  }

  private markGroups(host: HTMLElement): Element[] {
    return Array.from(host.querySelectorAll("g[data-cell]")).filter(
      (g) => !g.hasAttribute("data-encoding"),
    );
  }

  private wireMarks(host: HTMLElement, table: AnnotatedTable): void {
    for (const group of this.markGroups(host)) {
      const ref = group.getAttribute("data-cell") ?? "";
      const [rowStr, colStr] = ref.split(":");
      const cell = this.cellAt(table, Number(rowStr), Number(colStr));
      if (!cell) continue;
      group.addEventListener("mouseover", () => this.enterMark(table, cell));
      group.addEventListener("mouseout", () => this.leaveMark());
    }
  }

  private enterMark(table: AnnotatedTable, cell: Cell): void {
    this.tooltip.textContent = this.tooltipText(table, cell);
    this.tooltip.hidden = false;
    if (this.hooks.onQuoteHover) {
      // Any cell with provenance offsets links back to the text, whatever
      // its origin; cells without a quote have nothing to point at.
      this.hooks.onQuoteHover(cell.quote ?? null);
    }
  }

  private leaveMark(): void {
    this.tooltip.hidden = true;
    if (this.hooks.onQuoteHover) this.hooks.onQuoteHover(null);
  }

  private tooltipText(table: AnnotatedTable, cell: Cell): string {
    const series = table.schema.column_labels[cell.col];
    const row = table.schema.row_labels[cell.row];
    if (!cell.quantity) return `${series}, ${row}: no value`;
    const q = cell.quantity;
    let value: string;
    if (q.kind === "closed_range" && q.lo !== null && q.hi !== null) {
      value = `${formatNumber(q.lo)} to ${formatNumber(q.hi)} (midpoint ${formatNumber(q.value)})`;
    } else if (q.kind === "open_lower" && q.lo !== null) {
      value = `more than ${formatNumber(q.lo)} (estimate ${formatNumber(q.value)})`;
    } else if (q.kind === "open_upper" && q.hi !== null) {
      value = `less than ${formatNumber(q.hi)} (estimate ${formatNumber(q.value)})`;
    } else {
      value = formatNumber(q.value);
    }
    const unit = q.unit === "percent" ? "%" : "";
    let text = `${series}, ${row}: ${value}${unit}`;
    if (cell.uncertainty > 0) {
      text += ` — uncertainty ${formatNumber(cell.uncertainty)}`;
    }
    if (cell.origin === "inferred" || cell.origin === "computed") {
      text += ` (${cell.origin})`;
    }
    return text;
  }
}
