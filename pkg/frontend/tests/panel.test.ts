// Chart panel behavior, including the two UI acceptance checks:
// provenance hover (highlighted text equals the cell's verbatim quote) and
// no client-side numeral fabrication.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeEach, describe, expect, it } from "vitest";

import { DocumentView } from "../src/document_view";
import { ChartPanel } from "../src/panel";
import type { AnnotatedTable, Quote } from "../src/types";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "gdp");

const documentText = readFileSync(join(FIXTURES, "document.txt"), "utf-8");
const tableJson = readFileSync(join(FIXTURES, "table-0.json"), "utf-8");
const chartSvg = readFileSync(join(FIXTURES, "chart-0.svg"), "utf-8");
const table: AnnotatedTable = JSON.parse(tableJson);

let view: DocumentView;
let panel: ChartPanel;
let panelEl: HTMLElement;

function mount() {
  document.body.innerHTML = '<div id="doc"></div><div id="panel"></div>';
  view = new DocumentView(document.getElementById("doc")!, documentText);
  panelEl = document.getElementById("panel")!;
  panel = new ChartPanel(panelEl, {
    onQuoteHover: (quote: Quote | null) => {
      view.setHighlight("quote", quote ? { offset: quote.offset, length: quote.length } : null);
    },
  });
}

function markGroups(): Element[] {
  return Array.from(panelEl.querySelectorAll("g[data-cell]")).filter(
    (g) => !g.hasAttribute("data-encoding"),
  );
}

function hover(el: Element) {
  el.dispatchEvent(new window.Event("mouseover", { bubbles: false }));
}

beforeEach(() => {
  mount();
  panel.showCharts([{ granularity: "fine", table, svg: chartSvg }]);
});

describe("provenance hover (acceptance)", () => {
  it("highlights document text equal to each quoted cell's verbatim quote", () => {
    const groups = markGroups();
    expect(groups.length).toBeGreaterThan(0);
    let quotedMarks = 0;
    for (const group of groups) {
      const [row, col] = (group.getAttribute("data-cell") ?? "").split(":").map(Number);
      const cell = table.cells.find((c) => c.row === row && c.col === col)!;
      hover(group);
      if (cell.quote) {
        if (cell.origin === "quoted") quotedMarks += 1;
        expect(view.highlightedText("quote")).toBe(cell.quote.verbatim);
      } else {
        expect(view.highlightedText("quote")).toBeNull();
      }
    }
    expect(quotedMarks).toBeGreaterThanOrEqual(12); // 13 quoted cells in the fixture
  });

  it("clears the highlight on mouse-out", () => {
    const group = markGroups()[0];
    hover(group);
    group.dispatchEvent(new window.Event("mouseout"));
    expect(view.highlightedText("quote")).toBeNull();
  });
});

describe("no client-side fabrication (acceptance)", () => {
  function numeralsIn(text: string): number[] {
    return (text.match(/\d+(?:\.\d+)?/g) ?? []).map(Number);
  }

  it("every numeral the panel draws appears in the fetched table JSON", () => {
    const allowed = new Set(numeralsIn(tableJson));
    const offending: number[] = [];
    const check = () => {
      for (const el of Array.from(panelEl.querySelectorAll("*"))) {
        if (el.closest(".chart-host")) continue; // the fetched SVG artifact itself
        for (const child of Array.from(el.childNodes)) {
          if (child.nodeType !== Node.TEXT_NODE) continue;
          for (const numeral of numeralsIn(child.textContent ?? "")) {
            if (!allowed.has(numeral)) offending.push(numeral);
          }
        }
      }
    };
    check(); // static chrome
    for (const group of markGroups()) {
      hover(group); // tooltip for every mark
      check();
    }
    expect(offending).toEqual([]);
  });

  it("tooltip values come from the table", () => {
    const target = table.cells.find((c) => c.quote?.verbatim === "exceeded 8%")!;
    const group = markGroups().find(
      (g) => g.getAttribute("data-cell") === `${target.row}:${target.col}`,
    )!;
    hover(group);
    const tooltip = panelEl.querySelector(".mark-tooltip")!;
    expect(tooltip.textContent).toContain("more than 8");
    expect(tooltip.textContent).toContain("8.1");
    expect(tooltip.textContent).toContain("uncertainty 20");
  });
});

describe("legend", () => {
  it("lists each encoding present in the chart", () => {
    const entries = Array.from(panelEl.querySelectorAll("[data-legend]")).map(
      (el) => el.getAttribute("data-legend"),
    );
    expect(entries).toEqual(["uncertainty", "range", "missing", "sentiment"]);
  });

  it("collapses when the chart has zero encodings", () => {
    const plainSvg =
      '<svg xmlns="http://www.w3.org/2000/svg"><g data-cell="0:0"><rect/></g></svg>';
    const tinyTable: AnnotatedTable = {
      schema: { topic_id: "t", column_labels: ["a"], row_labels: ["r"] },
      cells: [
        {
          row: 0, col: 0, origin: "quoted", uncertainty: 0,
          quote: { offset: 0, length: 2, verbatim: "1%" },
          quantity: { kind: "exact", value: 1, lo: 1, hi: 1, unit: "percent", modifier: null },
        },
      ],
      augmented_rows: [],
    };
    panel.showCharts([{ granularity: "fine", table: tinyTable, svg: plainSvg }]);
    const legend = panelEl.querySelector(".encoding-legend")! as HTMLElement;
    expect(legend.hidden).toBe(true);
    expect(legend.children.length).toBe(0);
  });
});

describe("run states", () => {
  it("failed runs show a stage-tagged error", () => {
    panel.showError({ stage: "populate", message: "ungrounded quote" });
    const error = panelEl.querySelector(".panel-error")!;
    expect(error.getAttribute("data-stage")).toBe("populate");
    expect(error.textContent).toContain("populate");
  });

  it("fine/coarse toggle switches the displayed chart set", () => {
    const fineSvg = chartSvg;
    const coarseSvg = chartSvg.replace("data-chart-type=\"line\"", "data-chart-type=\"bar\"");
    panel.showCharts([
      { granularity: "fine", table, svg: fineSvg },
      { granularity: "coarse", table, svg: coarseSvg },
    ]);
    expect(panelEl.querySelector("svg")!.getAttribute("data-chart-type")).toBe("line");
    const coarseButton = Array.from(
      panelEl.querySelectorAll(".granularity-toggle button"),
    ).find((b) => b.getAttribute("data-granularity") === "coarse")! as HTMLElement;
    coarseButton.dispatchEvent(new window.Event("click"));
    expect(panelEl.querySelector("svg")!.getAttribute("data-chart-type")).toBe("bar");
  });
});
