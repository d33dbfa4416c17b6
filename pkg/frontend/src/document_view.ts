// Offset-preserving document rendering. The document is plain text inside a
// pre-wrap container; highlights wrap exact [offset, offset+length) slices in
// <mark> elements without altering a single character, so byte offsets from
// table provenance map 1:1 onto the view.

import type { Span } from "./types";

export interface Highlight {
  span: Span;
  cls: string; // "selection" | "quote"
}

export class DocumentView {
  private highlights: Highlight[] = [];

  constructor(private container: HTMLElement, private text: string = "") {
    this.container.classList.add("document-view");
    this.render();
  }

  setText(text: string): void {
    this.text = text;
    this.highlights = [];
    this.render();
  }

  getText(): string {
    return this.text;
  }

  /** Replace highlights of one class, keep the others. */
  setHighlight(cls: string, span: Span | null): void {
    this.highlights = this.highlights.filter((h) => h.cls !== cls);
    if (span && span.length > 0) {
      this.highlights.push({ span, cls });
    }
    this.render();
  }

  highlightedText(cls: string): string | null {
    const mark = this.container.querySelector(`mark.${cls}`);
    return mark ? mark.textContent : null;
  }

  scrollToHighlight(cls: string): void {
    const mark = this.container.querySelector(`mark.${cls}`);
    if (mark && typeof (mark as HTMLElement).scrollIntoView === "function") {
      (mark as HTMLElement).scrollIntoView({ block: "center" });
    }
  }

  private render(): void {
    this.container.textContent = "";
    const cuts = new Set<number>([0, this.text.length]);
    for (const h of this.highlights) {
      cuts.add(Math.max(0, Math.min(h.span.offset, this.text.length)));
      cuts.add(Math.max(0, Math.min(h.span.offset + h.span.length, this.text.length)));
    }
    const points = Array.from(cuts).sort((a, b) => a - b);
    for (let i = 0; i + 1 < points.length; i++) {
      const start = points[i];
      const end = points[i + 1];
      if (start === end) continue;
      const slice = this.text.slice(start, end);
      const classes = this.highlights
        .filter((h) => start >= h.span.offset && end <= h.span.offset + h.span.length)
        .map((h) => h.cls);
      if (classes.length === 0) {
        this.container.appendChild(document.createTextNode(slice));
      } else {
        const mark = document.createElement("mark");
        mark.className = classes.join(" ");
        mark.setAttribute("data-offset", String(start));
        mark.textContent = slice;
        this.container.appendChild(mark);
      }
    }
  }

  /**
   * Current browser selection as a span of global document offsets, or null
   * when the selection is empty or falls outside the view.
   */
  selectionSpan(): Span | null {
    const selection = window.getSelection();
    if (!selection || selection.rangeCount === 0 || selection.isCollapsed) return null;
    const range = selection.getRangeAt(0);
    const start = this.globalOffset(range.startContainer, range.startOffset);
    const end = this.globalOffset(range.endContainer, range.endOffset);
    if (start === null || end === null) return null;
    const offset = Math.min(start, end);
    const length = Math.abs(end - start);
    return length > 0 ? { offset, length } : null;
  }

  private globalOffset(node: Node, offsetInNode: number): number | null {
    if (!this.container.contains(node)) return null;
    if (node.nodeType !== Node.TEXT_NODE) {
      // Element container: resolve to the start of its offsetInNode-th child.
      let base = 0;
      const children = node.childNodes;
      for (let i = 0; i < Math.min(offsetInNode, children.length); i++) {
        base += children[i].textContent?.length ?? 0;
      }
      return this.prefixLength(node) + base;
    }
    return this.prefixLength(node) + offsetInNode;
  }

  /** Total text length strictly before `target` in document order. */
  private prefixLength(target: Node): number {
    let total = 0;
    const walk = (node: Node): boolean => {
      if (node === target) return true;
      if (node.nodeType === Node.TEXT_NODE) {
        total += node.textContent?.length ?? 0;
        return false;
      }
      for (const child of Array.from(node.childNodes)) {
        if (walk(child)) return true;
      }
      return false;
    };
    walk(this.container);
    return total;
  }
}
