"""Chart spec construction and SVG rendering with augmented encodings.

A ChartSpec is renderer-independent: marks reference table cells by
(row, col) and carry value, range bounds, uncertainty and an inferred flag.
render_svg turns a spec into deterministic SVG 1.1 where every special
encoding is a group tagged with a machine-readable ``data-encoding``
attribute ("uncertainty" | "range" | "missing" | "sentiment") and every mark
group carries ``data-cell="row:col"``:

* uncertainty: a gradient stripe along the value axis, length linear in the
  score ((u/100) * stripe_max_len), emitted only for u > 0;
* range: caps at both bounds with two inward arrows for closed ranges, a
  single directional arrow at the bound for open ranges;
* missing: a dashed outline around marks whose cell was inferred or computed;
* sentiment: the narrative on a colored background, near the single linked
  data point or in the title area otherwise.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass

from .errors import NoDataError
from .quantity import CLOSED_RANGE, OPEN_LOWER, OPEN_UPPER
from .recommend import ChartChoice, is_temporal_label, temporal_sort_key
from .table import ABSENT, COMPUTED, INFERRED, AnnotatedTable

RANGE_NONE = "none"
RANGE_CLOSED = "closed"
RANGE_OPEN_LOWER = "open_lower"
RANGE_OPEN_UPPER = "open_upper"

_KIND_TO_RANGE = {
    CLOSED_RANGE: RANGE_CLOSED,
    OPEN_LOWER: RANGE_OPEN_LOWER,
    OPEN_UPPER: RANGE_OPEN_UPPER,
}

NEAR_POINT = "near_point"
TITLE = "title"


@dataclass(frozen=True)
class Mark:
    row: int
    col: int
    series: str
    category: str
    value: float | None
    lo: float | None
    hi: float | None
    uncertainty: int
    inferred: bool
    range_kind: str = RANGE_NONE
    gap: bool = False


@dataclass(frozen=True)
class SentimentAnnotation:
    sentiment: str  # positive | negative | neutral
    narrative: str
    placement: str  # near_point | title
    cell_ref: tuple[int, int] | None
    background_class: str

    def __post_init__(self):
        if (self.placement == NEAR_POINT) != (self.cell_ref is not None):
            raise ValueError("near-point placement requires exactly one linked cell ref")


@dataclass(frozen=True)
class AxisSpec:
    label: str
    scale: str  # band | linear
    categories: tuple[str, ...] = ()
    domain: tuple[float, float] | None = None


@dataclass(frozen=True)
class ChartSpec:
    chart_type: str
    title: str
    x: AxisSpec
    y: AxisSpec
    marks: tuple[Mark, ...]
    annotation: SentimentAnnotation | None = None


def build_spec(table: AnnotatedTable, choice: ChartChoice, topic=None) -> ChartSpec:
    """Assemble a spec from a completed table, a reconciled choice and a topic.

    The topic (duck-typed) contributes title, sentiment, narrative and linked
    cells; pass None for a bare chart. One mark is emitted per non-absent cell
    of every bound series; absent cells yield gap placeholders so the axis
    keeps their tick (line charts break the line there).
    """
    schema = table.schema
    col_index = {label: i for i, label in enumerate(schema.column_labels)}
    bound_cols = [col_index[label] for label in choice.y_binding]

    categories = list(schema.row_labels)
    if categories and all(is_temporal_label(l) for l in categories):
        categories.sort(key=temporal_sort_key)
        x_label = "Year" if all(l.strip().isdigit() for l in categories) else "Date"
    else:
        x_label = ""

    marks: list[Mark] = []
    extents: list[float] = []
    units: set[str] = set()
    for c in bound_cols:
        series = schema.column_labels[c]
        for r in range(len(schema.row_labels)):
            cell = table.cell(r, c)
            if cell.origin == ABSENT or cell.quantity is None:
                marks.append(Mark(r, c, series, schema.row_labels[r],
                                  None, None, None, 0, False, RANGE_NONE, gap=True))
                continue
            q = cell.quantity
            units.add(q.unit.kind)
            inferred = cell.origin in (INFERRED, COMPUTED)
            marks.append(Mark(
                r, c, series, schema.row_labels[r],
                q.value, q.lo, q.hi, cell.uncertainty, inferred,
                _KIND_TO_RANGE.get(q.kind, RANGE_NONE),
            ))
            extents.append(q.value)
            if q.lo is not None:
                extents.append(q.lo)
            if q.hi is not None:
                extents.append(q.hi)

    if not any(not m.gap for m in marks):
        raise NoDataError("no renderable marks for the bound series")

    lo_dom = min(0.0, min(extents))
    hi_dom = max(0.0, max(extents))
    if hi_dom == lo_dom:
        hi_dom = lo_dom + 1.0
    y_label = "%" if units == {"percent"} else ""

    annotation = None
    title = ""
    if topic is not None:
        title = getattr(topic, "title", "") or ""
        sentiment = getattr(topic, "sentiment", None)
        narrative = getattr(topic, "narrative", None)
        if sentiment and narrative:
            linked = tuple(getattr(topic, "linked_cells", ()) or ())
            if len(linked) == 1:
                annotation = SentimentAnnotation(
                    sentiment, narrative, NEAR_POINT, tuple(linked[0]),
                    f"sentiment-{sentiment}")
            else:
                annotation = SentimentAnnotation(
                    sentiment, narrative, TITLE, None, f"sentiment-{sentiment}")

    return ChartSpec(
        chart_type=choice.chart_type,
        title=title,
        x=AxisSpec(x_label, "band", tuple(categories)),
        y=AxisSpec(y_label, "linear", (), (lo_dom, hi_dom)),
        marks=tuple(marks),
        annotation=annotation,
    )


# --- encoding geometry (pure, value-space) ----------------------------------

@dataclass(frozen=True)
class StripeGeometry:
    length: float
    width: float
    color: str


def encode_uncertainty(mark: Mark, theme: dict) -> StripeGeometry:
    """Gradient stripe for an uncertain mark; length is linear in the score."""
    if mark.uncertainty <= 0:
        raise ValueError("uncertainty stripe requires a score > 0")
    l_max = float(theme["stripe_max_len"])
    return StripeGeometry(
        length=(mark.uncertainty / 100.0) * l_max,
        width=float(theme["stripe_width"]),
        color=theme["stripe_color"],
    )


@dataclass(frozen=True)
class RangeGlyph:
    kind: str
    anchor: float  # placed value: midpoint for closed ranges, the bound for open
    lo: float | None
    hi: float | None


def encode_range(mark: Mark) -> RangeGlyph:
    """Range glyph geometry in value space."""
    if mark.range_kind == RANGE_NONE:
        raise ValueError("mark carries no range")
    if mark.range_kind == RANGE_CLOSED:
        assert mark.lo is not None and mark.hi is not None
        return RangeGlyph(RANGE_CLOSED, (mark.lo + mark.hi) / 2.0, mark.lo, mark.hi)
    if mark.range_kind == RANGE_OPEN_LOWER:
        assert mark.lo is not None
        return RangeGlyph(RANGE_OPEN_LOWER, mark.lo, mark.lo, None)
    assert mark.hi is not None
    return RangeGlyph(RANGE_OPEN_UPPER, mark.hi, None, mark.hi)


@dataclass(frozen=True)
class StyledAnnotation:
    narrative: str
    background: str
    text_color: str
    placement: str
    cell_ref: tuple[int, int] | None


def encode_sentiment(annotation: SentimentAnnotation, theme: dict) -> StyledAnnotation:
    """Map a sentiment annotation onto themed colors."""
    colors = theme["sentiment_colors"]
    return StyledAnnotation(
        narrative=annotation.narrative,
        background=colors[annotation.sentiment],
        text_color=theme["sentiment_text_color"],
        placement=annotation.placement,
        cell_ref=annotation.cell_ref,
    )


# --- themes -------------------------------------------------------------------

def default_theme() -> dict:
    ref = importlib.resources.files("textchart").joinpath("themes", "default.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def load_theme(path: str | None = None) -> dict:
    theme = default_theme()
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            theme.update(json.load(fh))
    return theme


# --- serialization --------------------------------------------------------------

def spec_to_dict(spec: ChartSpec) -> dict:
    return {
        "chart_type": spec.chart_type,
        "title": spec.title,
        "axes": {
            "x": {"label": spec.x.label, "scale": spec.x.scale,
                  "categories": list(spec.x.categories)},
            "y": {"label": spec.y.label, "scale": spec.y.scale,
                  "domain": list(spec.y.domain) if spec.y.domain else None},
        },
        "marks": [
            {
                "cell": [m.row, m.col],
                "series": m.series,
                "category": m.category,
                "value": m.value,
                "lo": m.lo,
                "hi": m.hi,
                "uncertainty": m.uncertainty,
                "inferred": m.inferred,
                "range_kind": m.range_kind,
                "gap": m.gap,
            }
            for m in spec.marks
        ],
        "annotation": None if spec.annotation is None else {
            "sentiment": spec.annotation.sentiment,
            "narrative": spec.annotation.narrative,
            "placement": spec.annotation.placement,
            "cell": list(spec.annotation.cell_ref) if spec.annotation.cell_ref else None,
            "background_class": spec.annotation.background_class,
        },
    }


def spec_to_json(spec: ChartSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, ensure_ascii=False)


def spec_from_dict(d: dict) -> ChartSpec:
    ann = None
    if d.get("annotation"):
        a = d["annotation"]
        ann = SentimentAnnotation(
            a["sentiment"], a["narrative"], a["placement"],
            tuple(a["cell"]) if a.get("cell") else None,
            a.get("background_class", f"sentiment-{a['sentiment']}"),
        )
    return ChartSpec(
        chart_type=d["chart_type"],
        title=d.get("title", ""),
        x=AxisSpec(d["axes"]["x"]["label"], d["axes"]["x"]["scale"],
                   tuple(d["axes"]["x"].get("categories", ()))),
        y=AxisSpec(d["axes"]["y"]["label"], d["axes"]["y"]["scale"], (),
                   tuple(d["axes"]["y"]["domain"]) if d["axes"]["y"].get("domain") else None),
        marks=tuple(
            Mark(m["cell"][0], m["cell"][1], m["series"], m["category"],
                 m["value"], m["lo"], m["hi"], m["uncertainty"],
                 m["inferred"], m.get("range_kind", RANGE_NONE), m.get("gap", False))
            for m in d["marks"]
        ),
        annotation=ann,
    )


def spec_from_json(text: str) -> ChartSpec:
    return spec_from_dict(json.loads(text))


# --- SVG rendering ---------------------------------------------------------------

def _f(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9:
        ticks.append(round(t, 10))
        t += step
    return ticks


class _Scales:
    def __init__(self, spec: ChartSpec, theme: dict):
        self.width = theme["width"]
        self.height = theme["height"]
        m = theme["margin"]
        self.left, self.right = m["left"], self.width - m["right"]
        self.top, self.bottom = m["top"], self.height - m["bottom"]
        self.categories = spec.x.categories
        dom = spec.y.domain or (0.0, 1.0)
        pad = 0.08 * (dom[1] - dom[0])
        self.y_lo = dom[0]
        self.y_hi = dom[1] + pad

    def x_band(self, category: str) -> tuple[float, float]:
        n = max(1, len(self.categories))
        w = (self.right - self.left) / n
        i = self.categories.index(category)
        return self.left + i * w, w

    def x_center(self, category: str) -> float:
        x0, w = self.x_band(category)
        return x0 + w / 2

    def y(self, value: float) -> float:
        ratio = (value - self.y_lo) / (self.y_hi - self.y_lo)
        return self.bottom - ratio * (self.bottom - self.top)


def _series_color(theme: dict, spec: ChartSpec, series: str) -> str:
    order: list[str] = []
    for m in spec.marks:
        if m.series not in order:
            order.append(m.series)
    palette = theme["series_palette"]
    return palette[order.index(series) % len(palette)]


def _stripe_svg(mark: Mark, theme: dict, cx: float, cy: float, vertical: bool = True) -> list[str]:
    if mark.uncertainty <= 0:
        return []
    geom = encode_uncertainty(mark, theme)
    out = [f'<g data-encoding="uncertainty" data-cell="{mark.row}:{mark.col}" '
           f'data-stripe-length="{_f(geom.length)}">']
    if vertical:
        out.append(
            f'<rect x="{_f(cx - geom.width / 2)}" y="{_f(cy - geom.length)}" '
            f'width="{_f(geom.width)}" height="{_f(geom.length)}" fill="url(#stripe-fade)"/>')
    else:
        out.append(
            f'<rect x="{_f(cx)}" y="{_f(cy - geom.width / 2)}" '
            f'width="{_f(geom.length)}" height="{_f(geom.width)}" fill="url(#stripe-fade-h)"/>')
    out.append("</g>")
    return out


def _arrow(cx: float, cy: float, up: bool, color: str, size: float = 5.0) -> str:
    tip = cy - size if up else cy + size
    return (f'<path d="M {_f(cx - size)} {_f(cy)} L {_f(cx + size)} {_f(cy)} '
            f'L {_f(cx)} {_f(tip)} Z" fill="{color}"/>')


def _range_svg(mark: Mark, scales: _Scales, theme: dict, cx: float, color: str) -> list[str]:
    if mark.range_kind == RANGE_NONE:
        return []
    glyph = encode_range(mark)
    cap_w = theme["range_cap_width"]
    out = [f'<g data-encoding="range" data-cell="{mark.row}:{mark.col}" '
           f'data-range-kind="{glyph.kind}">']
    if glyph.kind == RANGE_CLOSED:
        y_lo, y_hi = scales.y(glyph.lo), scales.y(glyph.hi)
        out.append(f'<line x1="{_f(cx)}" y1="{_f(y_lo)}" x2="{_f(cx)}" y2="{_f(y_hi)}" '
                   f'stroke="{color}" stroke-width="1"/>')
        for y_bound in (y_lo, y_hi):
            out.append(f'<line x1="{_f(cx - cap_w / 2)}" y1="{_f(y_bound)}" '
                       f'x2="{_f(cx + cap_w / 2)}" y2="{_f(y_bound)}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        # Two arrows pointing inward, toward the midpoint value.
        out.append(_arrow(cx, y_lo - 2, True, color))
        out.append(_arrow(cx, y_hi + 2, False, color))
    elif glyph.kind == RANGE_OPEN_LOWER:
        y_b = scales.y(glyph.lo)
        out.append(f'<line x1="{_f(cx)}" y1="{_f(y_b)}" x2="{_f(cx)}" y2="{_f(y_b - 12)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(_arrow(cx, y_b - 12, True, color))
    else:
        y_b = scales.y(glyph.hi)
        out.append(f'<line x1="{_f(cx)}" y1="{_f(y_b)}" x2="{_f(cx)}" y2="{_f(y_b + 12)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(_arrow(cx, y_b + 12, False, color))
    out.append("</g>")
    return out


def _missing_svg(mark: Mark, theme: dict, shape: str, **geo) -> list[str]:
    if not mark.inferred:
        return []
    dash = theme["dash_pattern"]
    color = theme["axis_color"]
    out = [f'<g data-encoding="missing" data-cell="{mark.row}:{mark.col}">']
    if shape == "rect":
        out.append(
            f'<rect x="{_f(geo["x"] - 2)}" y="{_f(geo["y"] - 2)}" width="{_f(geo["w"] + 4)}" '
            f'height="{_f(geo["h"] + 4)}" fill="none" stroke="{color}" '
            f'stroke-dasharray="{dash}" stroke-width="1.2"/>')
    elif shape == "circle":
        out.append(
            f'<circle cx="{_f(geo["cx"])}" cy="{_f(geo["cy"])}" r="{_f(geo["r"] + 3)}" '
            f'fill="none" stroke="{color}" stroke-dasharray="{dash}" stroke-width="1.2"/>')
    else:  # path (pie slice perimeter)
        out.append(f'<path d="{geo["d"]}" fill="none" stroke="{color}" '
                   f'stroke-dasharray="{dash}" stroke-width="1.2"/>')
    out.append("</g>")
    return out


def _sentiment_svg(spec: ChartSpec, scales: _Scales, theme: dict) -> list[str]:
    if spec.annotation is None:
        return []
    styled = encode_sentiment(spec.annotation, theme)
    font = theme["annotation_font_size"]
    text = styled.narrative
    w = max(40.0, len(text) * font * 0.58 + 12)
    h = font + 10
    if styled.placement == NEAR_POINT:
        row, col = styled.cell_ref
        target = next((m for m in spec.marks if (m.row, m.col) == (row, col)), None)
        if target is not None and target.value is not None:
            cx = scales.x_center(target.category)
            cy = scales.y(target.value)
        else:
            cx, cy = (scales.left + scales.right) / 2, scales.top
        x = min(max(cx - w / 2, scales.left), scales.right - w)
        y = max(cy - h - 18, 4.0)
    else:
        x = scales.left
        y = theme["title_font_size"] + 12
    out = [
        f'<g data-encoding="sentiment" data-sentiment="{spec.annotation.sentiment}" '
        f'data-placement="{styled.placement}">',
        f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" rx="3" '
        f'fill="{styled.background}"/>',
        f'<text x="{_f(x + 6)}" y="{_f(y + h - 8)}" font-size="{font}" '
        f'fill="{styled.text_color}">{_esc(text)}</text>',
        "</g>",
    ]
    return out


def _axes_svg(spec: ChartSpec, scales: _Scales, theme: dict) -> list[str]:
    color = theme["axis_color"]
    grid = theme["grid_color"]
    font = theme["font_size"]
    out = [f'<g data-role="axes">']
    out.append(f'<line x1="{_f(scales.left)}" y1="{_f(scales.bottom)}" '
               f'x2="{_f(scales.right)}" y2="{_f(scales.bottom)}" stroke="{color}"/>')
    out.append(f'<line x1="{_f(scales.left)}" y1="{_f(scales.top)}" '
               f'x2="{_f(scales.left)}" y2="{_f(scales.bottom)}" stroke="{color}"/>')
    for t in _nice_ticks(scales.y_lo, scales.y_hi):
        y = scales.y(t)
        out.append(f'<line x1="{_f(scales.left)}" y1="{_f(y)}" x2="{_f(scales.right)}" '
                   f'y2="{_f(y)}" stroke="{grid}" stroke-width="0.5"/>')
        out.append(f'<text x="{_f(scales.left - 6)}" y="{_f(y + font * 0.35)}" '
                   f'font-size="{font}" text-anchor="end" fill="{color}">{_f(t)}</text>')
    for cat in scales.categories:
        out.append(f'<text x="{_f(scales.x_center(cat))}" y="{_f(scales.bottom + font + 6)}" '
                   f'font-size="{font}" text-anchor="middle" fill="{color}">{_esc(cat)}</text>')
    if spec.y.label:
        out.append(f'<text x="{_f(scales.left - 6)}" y="{_f(scales.top - 8)}" '
                   f'font-size="{font}" text-anchor="end" fill="{color}">{_esc(spec.y.label)}</text>')
    if spec.x.label:
        out.append(f'<text x="{_f(scales.right)}" y="{_f(scales.bottom + 2 * font + 10)}" '
                   f'font-size="{font}" text-anchor="end" fill="{color}">{_esc(spec.x.label)}</text>')
    out.append("</g>")
    return out


def _legend_svg(spec: ChartSpec, scales: _Scales, theme: dict) -> list[str]:
    series: list[str] = []
    for m in spec.marks:
        if m.series not in series:
            series.append(m.series)
    if len(series) < 2:
        return []
    font = theme["font_size"]
    out = [f'<g data-role="legend">']
    x = scales.right - 110
    y = scales.top - 6
    for i, s in enumerate(series):
        color = _series_color(theme, spec, s)
        yy = y + i * (font + 6)
        out.append(f'<rect x="{_f(x)}" y="{_f(yy - font + 2)}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{_f(x + 14)}" y="{_f(yy)}" font-size="{font}" '
                   f'fill="{theme["axis_color"]}">{_esc(s)}</text>')
    out.append("</g>")
    return out


def _bar_marks(spec: ChartSpec, scales: _Scales, theme: dict) -> list[str]:
    series: list[str] = []
    for m in spec.marks:
        if m.series not in series:
            series.append(m.series)
    gap = theme["bar_gap"]
    out = []
    y0 = scales.y(max(0.0, scales.y_lo))
    for mark in spec.marks:
        x0, band = scales.x_band(mark.category)
        inner = band * (1 - gap)
        slot = inner / len(series)
        bx = x0 + band * gap / 2 + series.index(mark.series) * slot
        bw = slot * 0.9
        cx = bx + bw / 2
        out.append(f'<g data-cell="{mark.row}:{mark.col}" data-series="{_esc(mark.series)}">')
        if mark.gap or mark.value is None:
            out.append(f'<line x1="{_f(bx)}" y1="{_f(y0)}" x2="{_f(bx + bw)}" y2="{_f(y0)}" '
                       f'stroke="{theme["grid_color"]}" stroke-width="1"/>')
            out.append("</g>")
            continue
        yv = scales.y(mark.value)
        top, hgt = (yv, y0 - yv) if yv <= y0 else (y0, yv - y0)
        color = _series_color(theme, spec, mark.series)
        out.append(f'<rect x="{_f(bx)}" y="{_f(top)}" width="{_f(bw)}" height="{_f(hgt)}" '
                   f'fill="{color}"/>')
        out.extend(_missing_svg(mark, theme, "rect", x=bx, y=top, w=bw, h=hgt))
        out.extend(_range_svg(mark, scales, theme, cx, theme["axis_color"]))
        out.extend(_stripe_svg(mark, theme, cx, yv))
        out.append("</g>")
    return out


def _point_marks(spec: ChartSpec, scales: _Scales, theme: dict, with_lines: bool) -> list[str]:
    series: list[str] = []
    for m in spec.marks:
        if m.series not in series:
            series.append(m.series)
    out = []
    r = theme["mark_radius"]
    if with_lines:
        for s in series:
            color = _series_color(theme, spec, s)
            pts = [m for m in spec.marks if m.series == s]
            pts.sort(key=lambda m: spec.x.categories.index(m.category))
            segment: list[str] = []
            for m in pts:
                if m.gap or m.value is None:
                    if len(segment) >= 2:
                        out.append(f'<polyline points="{" ".join(segment)}" fill="none" '
                                   f'stroke="{color}" stroke-width="1.5"/>')
                    segment = []
                    continue
                segment.append(f"{_f(scales.x_center(m.category))},{_f(scales.y(m.value))}")
            if len(segment) >= 2:
                out.append(f'<polyline points="{" ".join(segment)}" fill="none" '
                           f'stroke="{color}" stroke-width="1.5"/>')
    for mark in spec.marks:
        out.append(f'<g data-cell="{mark.row}:{mark.col}" data-series="{_esc(mark.series)}">')
        if mark.gap or mark.value is None:
            out.append("</g>")
            continue
        cx = scales.x_center(mark.category)
        cy = scales.y(mark.value)
        color = _series_color(theme, spec, mark.series)
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="{color}"/>')
        out.extend(_missing_svg(mark, theme, "circle", cx=cx, cy=cy, r=r))
        out.extend(_range_svg(mark, scales, theme, cx, theme["axis_color"]))
        out.extend(_stripe_svg(mark, theme, cx, cy))
        out.append("</g>")
    return out


def _slice_path(cx: float, cy: float, r: float, a0: float, a1: float) -> str:
    x0, y0 = cx + r * math.cos(a0), cy + r * math.sin(a0)
    x1, y1 = cx + r * math.cos(a1), cy + r * math.sin(a1)
    large = 1 if (a1 - a0) > math.pi else 0
    return (f"M {_f(cx)} {_f(cy)} L {_f(x0)} {_f(y0)} "
            f"A {_f(r)} {_f(r)} 0 {large} 1 {_f(x1)} {_f(y1)} Z")


def _arc_path(cx: float, cy: float, r: float, a0: float, a1: float) -> str:
    x0, y0 = cx + r * math.cos(a0), cy + r * math.sin(a0)
    x1, y1 = cx + r * math.cos(a1), cy + r * math.sin(a1)
    large = 1 if (a1 - a0) > math.pi else 0
    return f"M {_f(x0)} {_f(y0)} A {_f(r)} {_f(r)} 0 {large} 1 {_f(x1)} {_f(y1)}"


def _pie_marks(spec: ChartSpec, scales: _Scales, theme: dict) -> list[str]:
    values = [(m, m.value) for m in spec.marks if not m.gap and m.value is not None]
    total = sum(v for _, v in values if v > 0)
    if total <= 0:
        raise NoDataError("pie chart requires positive values")
    cx = (scales.left + scales.right) / 2
    cy = (scales.top + scales.bottom) / 2
    radius = min(scales.right - scales.left, scales.bottom - scales.top) / 2 - 24
    font = theme["font_size"]
    out = []
    angle = -math.pi / 2
    palette = theme["series_palette"]
    for i, (mark, value) in enumerate(values):
        if value <= 0:
            continue
        span = 2 * math.pi * value / total
        a0, a1 = angle, angle + span
        angle = a1
        mid = (a0 + a1) / 2
        color = palette[i % len(palette)]
        d = _slice_path(cx, cy, radius, a0, a1)
        out.append(f'<g data-cell="{mark.row}:{mark.col}" data-series="{_esc(mark.series)}">')
        out.append(f'<path d="{d}" fill="{color}" stroke="#FFFFFF" stroke-width="1"/>')
        if mark.inferred:
            out.extend(_missing_svg(mark, theme, "path", d=d))
        if mark.uncertainty > 0:
            geom = encode_uncertainty(mark, theme)
            arc_r = radius + 6
            half = (geom.length / arc_r) / 2
            out.append(f'<g data-encoding="uncertainty" data-cell="{mark.row}:{mark.col}" '
                       f'data-stripe-length="{_f(geom.length)}">')
            out.append(f'<path d="{_arc_path(cx, cy, arc_r, mid - half, mid + half)}" '
                       f'fill="none" stroke="{geom.color}" stroke-width="{_f(geom.width)}" '
                       f'stroke-linecap="round" opacity="0.7"/>')
            out.append("</g>")
        lx = cx + (radius + 16) * math.cos(mid)
        ly = cy + (radius + 16) * math.sin(mid)
        anchor = "start" if math.cos(mid) >= 0 else "end"
        out.append(f'<text x="{_f(lx)}" y="{_f(ly)}" font-size="{font}" text-anchor="{anchor}" '
                   f'fill="{theme["axis_color"]}">{_esc(mark.category)} ({_f(value)}%)</text>')
        out.append("</g>")
    return out


def render_svg(spec: ChartSpec, theme: dict | None = None) -> str:
    """Render a spec to deterministic SVG 1.1 text."""
    theme = theme or default_theme()
    scales = _Scales(spec, theme)
    font_family = theme["font_family"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{theme["width"]}" '
        f'height="{theme["height"]}" viewBox="0 0 {theme["width"]} {theme["height"]}" '
        f'font-family="{font_family}" data-chart-type="{spec.chart_type}">',
        "<defs>",
        f'<linearGradient id="stripe-fade" x1="0" y1="1" x2="0" y2="0">'
        f'<stop offset="0" stop-color="{theme["stripe_color"]}" stop-opacity="0.9"/>'
        f'<stop offset="1" stop-color="{theme["stripe_color"]}" stop-opacity="0.05"/>'
        f'</linearGradient>',
        f'<linearGradient id="stripe-fade-h" x1="0" y1="0" x2="1" y2="0">'
        f'<stop offset="0" stop-color="{theme["stripe_color"]}" stop-opacity="0.9"/>'
        f'<stop offset="1" stop-color="{theme["stripe_color"]}" stop-opacity="0.05"/>'
        f'</linearGradient>',
        "</defs>",
        f'<rect x="0" y="0" width="{theme["width"]}" height="{theme["height"]}" '
        f'fill="{theme["background"]}"/>',
    ]
    if spec.title:
        out.append(f'<text x="{_f(scales.left)}" y="{_f(theme["title_font_size"] + 4)}" '
                   f'font-size="{theme["title_font_size"]}" font-weight="bold" '
                   f'fill="{theme["axis_color"]}">{_esc(spec.title)}</text>')

    if spec.chart_type == "pie":
        out.extend(_pie_marks(spec, scales, theme))
    else:
        out.extend(_axes_svg(spec, scales, theme))
        out.extend(_legend_svg(spec, scales, theme))
        if spec.chart_type == "bar":
            out.extend(_bar_marks(spec, scales, theme))
        elif spec.chart_type == "line":
            out.extend(_point_marks(spec, scales, theme, with_lines=True))
        else:  # scatter
            out.extend(_point_marks(spec, scales, theme, with_lines=False))

    out.extend(_sentiment_svg(spec, scales, theme))
    out.append("</svg>")
    return "\n".join(out) + "\n"
