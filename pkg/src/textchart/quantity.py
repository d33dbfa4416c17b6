"""Deterministic parser for English numeric phrases.

Turns short quotes like "between 4% and 5%", "more than 27,000 deaths" or
"about 50%" into typed quantities with explicit range bounds, units and
modifiers. The parser is pure and locale-fixed (comma thousands separator,
period decimal); anything it cannot read deterministically raises so the
caller can escalate to model-based inference instead of guessing.

Unit inference for bare numbers: percent and currency markers win; otherwise
integer-valued quantities are counts and fractional ones are unitless
(pure multipliers like "twice" are always unitless).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import AmbiguousPhrase, UnparsableNumber

EXACT = "exact"
CLOSED_RANGE = "closed_range"
OPEN_LOWER = "open_lower"
OPEN_UPPER = "open_upper"

KINDS = (EXACT, CLOSED_RANGE, OPEN_LOWER, OPEN_UPPER)


@dataclass(frozen=True)
class Unit:
    """Measurement unit: percent (0-100 scale), count, currency or unitless."""

    kind: str
    code: str | None = None

    def __post_init__(self):
        if self.kind not in ("percent", "count", "currency", "unitless"):
            raise ValueError(f"unknown unit kind {self.kind!r}")
        if (self.kind == "currency") != (self.code is not None):
            raise ValueError("currency units carry a code; others must not")


PERCENT = Unit("percent")
COUNT = Unit("count")
UNITLESS = Unit("unitless")


def currency(code: str) -> Unit:
    return Unit("currency", code.upper())


@dataclass(frozen=True)
class Modifier:
    """Qualifier attached to a quantity.

    ``comparative`` modifiers carry a nonzero payload that is either a
    multiplier ("twice" -> factor 2.0) or a signed delta
    ("14 percent higher" -> delta +14).
    """

    tag: str = "none"  # none | approximate | comparative
    payload: float | None = None
    payload_kind: str | None = None  # factor | delta

    def __post_init__(self):
        if self.tag not in ("none", "approximate", "comparative"):
            raise ValueError(f"unknown modifier tag {self.tag!r}")
        if self.tag == "comparative":
            if not self.payload:
                raise ValueError("comparative modifier requires a nonzero payload")
            if self.payload_kind not in ("factor", "delta"):
                raise ValueError("comparative modifier requires payload_kind factor|delta")
        elif self.payload is not None or self.payload_kind is not None:
            raise ValueError(f"{self.tag} modifier carries no payload")


NO_MODIFIER = Modifier()
APPROXIMATE = Modifier("approximate")


def comparative_factor(factor: float) -> Modifier:
    return Modifier("comparative", float(factor), "factor")


def comparative_delta(delta: float) -> Modifier:
    return Modifier("comparative", float(delta), "delta")


@dataclass(frozen=True)
class ParsedQuantity:
    """A normalized numeric reading of a text phrase.

    ``value`` is the point estimate: the midpoint for closed ranges and the
    bound itself for open ranges until a downstream stage refines it.
    """

    kind: str
    value: float
    lo: float | None
    hi: float | None
    unit: Unit = COUNT
    modifier: Modifier = NO_MODIFIER

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown quantity kind {self.kind!r}")
        if self.kind == EXACT:
            if self.lo != self.value or self.hi != self.value:
                raise ValueError("exact quantity requires lo = hi = value")
        elif self.kind == CLOSED_RANGE:
            if self.lo is None or self.hi is None:
                raise ValueError("closed range requires both bounds")
            if self.lo > self.hi:
                raise ValueError("closed range requires lo <= hi")
            if self.value != (self.lo + self.hi) / 2:
                raise ValueError("closed range value must be the midpoint")
        elif self.kind == OPEN_LOWER:
            if self.lo is None or self.hi is not None:
                raise ValueError("open lower bound requires lo only")
        elif self.kind == OPEN_UPPER:
            if self.hi is None or self.lo is not None:
                raise ValueError("open upper bound requires hi only")


def exact(value: float, unit: Unit = COUNT, modifier: Modifier = NO_MODIFIER) -> ParsedQuantity:
    v = float(value)
    return ParsedQuantity(EXACT, v, v, v, unit, modifier)


def closed_range(lo: float, hi: float, unit: Unit = COUNT, modifier: Modifier = NO_MODIFIER) -> ParsedQuantity:
    lo, hi = float(lo), float(hi)
    return ParsedQuantity(CLOSED_RANGE, (lo + hi) / 2, lo, hi, unit, modifier)


def open_lower(lo: float, unit: Unit = COUNT, modifier: Modifier = NO_MODIFIER) -> ParsedQuantity:
    return ParsedQuantity(OPEN_LOWER, float(lo), float(lo), None, unit, modifier)


def open_upper(hi: float, unit: Unit = COUNT, modifier: Modifier = NO_MODIFIER) -> ParsedQuantity:
    return ParsedQuantity(OPEN_UPPER, float(hi), None, float(hi), unit, modifier)


def with_value(q: ParsedQuantity, value: float) -> ParsedQuantity:
    """Return a copy with a refined point estimate (open ranges and exacts only)."""
    value = float(value)
    if q.kind == EXACT:
        return replace(q, value=value, lo=value, hi=value)
    if q.kind == CLOSED_RANGE:
        raise ValueError("closed range point estimate is pinned to the midpoint")
    return replace(q, value=value)


# --- number token normalization ------------------------------------------

_WORD_NUMBERS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
    "seventy": 70, "eighty": 80, "ninety": 90, "hundred": 100,
}

_NUM = r"(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?"
_PCT = r"(?:%|\s*percent(?:age\s+points?)?\b)"
_CUR_SYMBOLS = {"$": "USD", "€": "EUR", "£": "GBP"}
_CUR_CODES = ("USD", "EUR", "GBP", "JPY", "CNY", "KRW", "CHF", "CAD", "AUD", "INR")

_PLAIN_NUMBER_RE = re.compile(rf"^{_NUM}$")
_GROUPED_RE = re.compile(r"^\d{1,3}(?:,\d{3})+(?:\.\d+)?$")
_FRACTION_RE = re.compile(rf"^({_NUM})\s+in\s+({_NUM})$", re.IGNORECASE)
_WORD_RE = re.compile(
    r"(?<![\w-])(?:one\s+hundred|" + "|".join(w for w in _WORD_NUMBERS) + r")(?![\w-])",
    re.IGNORECASE,
)


def _word_to_digits(match: re.Match) -> str:
    word = re.sub(r"\s+", " ", match.group(0).lower())
    if word == "one hundred":
        return "100"
    return str(_WORD_NUMBERS[word])


def _spell_out_digits(text: str) -> str:
    return _WORD_RE.sub(_word_to_digits, text)


def _to_float(num: str) -> float:
    num = num.strip()
    if "," in num:
        if not _GROUPED_RE.match(num):
            raise UnparsableNumber(f"malformed thousands grouping in {num!r}")
        num = num.replace(",", "")
    return float(num)


def normalize_number(token: str, *, percent_context: bool = False) -> float:
    """Normalize one numeric token to a real value.

    Accepts digit runs with comma grouping, a trailing percent sign,
    "N in M" fractions, and spelled-out numbers (zero through twenty and
    tens up to one hundred). With ``percent_context`` a fraction is scaled
    to the 0-100 scale, otherwise the raw ratio is returned.
    """
    token = _spell_out_digits(token.strip())
    frac = _FRACTION_RE.match(token)
    if frac:
        num, den = frac.group(1), frac.group(2)
        try:
            ratio = Fraction(num.replace(",", "")) / Fraction(den.replace(",", ""))
        except ZeroDivisionError:
            raise UnparsableNumber(f"zero denominator in {token!r}")
        return float(ratio * 100) if percent_context else float(ratio)
    if token.endswith("%"):
        token = token[:-1].strip()
    if not _PLAIN_NUMBER_RE.match(token):
        raise UnparsableNumber(f"no numeric reading for {token!r}")
    return _to_float(token)


# --- phrase parsing --------------------------------------------------------

_APPROX_RE = re.compile(r"\b(?:about|around|approximately|roughly|nearly|almost)\b", re.IGNORECASE)
_LOWER_BOUND_WORDS = r"(?:more\s+than|greater\s+than|larger\s+than|at\s+least|over|above|exceed(?:ed|s)?)"
_UPPER_BOUND_WORDS = r"(?:less\s+than|fewer\s+than|at\s+most|below|under)"

_CODE_ALT = "|".join(_CUR_CODES)
_CURRENCY_PREFIX = rf"(?:(?P<sym>[$€£])|(?P<code>{_CODE_ALT})\s+)?"
_TOKEN_RE = re.compile(rf"{_CURRENCY_PREFIX}(?P<num>{_NUM})(?P<pct>{_PCT})?")

_BRACKET_RANGE_RE = re.compile(
    rf"\[\s*(?P<sym>)(?P<code>)(?P<lo>{_NUM})(?P<lopct>)\s*[,;–—-]\s*"
    rf"(?P<hi>{_NUM})\s*\]\s*(?P<hipct>{_PCT})?",
)
_BETWEEN_RE = re.compile(
    rf"between\s+{_CURRENCY_PREFIX}(?P<lo>{_NUM})(?P<lopct>{_PCT})?\s+and\s+"
    rf"(?:[$€£]|(?:{_CODE_ALT})\s+)?(?P<hi>{_NUM})(?P<hipct>{_PCT})?",
    re.IGNORECASE,
)
_DASH_RANGE_RE = re.compile(
    rf"{_CURRENCY_PREFIX}(?P<lo>{_NUM})(?P<lopct>{_PCT})?\s*[-–—]\s*(?P<hi>{_NUM})(?P<hipct>{_PCT})?",
    re.IGNORECASE,
)
_TO_RANGE_RE = re.compile(
    rf"{_CURRENCY_PREFIX}(?P<lo>{_NUM})(?P<lopct>{_PCT})?\s+to\s+(?P<hi>{_NUM})(?P<hipct>{_PCT})?",
    re.IGNORECASE,
)
_IN_FRACTION_RE = re.compile(rf"(?P<num>{_NUM})\s+in\s+(?P<den>{_NUM})", re.IGNORECASE)
_DELTA_RE = re.compile(
    rf"(?P<num>{_NUM})\s*(?:%|percent(?:age)?(?:\s+points?)?)\s+"
    r"(?P<dir>higher|greater|larger|more|up|lower|less|smaller|fewer|down)\b",
    re.IGNORECASE,
)
_FACTOR_RE = re.compile(rf"\b(?:(?P<num>{_NUM})\s+times|(?P<twice>twice)|(?P<double>double))\b", re.IGNORECASE)
_WORD_BOUND_RE = re.compile(
    rf"(?P<dir>{_LOWER_BOUND_WORDS}|{_UPPER_BOUND_WORDS})\s+"
    rf"{_CURRENCY_PREFIX}(?P<num>{_NUM})(?P<pct>{_PCT})?",
    re.IGNORECASE,
)
_SYMBOL_BOUND_RE = re.compile(rf"(?P<dir>[<>]=?)\s*{_CURRENCY_PREFIX}(?P<num>{_NUM})(?P<pct>{_PCT})?")
_UPPER_RE = re.compile(_UPPER_BOUND_WORDS, re.IGNORECASE)

_YEAR_RE = re.compile(r"^(1[5-9]\d\d|20\d\d)$")


def _is_yearish(num: str, pct: str | None, sym: str | None, code: str | None) -> bool:
    return pct is None and sym is None and code is None and bool(_YEAR_RE.match(num))


def _unit_for(num: str, pct: str | None, sym: str | None, code: str | None, value: float) -> Unit:
    if pct:
        return PERCENT
    if sym:
        return currency(_CUR_SYMBOLS[sym])
    if code:
        return currency(code)
    return COUNT if float(value).is_integer() else UNITLESS


def _span_tokens(text: str) -> list[re.Match]:
    return [m for m in _TOKEN_RE.finditer(text) if m.group("num")]


def _leftover_tokens(text: str, consumed: tuple[int, int]) -> list[re.Match]:
    out = []
    for m in _span_tokens(text):
        if m.start() >= consumed[0] and m.end() <= consumed[1]:
            continue
        if _is_yearish(m.group("num"), m.group("pct"), m.group("sym"), m.group("code")):
            continue
        out.append(m)
    return out


def parse_quantity(phrase: str) -> ParsedQuantity:
    """Parse a short quote into a typed quantity.

    Bound words ("more than", "exceeded", "over", "above" / "below",
    "under", "less than") yield open ranges; "between X and Y", "X-Y" and
    "X to Y" yield closed ranges; approximation words set the Approximate
    modifier; "twice" / "N times" / "N percent higher" set a Comparative
    modifier. Raises UnparsableNumber when no numeric reading exists and
    AmbiguousPhrase when several conflicting readings do.
    """
    raw = _spell_out_digits(phrase.strip())
    modifier = APPROXIMATE if _APPROX_RE.search(raw) else NO_MODIFIER

    m = _BRACKET_RANGE_RE.search(raw)
    if m:
        return _range_from(m, modifier)

    text = raw.replace("[", " ").replace("]", " ")

    m = _BETWEEN_RE.search(text)
    if m:
        _ambiguous_unless_clean(text, m.span())
        return _range_from(m, modifier)

    m = _DASH_RANGE_RE.search(text)
    if m and not (
        _is_yearish(m.group("lo"), m.group("lopct"), m.group("sym"), m.group("code"))
        and _is_yearish(m.group("hi"), m.group("hipct"), None, None)
    ):
        _ambiguous_unless_clean(text, m.span())
        return _range_from(m, modifier)

    m = _TO_RANGE_RE.search(text)
    if m and not (
        _is_yearish(m.group("lo"), m.group("lopct"), m.group("sym"), m.group("code"))
        and _is_yearish(m.group("hi"), m.group("hipct"), None, None)
    ):
        _ambiguous_unless_clean(text, m.span())
        return _range_from(m, modifier)

    m = _IN_FRACTION_RE.search(text)
    if m:
        _ambiguous_unless_clean(text, m.span())
        value = normalize_number(f"{m.group('num')} in {m.group('den')}", percent_context=True)
        return exact(value, PERCENT, modifier)

    m = _DELTA_RE.search(text)
    if m:
        _ambiguous_unless_clean(text, m.span())
        magnitude = _to_float(m.group("num"))
        sign = 1.0 if m.group("dir").lower() in ("higher", "greater", "larger", "more", "up") else -1.0
        return exact(magnitude, PERCENT, comparative_delta(sign * magnitude))

    m = _FACTOR_RE.search(text)
    if m:
        _ambiguous_unless_clean(text, m.span())
        factor = 2.0 if (m.group("twice") or m.group("double")) else _to_float(m.group("num"))
        return exact(factor, UNITLESS, comparative_factor(factor))

    m = _WORD_BOUND_RE.search(text) or _SYMBOL_BOUND_RE.search(text)
    if m:
        _ambiguous_unless_clean(text, m.span())
        value = _to_float(m.group("num"))
        unit = _unit_for(m.group("num"), m.group("pct"), m.group("sym"), m.group("code"), value)
        direction = m.group("dir")
        is_upper = direction in ("<", "<=") or bool(_UPPER_RE.fullmatch(direction))
        return open_upper(value, unit, modifier) if is_upper else open_lower(value, unit, modifier)

    tokens = _span_tokens(text)
    if not tokens:
        raise UnparsableNumber(f"no numeric token in {phrase!r}")
    plain = [t for t in tokens if not _is_yearish(t.group("num"), t.group("pct"), t.group("sym"), t.group("code"))]
    if not plain:
        # Only year-like tokens: a single one reads as a plain number.
        if len(tokens) > 1:
            raise AmbiguousPhrase(f"multiple year readings in {phrase!r}")
        plain = tokens
    if len(plain) > 1:
        raise AmbiguousPhrase(f"multiple numeric readings in {phrase!r}")
    t = plain[0]
    value = _to_float(t.group("num"))
    unit = _unit_for(t.group("num"), t.group("pct"), t.group("sym"), t.group("code"), value)
    return exact(value, unit, modifier)


def _ambiguous_unless_clean(text: str, consumed: tuple[int, int]) -> None:
    leftovers = _leftover_tokens(text, consumed)
    if leftovers:
        raise AmbiguousPhrase(f"extra numeric reading {leftovers[0].group('num')!r} in {text!r}")


def _range_from(m: re.Match, modifier: Modifier) -> ParsedQuantity:
    lo = _to_float(m.group("lo"))
    hi = _to_float(m.group("hi"))
    if lo > hi:
        lo, hi = hi, lo
    pct = m.group("lopct") or m.group("hipct")
    if pct:
        unit = PERCENT
    elif m.group("sym"):
        unit = currency(_CUR_SYMBOLS[m.group("sym")])
    elif m.group("code"):
        unit = currency(m.group("code"))
    else:
        unit = COUNT if lo.is_integer() and hi.is_integer() else UNITLESS
    return closed_range(lo, hi, unit, modifier)


def apply_comparative(base: float, modifier: Modifier) -> float:
    """Apply a comparative modifier to a base value.

    Multiplier payloads scale the base; signed deltas shift it. The caller
    picks the direction (base - payload) when resolving a referent.
    """
    if modifier.tag != "comparative":
        raise ValueError("apply_comparative requires a comparative modifier")
    assert modifier.payload is not None
    if modifier.payload_kind == "factor":
        return base * modifier.payload
    return base + modifier.payload


def is_directly_convertible(q: ParsedQuantity) -> bool:
    """True when a quote's parse is a plain stated figure (uncertainty 0).

    Ranges, open bounds and modified readings need the inference stage.
    """
    return q.kind == EXACT and q.modifier.tag == "none"


def _fmt(v: float) -> str:
    v = float(v)
    if v.is_integer():
        return str(int(v))
    r = repr(v)
    if "e" in r or "E" in r:
        # repr falls back to scientific notation below 1e-4; expand it.
        return format(v, ".20f").rstrip("0")
    return r


def canonical_phrase(q: ParsedQuantity) -> str:
    """Render a quantity as a phrase the parser reads back equivalently."""
    if q.unit.kind == "percent":
        def num(v: float) -> str:
            return f"{_fmt(v)}%"
    elif q.unit.kind == "currency":
        def num(v: float) -> str:
            return f"{q.unit.code} {_fmt(v)}"
    else:
        def num(v: float) -> str:
            return _fmt(v)

    if q.modifier.tag == "comparative":
        payload = q.modifier.payload or 0.0
        if q.modifier.payload_kind == "factor":
            return f"{_fmt(payload)} times"
        direction = "higher" if payload > 0 else "lower"
        return f"{_fmt(abs(payload))}% {direction}"

    prefix = "about " if q.modifier.tag == "approximate" else ""
    if q.kind == CLOSED_RANGE:
        return f"{prefix}between {num(q.lo)} and {num(q.hi)}"
    if q.kind == OPEN_LOWER:
        return f"{prefix}more than {num(q.lo)}"
    if q.kind == OPEN_UPPER:
        return f"{prefix}less than {num(q.hi)}"
    return f"{prefix}{num(q.value)}"


# --- JSON projection (shared by the table schema and wire formats) ---------

def quantity_to_json(q: ParsedQuantity) -> dict:
    unit = q.unit.kind if q.unit.kind != "currency" else f"currency:{q.unit.code}"
    mod: dict | None = None
    if q.modifier.tag != "none":
        mod = {"tag": q.modifier.tag}
        if q.modifier.tag == "comparative":
            mod["payload"] = q.modifier.payload
            mod["payload_kind"] = q.modifier.payload_kind
    return {"kind": q.kind, "value": q.value, "lo": q.lo, "hi": q.hi, "unit": unit, "modifier": mod}


def unit_from_json(s: str) -> Unit:
    if s.startswith("currency:"):
        return currency(s.split(":", 1)[1])
    return Unit(s)


def quantity_from_json(d: dict) -> ParsedQuantity:
    mod = d.get("modifier")
    if mod is None:
        modifier = NO_MODIFIER
    elif mod["tag"] == "approximate":
        modifier = APPROXIMATE
    else:
        modifier = Modifier(mod["tag"], mod.get("payload"), mod.get("payload_kind"))
    return ParsedQuantity(
        kind=d["kind"],
        value=float(d["value"]),
        lo=None if d.get("lo") is None else float(d["lo"]),
        hi=None if d.get("hi") is None else float(d["hi"]),
        unit=unit_from_json(d["unit"]),
        modifier=modifier,
    )
