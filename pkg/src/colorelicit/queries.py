"""Query and answer contract between samplers and respondents.

Four query kinds, one answer kind each: report a full color, judge a
match, choose between two options, or fill one missing dimension. Prompt
rendering interpolates objects and color codes into fixed instruction
templates; parsing is deliberately tolerant of decoration around the
expected token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .colors import DIMENSIONS, HslColor, canonicalize
from .errors import MalformedAnswer


@dataclass(frozen=True)
class ReportColor:
    object: str

    def __post_init__(self):
        _require_object(self.object)


@dataclass(frozen=True)
class MatchJudgment:
    object: str
    color: HslColor

    def __post_init__(self):
        _require_object(self.object)


@dataclass(frozen=True)
class PairwiseChoice:
    # Self-comparison (option_a == option_b) is allowed; the respondent
    # must still answer.
    object: str
    option_a: HslColor
    option_b: HslColor

    def __post_init__(self):
        _require_object(self.object)


@dataclass(frozen=True)
class DimensionFill:
    object: str
    known: tuple[tuple[str, int], ...]
    missing: str

    def __post_init__(self):
        _require_object(self.object)
        if self.missing not in DIMENSIONS:
            raise ValueError(f"unknown missing dimension {self.missing!r}")
        expected = tuple(d for d in DIMENSIONS if d != self.missing)
        if tuple(d for d, _ in self.known) != expected:
            raise ValueError(
                f"known dimensions must be {expected} in order, got {self.known!r}"
            )
        object.__setattr__(
            self, "known", tuple((d, int(v)) for d, v in self.known)
        )

    @classmethod
    def from_state(cls, obj: str, state: HslColor, missing: str) -> "DimensionFill":
        known = tuple((d, state.value(d)) for d in DIMENSIONS if d != missing)
        return cls(obj, known, missing)

    def known_value(self, dim: str) -> int:
        for d, v in self.known:
            if d == dim:
                return v
        raise KeyError(dim)


Query = Union[ReportColor, MatchJudgment, PairwiseChoice, DimensionFill]


@dataclass(frozen=True)
class ColorCode:
    color: HslColor


@dataclass(frozen=True)
class YesNo:
    value: bool


@dataclass(frozen=True)
class Choice:
    option: str  # "A" or "B"

    def __post_init__(self):
        if self.option not in ("A", "B"):
            raise ValueError(f"choice must be 'A' or 'B', got {self.option!r}")


@dataclass(frozen=True)
class DimensionValue:
    value: int


Answer = Union[ColorCode, YesNo, Choice, DimensionValue]


def _require_object(obj: str) -> None:
    if not isinstance(obj, str) or not obj:
        raise ValueError(f"object must be a nonempty string, got {obj!r}")


REPORT_TEMPLATE = (
    "You are a participant in a color judgment task. You will be asked to "
    "describe an object's color in each question. Your objective is to "
    "generate an apt color code in HSL format to match the given object as "
    "well as possible. Remember, it’s essential to answer the question "
    "with a single HSL code, even if the generated color or the object might "
    "seem unusual at times. Please limit your response to just the three "
    "values of the HSL code, for example, 'h, s, l'. What color matches the "
    "following object: {object}."
)

MATCH_TEMPLATE = (
    "You are a participant in a color judgment task. You will see a question "
    "about whether a color (represented in HSL format) matches an object. "
    "Simply answer either 'yes' or 'no' based on your interpretation of the "
    "object’s color in the question. Does the color {code} match the "
    "following object: {object}?"
)

CHOICE_TEMPLATE = (
    "You are a participant in a color choice task. You will see a question "
    "with two color options in HSL format. Simply choose either Option A or "
    "Option B. Remember, it’s essential to pick one color that better "
    "matches the object in the question, even if the choices might seem "
    "unusual at times. Please limit your response to just 'A' or 'B'. Which "
    "color better matches the following object: {object}. "
    "Option A{code_a} or Option B{code_b}?"
)

FILL_TEMPLATE = (
    "You are a participant in a color judgment task. You will see an object "
    "and a color code in HSL format, however, one dimension of the given HSL "
    "color code is unknown. Your objective is to assign an apt integer to "
    "the unknown dimension to make the HSL color code match the given object "
    "as well as possible. Remember, it’s essential to complete the "
    "color, even if the generated color might seem unusual at times. Please "
    "limit your response to just the value you'd like to assign to the "
    "unknown dimension. Adjust the unknown dimension of HSL color to match "
    "the following object as well as possible: {object}. Color: {code}"
)


def color_code(c: HslColor) -> str:
    return f"[{c.h}, {c.s}, {c.l}]"


def _fill_code(q: DimensionFill) -> str:
    slots = []
    for dim in DIMENSIONS:
        slots.append("'unknown'" if dim == q.missing else str(q.known_value(dim)))
    return "[" + ", ".join(slots) + "]"


def render_prompt(q: Query) -> str:
    """Instruction text for a query, options in the order given."""
    if isinstance(q, ReportColor):
        return REPORT_TEMPLATE.format(object=q.object)
    if isinstance(q, MatchJudgment):
        return MATCH_TEMPLATE.format(code=color_code(q.color), object=q.object)
    if isinstance(q, PairwiseChoice):
        return CHOICE_TEMPLATE.format(
            object=q.object,
            code_a=color_code(q.option_a),
            code_b=color_code(q.option_b),
        )
    if isinstance(q, DimensionFill):
        return FILL_TEMPLATE.format(object=q.object, code=_fill_code(q))
    raise TypeError(f"not a query: {q!r}")


_NUMBER_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")
_INT_RE = re.compile(r"[-+]?\d+")
_WORD_RE = re.compile(r"[a-z]+")
_AB_RE = re.compile(r"\b([AB])\b")


def parse_answer(q: Query, raw: str) -> Answer:
    """Parse a reply into the answer kind matching the query.

    Tolerates surrounding punctuation and labels ("Option A", "[0, 97, 44]",
    "Yes."). Raises MalformedAnswer when the reply does not contain exactly
    one unambiguous answer token.
    """
    if not isinstance(raw, str):
        raise MalformedAnswer(f"reply must be text, got {type(raw).__name__}")
    text = raw.strip()
    if isinstance(q, ReportColor):
        numbers = _NUMBER_RE.findall(text)
        if len(numbers) != 3:
            raise MalformedAnswer(f"expected three HSL values, got {raw!r}")
        return ColorCode(canonicalize(*(float(n) for n in numbers)))
    if isinstance(q, MatchJudgment):
        words = set(_WORD_RE.findall(text.lower()))
        has_yes, has_no = "yes" in words, "no" in words
        if has_yes == has_no:
            raise MalformedAnswer(f"expected yes or no, got {raw!r}")
        return YesNo(has_yes)
    if isinstance(q, PairwiseChoice):
        letters = set(_AB_RE.findall(text))
        if len(letters) != 1:
            raise MalformedAnswer(f"expected a single 'A' or 'B', got {raw!r}")
        return Choice(letters.pop())
    if isinstance(q, DimensionFill):
        ints = _INT_RE.findall(text)
        if len(ints) != 1:
            raise MalformedAnswer(f"expected a lone integer, got {raw!r}")
        return DimensionValue(int(ints[0]))
    raise TypeError(f"not a query: {q!r}")


def canonical_answer_text(a: Answer) -> str:
    """The plain reply text an ideally terse respondent would give."""
    if isinstance(a, ColorCode):
        return f"{a.color.h}, {a.color.s}, {a.color.l}"
    if isinstance(a, YesNo):
        return "yes" if a.value else "no"
    if isinstance(a, Choice):
        return a.option
    if isinstance(a, DimensionValue):
        return str(a.value)
    raise TypeError(f"not an answer: {a!r}")


_QUERY_KINDS = {
    ReportColor: "report_color",
    MatchJudgment: "match_judgment",
    PairwiseChoice: "pairwise_choice",
    DimensionFill: "dimension_fill",
}

_ANSWER_KINDS = {
    ColorCode: "color_code",
    YesNo: "yes_no",
    Choice: "choice",
    DimensionValue: "dimension_value",
}


def query_to_dict(q: Query) -> dict:
    kind = _QUERY_KINDS[type(q)]
    out: dict = {"kind": kind, "object": q.object}
    if isinstance(q, MatchJudgment):
        out["color"] = list(q.color.as_tuple())
    elif isinstance(q, PairwiseChoice):
        out["option_a"] = list(q.option_a.as_tuple())
        out["option_b"] = list(q.option_b.as_tuple())
    elif isinstance(q, DimensionFill):
        out["known"] = {d: v for d, v in q.known}
        out["missing"] = q.missing
    return out


def query_from_dict(data: dict) -> Query:
    kind = data["kind"]
    obj = data["object"]
    if kind == "report_color":
        return ReportColor(obj)
    if kind == "match_judgment":
        return MatchJudgment(obj, HslColor(*data["color"]))
    if kind == "pairwise_choice":
        return PairwiseChoice(obj, HslColor(*data["option_a"]), HslColor(*data["option_b"]))
    if kind == "dimension_fill":
        missing = data["missing"]
        known = tuple(
            (d, int(data["known"][d])) for d in DIMENSIONS if d != missing
        )
        return DimensionFill(obj, known, missing)
    raise ValueError(f"unknown query kind {kind!r}")


def answer_to_dict(a: Answer) -> dict:
    kind = _ANSWER_KINDS[type(a)]
    if isinstance(a, ColorCode):
        return {"kind": kind, "color": list(a.color.as_tuple())}
    if isinstance(a, YesNo):
        return {"kind": kind, "value": a.value}
    if isinstance(a, Choice):
        return {"kind": kind, "option": a.option}
    return {"kind": kind, "value": a.value}


def answer_from_dict(data: dict) -> Answer:
    kind = data["kind"]
    if kind == "color_code":
        return ColorCode(HslColor(*data["color"]))
    if kind == "yes_no":
        return YesNo(bool(data["value"]))
    if kind == "choice":
        return Choice(data["option"])
    if kind == "dimension_value":
        return DimensionValue(int(data["value"]))
    raise ValueError(f"unknown answer kind {kind!r}")
