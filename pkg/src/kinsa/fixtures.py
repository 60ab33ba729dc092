"""Reference robot tables and closed-form expressions bundled as data, plus a
small evaluator for trigonometric closed forms.

Expressions are sums of terms ``coef * f1 * f2 * ...`` where each factor is
``sin(...)`` or ``cos(...)`` of an integer combination of joint angles
``t1..t6``, optionally raised to a power (``cos(t3)^2``). An optional
``factor`` line multiplies the whole sum.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .model import RobotModel, load_robot

__all__ = [
    "AppendixEntry",
    "Expression",
    "FixtureError",
    "FixtureSet",
    "Term",
    "TrigFactor",
    "evaluate_fixture_expression",
    "load_fixtures",
    "parse_expression",
    "parse_term",
]

MAX_JOINTS = 6


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class TrigFactor:
    func: str  # "sin" or "cos"
    weights: tuple[int, ...]  # integer weight per joint t1..t6
    power: int = 1

    def __call__(self, q) -> float:
        arg = sum(w * q[i] for i, w in enumerate(self.weights) if w)
        value = math.sin(arg) if self.func == "sin" else math.cos(arg)
        return value**self.power


@dataclass(frozen=True)
class Term:
    coef: float
    factors: tuple[TrigFactor, ...] = ()

    def __call__(self, q) -> float:
        value = self.coef
        for f in self.factors:
            value *= f(q)
        return value


@dataclass(frozen=True)
class Expression:
    name: str
    terms: tuple[Term, ...]
    factor: Term = Term(1.0)

    def __call__(self, q) -> float:
        return evaluate_fixture_expression(self, q)


@dataclass(frozen=True)
class AppendixEntry:
    robot: str
    row: int  # 1-based
    col: int  # 1-based
    expression: Expression


@dataclass
class FixtureSet:
    dh_tables: dict[str, RobotModel]
    table4_pairs: list[tuple[int, int]]
    det11_terms: Expression
    our_det_terms: Expression
    appendix_entries: list[AppendixEntry] = field(default_factory=list)


_FACTOR_RE = re.compile(r"^(sin|cos)\(([^()]+)\)(?:\^(\d+))?$")
_LIN_RE = re.compile(r"([+-]?)(?:(\d+)\*)?t(\d)")


def _parse_linear(text: str) -> tuple[int, ...]:
    text = text.replace(" ", "")
    weights = [0] * MAX_JOINTS
    pos = 0
    for m in _LIN_RE.finditer(text):
        if m.start() != pos or (pos > 0 and not m.group(1)):
            raise FixtureError(f"malformed angle combination {text!r}")
        joint = int(m.group(3))
        if not 1 <= joint <= MAX_JOINTS:
            raise FixtureError(f"joint index out of range in {text!r}")
        k = int(m.group(2) or 1)
        weights[joint - 1] += -k if m.group(1) == "-" else k
        pos = m.end()
    if pos != len(text) or pos == 0:
        raise FixtureError(f"malformed angle combination {text!r}")
    return tuple(weights)


def _parse_factor(token: str) -> TrigFactor:
    m = _FACTOR_RE.match(token)
    if not m:
        raise FixtureError(f"malformed factor {token!r}")
    power = int(m.group(3) or 1)
    if power < 1:
        raise FixtureError(f"power must be positive in {token!r}")
    return TrigFactor(m.group(1), _parse_linear(m.group(2)), power)


def parse_term(text: str) -> Term:
    """Parse ``"<coef> <factor> <factor> ..."``, e.g. ``"0.1490 cos(t2) cos(t3)^2"``."""
    tokens = text.split()
    if not tokens:
        raise FixtureError("empty term")
    try:
        coef = float(tokens[0])
    except ValueError:
        raise FixtureError(f"bad coefficient {tokens[0]!r}") from None
    if not math.isfinite(coef):
        raise FixtureError(f"non-finite coefficient {tokens[0]!r}")
    return Term(coef, tuple(_parse_factor(t) for t in tokens[1:]))


def parse_expression(text: str) -> Expression:
    """Parse an ``expression`` block (``expression``/``factor``/``term`` lines)."""
    name = None
    factor = Term(1.0)
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        try:
            if keyword == "expression":
                name = rest.strip()
            elif keyword == "factor":
                factor = parse_term(rest)
            elif keyword == "term":
                terms.append(parse_term(rest))
            else:
                raise FixtureError(f"unknown keyword {keyword!r}")
        except FixtureError as exc:
            raise FixtureError(f"line {lineno}: {exc}") from None
    if name is None:
        raise FixtureError("missing expression header")
    return Expression(name, tuple(terms), factor)


def evaluate_fixture_expression(descriptor: Expression, q) -> float:
    """Value of a transcribed closed form at joint angles ``q`` (radians)."""
    if len(q) < MAX_JOINTS:
        q = list(q) + [0.0] * (MAX_JOINTS - len(q))
    return descriptor.factor(q) * math.fsum(term(q) for term in descriptor.terms)


def _read(name: str) -> str:
    return resources.files("kinsa").joinpath("data", "fixtures", name).read_text("utf-8")


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] != "pair" or len(line) != 3:
            raise FixtureError(f"bad pair line {raw!r}")
        pairs.append((int(line[1]), int(line[2])))
    return pairs


def _parse_entries(text: str) -> list[AppendixEntry]:
    entries = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split(maxsplit=4)
        if tokens[0] != "entry" or len(tokens) != 5:
            raise FixtureError(f"bad entry line {raw!r}")
        robot, row, col = tokens[1], int(tokens[2]), int(tokens[3])
        terms = tuple(parse_term(part) for part in tokens[4].split(";"))
        entries.append(AppendixEntry(robot, row, col, Expression(f"{robot}[{row},{col}]", terms)))
    return entries


DH_TABLE_FILES = {
    "our6": "our6_dh.txt",
    "wam6": "wam6_dh.txt",
    "wam6-wrist": "wam6_wrist_dh.txt",
    "wam6-code": "wam6_code_dh.txt",
}


def load_fixtures() -> FixtureSet:
    tables = {key: load_robot(_read(fname)) for key, fname in DH_TABLE_FILES.items()}
    return FixtureSet(
        dh_tables=tables,
        table4_pairs=_parse_pairs(_read("singular_pairs.txt")),
        det11_terms=parse_expression(_read("wam_det11.txt")),
        our_det_terms=parse_expression(_read("our_det.txt")),
        appendix_entries=_parse_entries(_read("jacobian_entries.txt")),
    )
