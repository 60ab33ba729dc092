"""Robot models built from Denavit-Hartenberg tables.

A robot definition file looks like::

    # comment
    robot wam6-wrist wrist-centered
    joint 0      -pi/2  0    0
    joint 0.5518  0     0    0   -pi pi
    ...

Each ``joint`` line carries ``a alpha d theta_offset [min max]`` in meters and
radians. Angle fields also accept the exact tokens ``pi``, ``pi/2``, ``-pi/2``
and ``-pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "CATALOG",
    "DhRow",
    "JointLimits",
    "ModelError",
    "RobotModel",
    "builtin",
    "dump_robot",
    "load_robot",
    "load_robot_file",
    "normalize_angles",
    "validate",
]


class ModelError(ValueError):
    """Raised for malformed robot definitions or unknown catalog keys."""


@dataclass(frozen=True)
class JointLimits:
    min: float = -math.pi
    max: float = math.pi

    def contains(self, angle: float) -> bool:
        return self.min <= angle <= self.max


@dataclass(frozen=True)
class DhRow:
    """Standard (distal) DH parameters of one revolute joint."""

    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0
    limits: JointLimits = field(default_factory=JointLimits)


@dataclass(frozen=True)
class RobotModel:
    name: str
    rows: tuple[DhRow, ...]
    wrist_centered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def n(self) -> int:
        return len(self.rows)


def normalize_angles(q):
    """Wrap angles into (-pi, pi]."""
    out = []
    for v in q:
        w = math.remainder(v, 2 * math.pi)
        if w == -math.pi:
            w = math.pi
        out.append(w)
    return out


_ANGLE_TOKENS = {
    "pi": math.pi,
    "-pi": -math.pi,
    "pi/2": math.pi / 2,
    "-pi/2": -math.pi / 2,
}
_TOKEN_FOR_VALUE = {v: k for k, v in _ANGLE_TOKENS.items()}


def _parse_number(token: str, angle: bool, lineno: int) -> float:
    if angle and token in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[token]
    try:
        value = float(token)
    except ValueError:
        raise ModelError(f"line {lineno}: cannot parse number {token!r}") from None
    if not math.isfinite(value):
        raise ModelError(f"line {lineno}: non-finite value {token!r}")
    return value


def load_robot(text: str) -> RobotModel:
    """Parse a robot definition document."""
    name = None
    wrist_centered = False
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "robot":
            if name is not None:
                raise ModelError(f"line {lineno}: duplicate robot header")
            if len(tokens) not in (2, 3):
                raise ModelError(f"line {lineno}: expected 'robot <name> [wrist-centered]'")
            if len(tokens) == 3:
                if tokens[2] != "wrist-centered":
                    raise ModelError(f"line {lineno}: unknown robot flag {tokens[2]!r}")
                wrist_centered = True
            name = tokens[1]
        elif keyword == "joint":
            if name is None:
                raise ModelError(f"line {lineno}: joint before robot header")
            fields = tokens[1:]
            if len(fields) not in (4, 6):
                raise ModelError(
                    f"line {lineno}: joint expects 4 or 6 fields, got {len(fields)}"
                )
            a = _parse_number(fields[0], False, lineno)
            alpha = _parse_number(fields[1], True, lineno)
            d = _parse_number(fields[2], False, lineno)
            offset = _parse_number(fields[3], True, lineno)
            limits = JointLimits()
            if len(fields) == 6:
                lo = _parse_number(fields[4], True, lineno)
                hi = _parse_number(fields[5], True, lineno)
                if lo >= hi:
                    raise ModelError(f"line {lineno}: joint limits min >= max")
                limits = JointLimits(lo, hi)
            rows.append(DhRow(a, alpha, d, offset, limits))
        else:
            raise ModelError(f"line {lineno}: unknown keyword {keyword!r}")
    if name is None:
        raise ModelError("missing robot header")
    if not rows:
        raise ModelError("no joints")
    return RobotModel(name, tuple(rows), wrist_centered)


def load_robot_file(path) -> RobotModel:
    with open(path, encoding="utf-8") as fh:
        return load_robot(fh.read())


def _format(value: float, angle: bool) -> str:
    if angle and value in _TOKEN_FOR_VALUE:
        return _TOKEN_FOR_VALUE[value]
    return repr(float(value))


def dump_robot(model: RobotModel) -> str:
    """Serialize ``model`` so that ``load_robot`` reproduces it exactly."""
    header = f"robot {model.name}"
    if model.wrist_centered:
        header += " wrist-centered"
    lines = [header]
    for row in model.rows:
        parts = [
            _format(row.a, False),
            _format(row.alpha, True),
            _format(row.d, False),
            _format(row.theta_offset, True),
        ]
        if row.limits != JointLimits():
            parts += [_format(row.limits.min, True), _format(row.limits.max, True)]
        lines.append("joint " + " ".join(parts))
    return "\n".join(lines) + "\n"


def validate(model: RobotModel) -> list[str]:
    """Return a list of human-readable violations; empty means valid."""
    problems = []
    if model.n < 1:
        problems.append("no joints")
    for i, row in enumerate(model.rows, start=1):
        for fname in ("a", "alpha", "d", "theta_offset"):
            value = getattr(row, fname)
            if not math.isfinite(value):
                problems.append(f"row {i}: {fname} is not finite ({value})")
        lo, hi = row.limits.min, row.limits.max
        if not (math.isfinite(lo) and math.isfinite(hi)):
            problems.append(f"row {i}: joint limits not finite")
        elif lo >= hi:
            problems.append(f"row {i}: joint limits min >= max ({lo} >= {hi})")
    return problems


_PI = math.pi

# Catalog rows are written out by hand here; the packaged fixture tables are
# transcribed separately and compared against these in the test suite.
CATALOG = {
    "our6": RobotModel(
        "our6",
        (
            DhRow(0.0, _PI / 2, 0.0),
            DhRow(0.43, 0.0, 0.145),
            DhRow(0.336, 0.0, -0.145),
            DhRow(0.0, -_PI / 2, 0.115),
            DhRow(0.0, _PI / 2, 0.115),
            DhRow(0.0, 0.0, 0.115),
        ),
    ),
    "wam6": RobotModel(
        "wam6",
        (
            DhRow(0.0, -_PI / 2, 0.0),
            DhRow(math.sqrt(0.55**2 + 0.045**2), 0.0, 0.0),
            DhRow(-0.045, _PI / 2, 0.0),
            DhRow(0.0, -_PI / 2, 0.3),
            DhRow(0.0, _PI / 2, 0.0),
            DhRow(0.0, 0.0, 0.06),
        ),
    ),
    "wam6-wrist": RobotModel(
        "wam6-wrist",
        (
            DhRow(0.0, -_PI / 2, 0.0),
            DhRow(math.sqrt(0.55**2 + 0.045**2), 0.0, 0.0),
            DhRow(-0.045, _PI / 2, 0.0),
            DhRow(0.0, -_PI / 2, 0.3),
            DhRow(0.0, _PI / 2, 0.0),
            DhRow(0.0, 0.0, 0.0),
        ),
        wrist_centered=True,
    ),
    # Alternate WAM parameters that differ from the wam6 table in a2 and a3;
    # these reproduce the reference det(J11) coefficients.
    "wam6-code": RobotModel(
        "wam6-code",
        (
            DhRow(0.0, -_PI / 2, 0.0),
            DhRow(0.5518, 0.0, 0.0),
            DhRow(-0.45, _PI / 2, 0.0),
            DhRow(0.0, -_PI / 2, 0.3),
            DhRow(0.0, _PI / 2, 0.0),
            DhRow(0.0, 0.0, 0.0),
        ),
        wrist_centered=True,
    ),
}


def builtin(name: str) -> RobotModel:
    try:
        return CATALOG[name]
    except KeyError:
        raise ModelError(
            f"unknown robot {name!r}; choose from {', '.join(sorted(CATALOG))}"
        ) from None
