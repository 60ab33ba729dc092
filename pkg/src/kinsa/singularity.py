"""Locating and classifying kinematic singularities.

Grid scans evaluate one of three determinants (the full 6x6 Jacobian, the
arm block J11 or the wrist block J22) over an integer-degree lattice of the
swept joints. The hit threshold is absolute, so it carries units: m^3 for
J11, dimensionless for J22 and m^3 for the full Jacobian of a revolute arm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from .fixtures import Expression, load_fixtures
from .jacobian import TARGETS, geometric_jacobian, partition, singular_values
from .model import RobotModel, builtin

__all__ = [
    "ARM",
    "BOTH",
    "FULL_CHAIN",
    "WRIST",
    "Classification",
    "DecouplingError",
    "DetSurface",
    "NoSignChange",
    "REFERENCE_WAM_VARIANT",
    "RefinedRoot",
    "ScanConfig",
    "ScanResult",
    "SingularSample",
    "classify",
    "closed_form_residual",
    "cluster_hits",
    "decoupled_determinants",
    "grid_scan",
    "match_wam_variant",
    "refine",
    "refine_hit",
    "sample_at",
    "write_hits_csv",
    "write_surface_csv",
]

ARM = "arm"
WRIST = "wrist"
BOTH = "both"
FULL_CHAIN = "full-chain"

J12_TOLERANCE = 1e-9

# Variant whose J11 determinant reproduces the reference Det11 coefficients;
# confirmed by match_wam_variant() in the test suite.
REFERENCE_WAM_VARIANT = "wam6-code"


class DecouplingError(ValueError):
    """The model has no vanishing J12 block, so det(J) does not factor."""


class NoSignChange(ValueError):
    """The bracket handed to refine() shows no sign change of the determinant."""


def _normalize_target(target: str) -> str:
    t = target.lower()
    if t not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    return t


def decoupled_determinants(model: RobotModel, q) -> tuple[float, float]:
    """(det J11, det J22) for a wrist-centered 6-joint model."""
    if not model.wrist_centered:
        raise DecouplingError(f"{model.name} is not wrist-centered; J12 does not vanish")
    blocks = partition(geometric_jacobian(model, q))
    worst = float(np.abs(blocks.j12).max())
    if worst > J12_TOLERANCE:
        raise DecouplingError(
            f"{model.name} is flagged wrist-centered but max|J12| = {worst:.3e} at q"
        )
    return float(np.linalg.det(blocks.j11)), float(np.linalg.det(blocks.j22))


# -- closed forms -----------------------------------------------------------

_CLOSED_FORMS = {
    "wam-det11": ("det11_terms", "j11", REFERENCE_WAM_VARIANT),
    "our-full": ("our_det_terms", "full", "our6"),
}
_expressions: dict[str, Expression] = {}


def _closed_form(key: str) -> Expression:
    if key not in _CLOSED_FORMS:
        raise KeyError(f"unknown closed form {key!r}; expected one of {sorted(_CLOSED_FORMS)}")
    if not _expressions:
        fx = load_fixtures()
        for k, (attr, _, _) in _CLOSED_FORMS.items():
            _expressions[k] = getattr(fx, attr)
    return _expressions[key]


def _numeric_det(model: RobotModel, q, target: str) -> float:
    J = geometric_jacobian(model, q).matrix
    if target == "j11":
        return float(np.linalg.det(J[:3, :3]))
    if target == "j22":
        return float(np.linalg.det(J[3:6, 3:6]))
    return float(np.linalg.det(J))


def closed_form_residual(model_key: str, q, model: RobotModel | None = None) -> float:
    """|numeric determinant - reference closed form| at ``q``.

    ``model_key`` is ``"wam-det11"`` (arm block of a WAM variant) or
    ``"our-full"`` (full OUR Jacobian). ``model`` overrides the default robot.
    """
    expr = _closed_form(model_key)
    _, target, default = _CLOSED_FORMS[model_key]
    model = model or builtin(default)
    return abs(_numeric_det(model, q, target) - expr(list(q)))


def match_wam_variant(samples: int = 100, seed: int = 0, tol: float = 5e-3):
    """Compare both wrist-centered WAM variants against the reference Det11.

    Returns ``(matching_key_or_None, {key: max_residual})``; a key matches
    when its worst residual over the sweep is within ``tol`` and it is the
    only one that does.
    """
    rng = np.random.default_rng(seed)
    Q = rng.uniform(-math.pi, math.pi, size=(samples, 6))
    worst = {}
    for key in ("wam6-wrist", "wam6-code"):
        model = builtin(key)
        worst[key] = max(closed_form_residual("wam-det11", q, model) for q in Q)
    matching = [k for k, r in worst.items() if r <= tol]
    return (matching[0] if len(matching) == 1 else None), worst


# -- classification ---------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    label: str
    det: float
    det11: float | None
    det22: float | None
    min_singular_value: float
    max_singular_value: float

    @property
    def sigma_ratio(self) -> float:
        if self.max_singular_value == 0.0:
            return 0.0
        return self.min_singular_value / self.max_singular_value


def _label(model: RobotModel, det11, det22, threshold: float) -> str:
    if not model.wrist_centered or det11 is None:
        return FULL_CHAIN
    arm = abs(det11) <= threshold
    wrist = abs(det22) <= threshold
    if arm and wrist:
        return BOTH
    if arm:
        return ARM
    if wrist:
        return WRIST
    return FULL_CHAIN


def classify(model: RobotModel, q, threshold: float = 1e-6) -> Classification:
    """Attribute a (near-)singularity to the arm block, the wrist block, or
    the chain as a whole. Models without a decoupled wrist always report
    ``full-chain``."""
    J = geometric_jacobian(model, q).matrix
    s = singular_values(J)
    det = float(np.linalg.det(J)) if J.shape == (6, 6) else math.nan
    det11 = det22 = None
    if model.wrist_centered and J.shape == (6, 6):
        det11 = float(np.linalg.det(J[:3, :3]))
        det22 = float(np.linalg.det(J[3:, 3:]))
    return Classification(_label(model, det11, det22, threshold), det, det11, det22,
                          float(s[-1]), float(s[0]))


# -- grid scan --------------------------------------------------------------


@dataclass(frozen=True)
class ScanConfig:
    """Grid scan settings. Joint indices are 1-based; ``fixed`` maps joint
    index to radians for joints that are not swept (default 0)."""

    free_joints: tuple[int, ...]
    step: float = 1.0
    fixed: dict[int, float] = field(default_factory=dict)
    threshold: float = 1e-6
    target: str = "full"
    respect_limits: bool = False

    def validate(self, n: int) -> None:
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.free_joints:
            raise ValueError("at least one free joint is required")
        if len(set(self.free_joints)) != len(self.free_joints):
            raise ValueError("free joints must be distinct")
        for j in list(self.free_joints) + list(self.fixed):
            if not 1 <= j <= n:
                raise ValueError(f"joint index {j} outside 1..{n}")
        if not self.threshold >= 0:
            raise ValueError("threshold must be non-negative")
        _normalize_target(self.target)


@dataclass(frozen=True)
class SingularSample:
    q: np.ndarray  # radians
    det_value: float  # the scanned determinant
    det: float
    det11: float | None
    det22: float | None
    min_singular_value: float
    max_singular_value: float
    classification: str
    grid_index: tuple[int, ...] | None = None

    @property
    def q_deg(self) -> np.ndarray:
        return np.degrees(self.q)


@dataclass(frozen=True)
class DetSurface:
    joints: tuple[int, ...]
    axes: tuple[np.ndarray, ...]  # degrees
    values: np.ndarray  # shape = tuple(len(a) for a in axes)
    target: str


class ScanResult(NamedTuple):
    hits: list
    surface: DetSurface


def _axis(model: RobotModel, joint: int, config: ScanConfig) -> np.ndarray:
    count = int(math.ceil(360.0 / config.step - 1e-9))
    deg = np.arange(count, dtype=float) * config.step
    if config.respect_limits:
        lim = model.rows[joint - 1].limits
        lo, hi = math.degrees(lim.min), math.degrees(lim.max)
        # a grid angle is reachable if it or its 360-degree alias is in range
        keep = ((deg >= lo) & (deg <= hi)) | ((deg - 360.0 >= lo) & (deg - 360.0 <= hi))
        deg = deg[keep]
    return deg


def _base_q(model: RobotModel, config: ScanConfig) -> np.ndarray:
    q = np.zeros(model.n)
    for j, v in config.fixed.items():
        q[j - 1] = v
    return q


def sample_at(model: RobotModel, q, target: str, threshold: float,
              grid_index=None) -> SingularSample:
    target = _normalize_target(target)
    c = classify(model, q, threshold)
    if target == "j11":
        value = c.det11 if c.det11 is not None else _numeric_det(model, q, "j11")
    elif target == "j22":
        value = c.det22 if c.det22 is not None else _numeric_det(model, q, "j22")
    else:
        value = c.det
    return SingularSample(np.asarray(q, dtype=float).copy(), value, c.det, c.det11, c.det22,
                          c.min_singular_value, c.max_singular_value, c.label, grid_index)


def grid_scan(model: RobotModel, config: ScanConfig, threads=None, backend=None) -> ScanResult:
    """Evaluate the target determinant over the swept lattice.

    Points are visited row-major over ``free_joints`` (first joint slowest);
    any point with ``|det| < threshold`` becomes a hit. Hits and surface are
    identical for every worker count.
    """
    config.validate(model.n)
    target = _normalize_target(config.target)
    col = TARGETS.index(target)
    axes = tuple(_axis(model, j, config) for j in config.free_joints)
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))

    Q = np.tile(_base_q(model, config), (total, 1))
    if total:
        mesh = np.meshgrid(*[np.radians(a) for a in axes], indexing="ij")
        for j, grid in zip(config.free_joints, mesh):
            Q[:, j - 1] = grid.ravel()
        values = _backend.chain_dets(model, Q, threads=threads, backend=backend)[:, col]
    else:
        values = np.empty(0)
    surface = DetSurface(tuple(config.free_joints), axes, values.reshape(shape), target)

    hits = []
    for flat in np.flatnonzero(np.abs(values) < config.threshold):
        idx = tuple(int(i) for i in np.unravel_index(flat, shape))
        hits.append(sample_at(model, Q[flat], target, config.threshold, idx))
    return ScanResult(hits, surface)


def refine_hit(model: RobotModel, sample: SingularSample, joints, target: str,
               step: float = math.radians(1.0)) -> RefinedRoot:
    """Refine a grid hit along the first joint in ``joints`` that brackets a
    sign change; raises NoSignChange if none does."""
    failures = []
    for joint in joints:
        try:
            return refine(model, sample.q, joint, target, step=step)
        except NoSignChange as exc:
            failures.append(str(exc))
    raise NoSignChange("; ".join(failures))


def cluster_hits(hits: list, surface: DetSurface) -> list:
    """Merge hits that touch on the grid (including diagonals) and keep the
    minimum-|det| representative of each group, in grid order.

    Axes that cover the full circle wrap around.
    """
    shape = surface.values.shape
    periodic = [
        len(a) > 1 and math.isclose((a[1] - a[0]) * len(a), 360.0) and a[0] == 0.0
        for a in surface.axes
    ]
    index = {h.grid_index: k for k, h in enumerate(hits)}
    parent = list(range(len(hits)))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * len(shape), indexing="ij")).reshape(len(shape), -1).T
    for k, h in enumerate(hits):
        for off in offsets:
            nb = []
            for axis, (i, o) in enumerate(zip(h.grid_index, off)):
                j = i + int(o)
                if periodic[axis]:
                    j %= shape[axis]
                elif not 0 <= j < shape[axis]:
                    break
                nb.append(j)
            else:
                other = index.get(tuple(nb))
                if other is not None:
                    ra, rb = find(k), find(other)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)

    best = {}
    for k, h in enumerate(hits):
        r = find(k)
        if r not in best or abs(h.det_value) < abs(hits[best[r]].det_value):
            best[r] = k
    return [hits[k] for k in sorted(best.values())]


# -- refinement -------------------------------------------------------------


@dataclass(frozen=True)
class RefinedRoot:
    q: np.ndarray
    det_value: float
    bracket: tuple[float, float]
    iterations: int


def refine(model: RobotModel, q0, free_joint: int, target: str = "full",
           step: float = math.radians(1.0), xtol: float = 1e-14) -> RefinedRoot:
    """Bisect the target determinant along one joint (1-based index).

    The bracket is ``q0 +/- step``. Because a grid hit may sit between two
    close roots, the halves ``[q0 - step, q0]`` and ``[q0, q0 + step]`` are
    also tried; bisection then runs until the bracket is narrower than
    ``xtol`` (or stops shrinking in floating point) and the endpoint with the
    smaller |det| is returned.
    """
    target = _normalize_target(target)
    if not 1 <= free_joint <= model.n:
        raise ValueError(f"joint index {free_joint} outside 1..{model.n}")
    q0 = np.asarray(q0, dtype=float)
    j = free_joint - 1

    def f(x):
        q = q0.copy()
        q[j] = x
        return _numeric_det(model, q, target)

    center = float(q0[j])
    lo, hi = center - step, center + step
    flo, fc, fhi = f(lo), f(center), f(hi)
    if fc == 0.0:
        return RefinedRoot(q0.copy(), 0.0, (center, center), 0)
    if np.sign(flo) != np.sign(fhi):
        pass
    elif np.sign(flo) != np.sign(fc):
        hi, fhi = center, fc
    elif np.sign(fc) != np.sign(fhi):
        lo, flo = center, fc
    else:
        raise NoSignChange(
            f"determinant keeps its sign on [{math.degrees(lo):.6g}, {math.degrees(hi):.6g}] deg "
            f"along joint {free_joint}"
        )
    if flo == 0.0:
        hi, fhi = lo, flo
    if fhi == 0.0:
        lo, flo = hi, fhi

    iterations = 0
    while hi - lo >= xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        iterations += 1
        if fm == 0.0:
            lo = hi = mid
            flo = fhi = 0.0
            break
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    q = q0.copy()
    q[j] = x
    return RefinedRoot(q, fx, (lo, hi), iterations)


# -- CSV output -------------------------------------------------------------


def _num(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _deg(x: float) -> str:
    return repr(round(float(x), 10))


def write_hits_csv(hits: list, fh, n: int) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"q{i}_deg" for i in range(1, n + 1)]
               + ["det", "det11", "det22", "sigma_min", "class"])
    for h in hits:
        w.writerow([_deg(v) for v in np.degrees(h.q)]
                   + [_num(h.det), _num(h.det11), _num(h.det22),
                      _num(h.min_singular_value), h.classification])


def write_surface_csv(surface: DetSurface, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"theta{j}_deg" for j in surface.joints] + ["det"])
    mesh = np.meshgrid(*surface.axes, indexing="ij")
    cols = [m.ravel() for m in mesh]
    for k, value in enumerate(surface.values.ravel()):
        w.writerow([_deg(c[k]) for c in cols] + [_num(value)])
