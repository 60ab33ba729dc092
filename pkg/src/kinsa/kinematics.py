"""Forward kinematics for standard DH chains.

Rotation columns follow the (n, s, a) convention: column 3 of a frame's
rotation is its z axis, i.e. the axis of the next joint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DhRow, RobotModel

__all__ = [
    "FrameChain",
    "HomogeneousTransform",
    "alpha_trig",
    "dh_transform",
    "end_effector_pose",
    "forward_kinematics",
]

_HALF_PI = math.pi / 2
_SNAP_TOL = 1e-12
_QUARTER_TURNS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def alpha_trig(alpha: float) -> tuple[float, float]:
    """(cos, sin) of a link twist, exact at multiples of pi/2."""
    k = round(alpha / _HALF_PI)
    if abs(alpha - k * _HALF_PI) <= _SNAP_TOL:
        return _QUARTER_TURNS[k % 4]
    return math.cos(alpha), math.sin(alpha)


@dataclass(frozen=True)
class HomogeneousTransform:
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls) -> "HomogeneousTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m) -> "HomogeneousTransform":
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got {m.shape}")
        return cls(m[:3, :3].copy(), m[:3, 3].copy())

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def __matmul__(self, other: "HomogeneousTransform") -> "HomogeneousTransform":
        return HomogeneousTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "HomogeneousTransform":
        rt = self.rotation.T
        return HomogeneousTransform(rt, -rt @ self.translation)


@dataclass(frozen=True)
class FrameChain:
    """Cumulative frames of a chain evaluated at one configuration.

    ``transforms[i]`` is the pose of frame ``i + 1`` in the base frame.
    ``origins[i]`` and ``axes[i]`` are p_i and z_i for i = 0..n-1, so the
    base frame comes first and the end-effector frame is not included;
    ``end_position`` is the end-effector origin.
    """

    transforms: tuple[HomogeneousTransform, ...]
    origins: np.ndarray
    axes: np.ndarray
    end_position: np.ndarray


def dh_transform(row: DhRow, theta: float) -> HomogeneousTransform:
    if not math.isfinite(theta):
        raise ValueError(f"joint angle must be finite, got {theta}")
    t = theta + row.theta_offset
    ct, st = math.cos(t), math.sin(t)
    ca, sa = alpha_trig(row.alpha)
    rot = np.array(
        [
            [ct, -st * ca, st * sa],
            [st, ct * ca, -ct * sa],
            [0.0, sa, ca],
        ]
    )
    return HomogeneousTransform(rot, np.array([row.a * ct, row.a * st, row.d]))


def _check_q(model: RobotModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n,):
        raise ValueError(f"{model.name} expects {model.n} joint values, got shape {q.shape}")
    return q


def forward_kinematics(model: RobotModel, q) -> FrameChain:
    q = _check_q(model, q)
    current = HomogeneousTransform.identity()
    transforms = []
    origins = np.zeros((model.n, 3))
    axes = np.zeros((model.n, 3))
    for i, (row, theta) in enumerate(zip(model.rows, q)):
        origins[i] = current.translation
        axes[i] = current.rotation[:, 2]
        current = current @ dh_transform(row, float(theta))
        transforms.append(current)
    return FrameChain(tuple(transforms), origins, axes, current.translation.copy())


def end_effector_pose(model: RobotModel, q) -> HomogeneousTransform:
    return forward_kinematics(model, q).transforms[-1]
