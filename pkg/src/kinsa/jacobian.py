"""Geometric Jacobian of revolute chains and the quantities derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .kinematics import forward_kinematics
from .model import RobotModel

__all__ = [
    "GeometricJacobian",
    "JacobianBlocks",
    "batch_determinants",
    "determinant",
    "finite_difference_jacobian",
    "geometric_jacobian",
    "manipulability",
    "partition",
    "rank",
    "singular_values",
]

TARGETS = ("full", "j11", "j22")


@dataclass(frozen=True)
class GeometricJacobian:
    """6 x n Jacobian; rows 0-2 map to linear velocity, rows 3-5 to angular."""

    matrix: np.ndarray
    q: np.ndarray

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:3]

    @property
    def angular(self) -> np.ndarray:
        return self.matrix[3:]

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class JacobianBlocks:
    j11: np.ndarray
    j12: np.ndarray
    j21: np.ndarray
    j22: np.ndarray

    def assemble(self) -> np.ndarray:
        return np.block([[self.j11, self.j12], [self.j21, self.j22]])


def _as_matrix(J) -> np.ndarray:
    return np.asarray(J.matrix if isinstance(J, GeometricJacobian) else J, dtype=float)


def geometric_jacobian(model: RobotModel, q) -> GeometricJacobian:
    chain = forward_kinematics(model, q)
    P = chain.end_position
    J = np.empty((6, model.n))
    J[:3] = np.cross(chain.axes, P - chain.origins).T
    J[3:] = chain.axes.T
    return GeometricJacobian(J, np.asarray(q, dtype=float).copy())


def partition(J) -> JacobianBlocks:
    m = _as_matrix(J)
    if m.shape != (6, 6):
        raise ValueError(f"block partition needs a 6x6 Jacobian, got {m.shape}")
    return JacobianBlocks(m[:3, :3], m[:3, 3:], m[3:, :3], m[3:, 3:])


def _vee(w: np.ndarray) -> np.ndarray:
    s = 0.5 * (w - w.T)
    return np.array([s[2, 1], s[0, 2], s[1, 0]])


def finite_difference_jacobian(model: RobotModel, q, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian built from forward kinematics alone."""
    if not h > 0:
        raise ValueError("step h must be positive")
    q = np.asarray(q, dtype=float)
    R0 = forward_kinematics(model, q).transforms[-1].rotation
    J = np.empty((6, model.n))
    for i in range(model.n):
        dq = np.zeros(model.n)
        dq[i] = h
        plus = forward_kinematics(model, q + dq).transforms[-1]
        minus = forward_kinematics(model, q - dq).transforms[-1]
        J[:3, i] = (plus.translation - minus.translation) / (2 * h)
        J[3:, i] = _vee((plus.rotation - minus.rotation) / (2 * h) @ R0.T)
    return J


def determinant(J) -> float:
    m = _as_matrix(J)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got {m.shape}")
    # LAPACK getrf: LU with partial pivoting
    return float(np.linalg.det(m))


def singular_values(J) -> np.ndarray:
    return np.linalg.svd(_as_matrix(J), compute_uv=False)


def rank(J, tol: float = 1e-9) -> int:
    """Numerical rank: singular values above ``tol * sigma_max``."""
    s = singular_values(J)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def manipulability(J) -> float:
    m = _as_matrix(J)
    return math.sqrt(max(np.linalg.det(m @ m.T), 0.0))


def batch_determinants(model: RobotModel, Q, target: str = "full", threads=None, backend=None):
    """Determinant of ``target`` ('full', 'j11', 'j22') for each row of ``Q``."""
    try:
        col = TARGETS.index(target)
    except ValueError:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}") from None
    return _backend.chain_dets(model, Q, threads=threads, backend=backend)[:, col]
