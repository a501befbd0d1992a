"""Small gate matrices and partial-matrix decompositions of rotations.

A rotation about axis P is split as ``A * f_a(theta) + B * f_b(theta)`` with
constant ``A = I``, ``B = P`` and scalar coefficients ``cos(theta/2)`` and
``-1j * sin(theta/2)``. All three rotations share the same coefficient
functions, which lets the expanded caches for different axes go through one
code path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import GateKind

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# MSb-0, control is the first (more significant) qubit
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)

_FIXED = {
    GateKind.H: _H,
    GateKind.X: _X,
    GateKind.Y: _Y,
    GateKind.Z: _Z,
    GateKind.CNOT: _CNOT,
    GateKind.CZ: _CZ,
}
for _m in _FIXED.values():
    _m.setflags(write=False)

_AXIS = {GateKind.RX: _X, GateKind.RY: _Y, GateKind.RZ: _Z}


def half_cos(theta):
    return np.cos(np.asarray(theta, dtype=float) / 2).astype(complex)


def minus_i_half_sin(theta):
    return -1j * np.sin(np.asarray(theta, dtype=float) / 2)


@dataclass(frozen=True)
class PartialDecomposition:
    kind: GateKind
    a: np.ndarray
    b: np.ndarray
    coeff_a: Callable = half_cos
    coeff_b: Callable = minus_i_half_sin

    def coefficients(self, theta) -> np.ndarray:
        """Stack ``(f_a, f_b)`` along the last axis; ``theta`` may be an array."""
        return np.stack([self.coeff_a(theta), self.coeff_b(theta)], axis=-1)

    def matrix(self, theta: float) -> np.ndarray:
        fa, fb = self.coefficients(theta)
        return self.a * fa + self.b * fb


def decompose(kind: GateKind) -> PartialDecomposition:
    if kind not in _AXIS:
        raise ValueError(f"{kind.name} is not a parametric rotation")
    return PartialDecomposition(kind, _I, _AXIS[kind])


def fixed_matrix(kind: GateKind) -> np.ndarray:
    if kind not in _FIXED:
        raise ValueError(f"{kind.name} is parametric; use decompose() or gate_matrix()")
    return _FIXED[kind]


def gate_matrix(kind: GateKind, theta: float | None = None) -> np.ndarray:
    """Full small matrix, with rotation entries written out directly."""
    if kind.parametric:
        if theta is None:
            raise ValueError(f"{kind.name} requires an angle")
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        if kind is GateKind.RX:
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if kind is GateKind.RY:
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)
    if theta is not None:
        raise ValueError(f"{kind.name} takes no angle")
    return _FIXED[kind].copy()
