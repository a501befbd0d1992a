"""Width-expanded gate matrices, built once and reused every pass.

A single-qubit partial matrix ``P`` acting on qubit ``w`` of a ``width``-qubit
register expands to ``I_{2^w} (x) P (x) I_{2^(width-w-1)}``; the identity for
the qubits before the gate sits on the left. Two-qubit matrices are placed on
the adjacent pair ``(w, w+1)``; other pairs are routed by permuting qubit axes
in the executor.

Storage is dense on purpose. Expanded matrices are mostly zeros, but the
state they multiply is dense and sparse formats did not pay for themselves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import GateKind
from .gates import PartialDecomposition, decompose, fixed_matrix

DEFAULT_BUDGET = 2**26  # complex entries, ~1 GiB at complex128


class CacheBudgetError(MemoryError):
    """Expanded matrices would exceed the configured budget; split the circuit."""


def identity_kron(matrix: np.ndarray, w: int, width: int) -> np.ndarray:
    """``I_{2^w} (x) matrix (x) I_{2^(width - w - k)}`` for a k-qubit ``matrix``."""
    k = int(np.log2(matrix.shape[0]))
    if w < 0 or w + k > width:
        raise ValueError(f"{k}-qubit matrix at qubit {w} does not fit width {width}")
    before = np.eye(2**w, dtype=complex)
    after = np.eye(2 ** (width - w - k), dtype=complex)
    return np.kron(np.kron(before, matrix), after)


def _check_budget(entries: int, budget: int | None) -> None:
    if budget is not None and entries > budget:
        raise CacheBudgetError(
            f"expanded gate matrices need {entries} complex entries, budget is {budget}; "
            "use circuit splitting"
        )


@dataclass(frozen=True, eq=False)
class ExpandedGate:
    """Expanded matrices for one gate placement.

    Parametric gates keep the two expanded partials stacked in ``stacked``
    (shape ``(2, N, N)``) so evaluating at an angle is one contraction of the
    coefficient pair against the stack. Fixed gates keep one ``matrix``.
    """

    qubit: int
    width: int
    decomposition: PartialDecomposition | None = None
    stacked: np.ndarray | None = None
    matrix: np.ndarray | None = None

    @property
    def parametric(self) -> bool:
        return self.stacked is not None

    @property
    def matrix_a(self) -> np.ndarray:
        return self.stacked[0]

    @property
    def matrix_b(self) -> np.ndarray:
        return self.stacked[1]

    @property
    def entries(self) -> int:
        return (self.stacked if self.parametric else self.matrix).size

    def matrices(self, thetas) -> np.ndarray:
        """Full-width matrices for a 1-D array of angles, shape ``(k, N, N)``."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        n = 2**self.width
        coeffs = self.decomposition.coefficients(thetas)
        return (coeffs @ self.stacked.reshape(2, -1)).reshape(len(thetas), n, n)

    def matrix_at(self, theta: float | None = None) -> np.ndarray:
        if not self.parametric:
            if theta is not None:
                raise ValueError("fixed gate takes no angle")
            return self.matrix
        if theta is None:
            raise ValueError("parametric gate requires an angle")
        return self.matrices([theta])[0]


def expand(op: PartialDecomposition | np.ndarray, w: int, width: int, budget: int | None = DEFAULT_BUDGET) -> ExpandedGate:
    if isinstance(op, PartialDecomposition):
        _check_budget(2 * 4**width, budget)
        stacked = np.stack([identity_kron(op.a, w, width), identity_kron(op.b, w, width)])
        stacked.setflags(write=False)
        return ExpandedGate(w, width, decomposition=op, stacked=stacked)
    op = np.asarray(op, dtype=complex)
    _check_budget(4**width, budget)
    matrix = identity_kron(op, w, width)
    matrix.setflags(write=False)
    return ExpandedGate(w, width, matrix=matrix)


def _width_of(state: np.ndarray) -> int:
    n = state.shape[-1]
    width = n.bit_length() - 1
    if n != 1 << width:
        raise ValueError(f"state dimension {n} is not a power of two")
    return width


def apply_cached(cache: ExpandedGate, theta: float | None, state: np.ndarray) -> np.ndarray:
    """Apply an expanded gate to a ``(B, 2^width)`` state; returns a new array."""
    if _width_of(state) != cache.width:
        raise ValueError(f"state width {_width_of(state)} does not match cache width {cache.width}")
    return state @ cache.matrix_at(theta).T


class ExpansionStore:
    """Deduplicating store of expansions with a shared entry budget.

    Gates of the same kind on the same qubit at the same width share one
    expansion.
    """

    def __init__(self, budget: int | None = DEFAULT_BUDGET):
        self.budget = budget
        self.entries = 0
        self._items: dict[tuple[GateKind, int, int], ExpandedGate] = {}

    def __len__(self) -> int:
        return len(self._items)

    def get(self, kind: GateKind, w: int, width: int) -> ExpandedGate:
        key = (kind, w, width)
        item = self._items.get(key)
        if item is None:
            size = (2 if kind.parametric else 1) * 4**width
            remaining = None if self.budget is None else self.budget - self.entries
            _check_budget(size, remaining)
            op = decompose(kind) if kind.parametric else fixed_matrix(kind)
            item = expand(op, w, width, budget=None)
            self._items[key] = item
            self.entries += item.entries
        return item


@dataclass(frozen=True, eq=False)
class EmbeddingCache:
    """Expanded partials for an angle-embedding layer, one rotation per wire.

    ``stacked`` has shape ``(2, W, N, N)``: ``stacked[0]`` holds the
    A-partials of every wire, ``stacked[1]`` the B-partials.
    """

    axes: tuple[GateKind, ...]
    width: int
    stacked: np.ndarray = field(repr=False)

    @property
    def stacked_a(self) -> np.ndarray:
        return self.stacked[0]

    @property
    def stacked_b(self) -> np.ndarray:
        return self.stacked[1]


def build_embedding_cache(axes: Sequence[GateKind], width: int, budget: int | None = DEFAULT_BUDGET) -> EmbeddingCache:
    axes = tuple(axes)
    if len(axes) != width:
        raise ValueError(f"need one rotation kind per wire ({width}), got {len(axes)}")
    _check_budget(2 * width * 4**width, budget)
    n = 2**width
    stacked = np.empty((2, width, n, n), dtype=complex)
    for k, kind in enumerate(axes):
        d = decompose(kind)
        stacked[0, k] = identity_kron(d.a, k, width)
        stacked[1, k] = identity_kron(d.b, k, width)
    stacked.setflags(write=False)
    return EmbeddingCache(axes, width, stacked)


def embedding_forward(cache: EmbeddingCache, theta, state: np.ndarray, fuse: bool = False) -> np.ndarray:
    """Rotate wire k by ``theta[..., k]`` about its axis, for every wire.

    ``theta`` is either ``(W,)`` (shared by the whole batch) or ``(B, W)``
    (one angle vector per batch row). In the shared case the W full-width
    matrices are formed from the stacked partials and applied in wire order,
    or multiplied into one matrix first when ``fuse`` is set. In the per-row
    case the two constant partials are applied to the state and weighted
    per row, which avoids materialising B matrices per wire.
    """
    theta = np.asarray(theta, dtype=float)
    width = cache.width
    if theta.shape[-1] != width or theta.ndim not in (1, 2):
        raise ValueError(f"expected {width} angles per sample, got shape {theta.shape}")
    if _width_of(state) != width:
        raise ValueError("state width does not match embedding cache")
    fa = np.cos(theta / 2).astype(complex)
    fb = -1j * np.sin(theta / 2)
    n = 2**width

    if theta.ndim == 1:
        coeffs = np.stack([fa, fb])  # (2, W)
        mats = np.einsum("pk,pkij->kij", coeffs, cache.stacked)
        if fuse:
            total = np.eye(n, dtype=complex)
            for m in mats:
                total = m @ total
            return state @ total.T
        for m in mats:
            state = state @ m.T
        return state

    if theta.shape[0] != state.shape[0]:
        raise ValueError(f"batch of {theta.shape[0]} angle rows for {state.shape[0]} states")
    for k in range(width):
        state = fa[:, k, None] * (state @ cache.stacked[0, k].T) + fb[:, k, None] * (state @ cache.stacked[1, k].T)
    return state
