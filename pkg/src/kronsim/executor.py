"""Batched state-vector execution.

States are complex arrays of shape ``(B, 2**W)``, one row per batch sample,
MSb-0 indexed. Gates are applied as ``state @ M.T`` with ``M`` a full-width
(or group-width) matrix, so batch rows never mix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cache import (
    DEFAULT_BUDGET,
    ExpansionStore,
    build_embedding_cache,
    embedding_forward,
    identity_kron,
)
from .circuit import Circuit, GateKind, ParamStore, validate
from .gates import gate_matrix
from .splitter import SplitPlan, SubCircuitGroup, validate_plan

Angles = Sequence[float | None]


def zero_state(n_qubits: int, batch: int = 1) -> np.ndarray:
    if n_qubits < 1 or batch < 1:
        raise ValueError("n_qubits and batch must be positive")
    state = np.zeros((batch, 2**n_qubits), dtype=complex)
    state[:, 0] = 1.0
    return state


def n_qubits_of(state: np.ndarray) -> int:
    n = state.shape[-1]
    w = n.bit_length() - 1
    if n != 1 << w:
        raise ValueError(f"state dimension {n} is not a power of two")
    return w


def permute_qubits(state: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubit axes: qubit ``order[i]`` of the input becomes qubit ``i``."""
    w = len(order)
    lead = state.shape[:-1]
    t = state.reshape(-1, *([2] * w)).transpose(0, *(1 + np.asarray(order)))
    return t.reshape(*lead, 2**w)


def _inverse(order: Sequence[int]) -> list[int]:
    return [int(i) for i in np.argsort(order)]


def pair_routing(control: int, target: int, n_qubits: int) -> tuple[list[int] | None, int]:
    """Qubit order bringing a two-qubit gate onto an adjacent pair.

    Returns ``(order, w)``: after :func:`permute_qubits` with ``order`` the
    control sits at ``w`` and the target at ``w + 1``. ``order`` is None when
    the pair is already adjacent in control-target order.
    """
    if target == control + 1:
        return None, control
    others = [q for q in range(n_qubits) if q not in (control, target)]
    w = min(control, target, n_qubits - 2)
    return others[:w] + [control, target] + others[w:], w


def _apply(state: np.ndarray, matrix: np.ndarray, order: list[int] | None) -> np.ndarray:
    if order is None:
        return state @ matrix.T
    state = permute_qubits(state, order)
    return permute_qubits(state @ matrix.T, _inverse(order))


def _check_angles(circuit: Circuit, angles: Angles) -> None:
    if len(angles) != len(circuit.gates):
        raise ValueError(f"expected {len(circuit.gates)} gate angles, got {len(angles)}")


class FullWidthExecutor:
    """Runs every gate as a ``2^W x 2^W`` matrix.

    With ``naive=False`` the expanded partials come from a one-time cache and
    each pass only forms ``f_a(theta) * M_a + f_b(theta) * M_b``. With
    ``naive=True`` every use rebuilds the gate's full-width matrix through
    fresh Kronecker products; this is the baseline the cache is measured
    against.
    """

    def __init__(
        self,
        circuit: Circuit,
        *,
        naive: bool = False,
        budget: int | None = DEFAULT_BUDGET,
        embedding_axes: Sequence[GateKind] | None = None,
    ):
        validate(circuit).raise_if_invalid()
        self.circuit = circuit
        self.naive = naive
        self.n_qubits = circuit.n_qubits
        self.store = ExpansionStore(budget)
        self._routes: list[tuple[list[int] | None, int]] = []
        self._expanded = []
        for gate in circuit.gates:
            if gate.kind.n_qubits == 2:
                route = pair_routing(*gate.qubits, self.n_qubits)
            else:
                route = (None, gate.qubits[0])
            self._routes.append(route)
            if not naive:
                self._expanded.append(self.store.get(gate.kind, route[1], self.n_qubits))
        self.embedding_axes = None if embedding_axes is None else tuple(embedding_axes)
        self._embedding = None
        if self.embedding_axes is not None and not naive:
            remaining = None if budget is None else budget - self.store.entries
            self._embedding = build_embedding_cache(self.embedding_axes, self.n_qubits, remaining)

    @property
    def mode(self) -> str:
        return "naive" if self.naive else "cached"

    def gate_matrices(self, index: int, thetas: Sequence[float] | None = None) -> np.ndarray:
        """Full-width matrices for gate ``index``; ``(k, N, N)`` for k angles."""
        gate = self.circuit.gates[index]
        w = self._routes[index][1]
        if not self.naive:
            cached = self._expanded[index]
            if thetas is None:
                return cached.matrix[None]
            return cached.matrices(thetas)
        if thetas is None:
            return identity_kron(gate_matrix(gate.kind), w, self.n_qubits)[None]
        return np.stack([identity_kron(gate_matrix(gate.kind, t), w, self.n_qubits) for t in thetas])

    def embed(self, x: np.ndarray, state: np.ndarray | None = None) -> np.ndarray:
        """Encode per-sample angles ``x`` (shape ``(B, W)``) with one rotation per wire."""
        if self.embedding_axes is None:
            raise ValueError("executor was built without an embedding layer")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if state is None:
            state = zero_state(self.n_qubits, x.shape[0])
        if not self.naive:
            return embedding_forward(self._embedding, x, state)
        out = np.empty_like(state)
        for b in range(x.shape[0]):
            row = state[b : b + 1]
            for k, kind in enumerate(self.embedding_axes):
                m = identity_kron(gate_matrix(kind, x[b, k]), k, self.n_qubits)
                row = row @ m.T
            out[b] = row[0]
        return out

    def run(self, angles: Angles, state: np.ndarray) -> np.ndarray:
        _check_angles(self.circuit, angles)
        for i, theta in enumerate(angles):
            m = self.gate_matrices(i, None if theta is None else [theta])[0]
            state = _apply(state, m, self._routes[i][0])
        return state

    def run_shifted(self, angles: Angles, state: np.ndarray, targets: Sequence[int], shift: float) -> np.ndarray:
        """Run the circuit once plus twice per target gate with its angle shifted.

        Returns shape ``(1 + 2k, B, N)``: the unshifted result, then for each
        target (in the given order) the ``+shift`` and ``-shift`` results.
        All branches advance together; a shifted branch splits off the main
        one when its gate is reached, so shared prefixes are computed once.
        """
        _check_angles(self.circuit, angles)
        slot = {g: j for j, g in enumerate(targets)}
        if len(slot) != len(targets):
            raise ValueError("duplicate target gates")
        batch, n = state.shape
        buf = np.empty((1 + 2 * len(targets), batch, n), dtype=complex)
        buf[0] = state
        active = [0]  # buffer rows currently live, in buffer order
        for i, theta in enumerate(angles):
            route = self._routes[i][0]
            if i in slot:
                mats = self.gate_matrices(i, [theta, theta + shift, theta - shift])
                j = slot[i]
                main = buf[0]
                buf[1 + 2 * j] = _apply(main, mats[1], route)
                buf[2 + 2 * j] = _apply(main, mats[2], route)
                m = mats[0]
            else:
                m = self.gate_matrices(i, None if theta is None else [theta])[0]
            rows = np.asarray(active)
            buf[rows] = _apply(buf[rows].reshape(-1, n), m, route).reshape(len(rows), batch, n)
            if i in slot:
                active.extend([1 + 2 * slot[i], 2 + 2 * slot[i]])
        return buf


@dataclass
class GroupUnitary:
    group: SubCircuitGroup
    matrix: np.ndarray


class _GroupProgram:
    """Group-width expansions for one group, ready to be multiplied out."""

    def __init__(self, group: SubCircuitGroup, circuit: Circuit, store: ExpansionStore):
        self.group = group
        g = group.width
        self.steps = []
        for idx in group.gates:
            gate = circuit.gates[idx]
            local = [group.local_index(q) for q in gate.qubits]
            if len(local) == 2:
                order, w = pair_routing(local[0], local[1], g)
            else:
                order, w = None, local[0]
            self.steps.append((idx, store.get(gate.kind, w, g), order))

    def unitary(self, angles: Angles) -> GroupUnitary:
        # rows of S are images of basis states, so S = U^T
        s = np.eye(2**self.group.width, dtype=complex)
        for idx, expanded, order in self.steps:
            s = _apply(s, expanded.matrix_at(angles[idx]), order)
        return GroupUnitary(self.group, s.T)


def group_unitary(
    group: SubCircuitGroup,
    circuit: Circuit,
    params: ParamStore | Sequence[float] | None = None,
    budget: int | None = DEFAULT_BUDGET,
) -> GroupUnitary:
    """Product of the group's gates at group width, later gates on the left.

    Local qubit ``k`` is the k-th entry of ``group.qubits``.
    """
    values = params.values if isinstance(params, ParamStore) else params
    angles = circuit.gate_angles(values)
    return _GroupProgram(group, circuit, ExpansionStore(budget)).unitary(angles)


def to_group_layout(state: np.ndarray, qubits: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """Move ``qubits`` to the trailing axis: ``(B, 2^W) -> (B * 2^(W-g), 2^g)``."""
    w = n_qubits_of(state)
    for q in qubits:
        if not 0 <= q < w:
            raise ValueError(f"qubit {q} out of range for {w} qubits")
    order = [q for q in range(w) if q not in qubits] + list(qubits)
    return permute_qubits(state, order).reshape(-1, 2 ** len(qubits)), order


def from_group_layout(flat: np.ndarray, order: Sequence[int], batch: int) -> np.ndarray:
    return permute_qubits(flat.reshape(batch, 2 ** len(order)), _inverse(order))


def apply_group(state: np.ndarray, gu: GroupUnitary | np.ndarray, qubits: Sequence[int] | None = None) -> np.ndarray:
    """Apply a group unitary to its qubits of a ``(B, 2^W)`` state.

    ``gu`` may also be a bare matrix ``(2^g, 2^g)`` or a per-row stack
    ``(B, 2^g, 2^g)``, in which case ``qubits`` must be given.
    """
    if isinstance(gu, GroupUnitary):
        matrix, qubits = gu.matrix, gu.group.qubits
    else:
        matrix = gu
    batch = state.shape[0]
    flat, order = to_group_layout(state, qubits)
    if matrix.ndim == 2:
        flat = flat @ matrix.T
    else:
        flat = (flat.reshape(batch, -1, matrix.shape[-1]) @ matrix.transpose(0, 2, 1)).reshape(flat.shape)
    return from_group_layout(flat, order, batch)


class SplitExecutor:
    """Runs a circuit group by group according to a :class:`SplitPlan`.

    Only the parameter-independent group-width expansions are cached; group
    unitaries are rebuilt from them whenever angles change.
    """

    def __init__(
        self,
        circuit: Circuit,
        plan: SplitPlan,
        *,
        budget: int | None = DEFAULT_BUDGET,
        embedding_axes: Sequence[GateKind] | None = None,
    ):
        validate(circuit).raise_if_invalid()
        report = validate_plan(plan, circuit)
        if not report.ok:
            raise ValueError("invalid split plan: " + "; ".join(report.errors))
        self.circuit = circuit
        self.plan = plan
        self.n_qubits = circuit.n_qubits
        self.store = ExpansionStore(budget)
        self.programs = [_GroupProgram(g, circuit, self.store) for g in plan.groups]
        self._group_of = {idx: p for p, g in enumerate(plan.groups) for idx in g.gates}
        self.embedding_axes = None if embedding_axes is None else tuple(embedding_axes)
        if self.embedding_axes is not None:
            self._embedding = [self.store.get(kind, 0, 1) for kind in self.embedding_axes]

    @property
    def mode(self) -> str:
        return f"split-{self.plan.max_qubits}"

    def unitaries(self, angles: Angles) -> list[GroupUnitary]:
        _check_angles(self.circuit, angles)
        return [p.unitary(angles) for p in self.programs]

    def embed(self, x: np.ndarray, state: np.ndarray | None = None) -> np.ndarray:
        if self.embedding_axes is None:
            raise ValueError("executor was built without an embedding layer")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if state is None:
            state = zero_state(self.n_qubits, x.shape[0])
        for k, expanded in enumerate(self._embedding):
            state = apply_group(state, expanded.matrices(x[:, k]), (k,))
        return state

    @staticmethod
    def _run_unitaries(unitaries: list[GroupUnitary], state: np.ndarray) -> np.ndarray:
        for gu in unitaries:
            state = apply_group(state, gu)
        return state

    def run(self, angles: Angles, state: np.ndarray) -> np.ndarray:
        return self._run_unitaries(self.unitaries(angles), state)

    def run_shifted(self, angles: Angles, state: np.ndarray, targets: Sequence[int], shift: float) -> np.ndarray:
        base = self.unitaries(angles)
        out = np.empty((1 + 2 * len(targets), *state.shape), dtype=complex)
        out[0] = self._run_unitaries(base, state)
        for j, idx in enumerate(targets):
            p = self._group_of[idx]
            for k, sign in enumerate((1.0, -1.0)):
                shifted = list(angles)
                shifted[idx] = angles[idx] + sign * shift
                us = list(base)
                us[p] = self.programs[p].unitary(shifted)
                out[1 + 2 * j + k] = self._run_unitaries(us, state)
        return out


def make_executor(
    circuit: Circuit,
    plan: SplitPlan | None = None,
    *,
    naive: bool = False,
    budget: int | None = DEFAULT_BUDGET,
    embedding_axes: Sequence[GateKind] | None = None,
):
    if plan is not None:
        return SplitExecutor(circuit, plan, budget=budget, embedding_axes=embedding_axes)
    return FullWidthExecutor(circuit, naive=naive, budget=budget, embedding_axes=embedding_axes)


def run(
    circuit: Circuit,
    params: ParamStore | Sequence[float] | None = None,
    plan: SplitPlan | None = None,
    state: np.ndarray | None = None,
    *,
    budget: int | None = DEFAULT_BUDGET,
) -> np.ndarray:
    """Execute ``circuit`` from ``state`` (default ``|0...0>``).

    Without a plan every gate is applied at full width from the expansion
    cache; with a plan the groups are applied one after another.
    """
    values = params.values if isinstance(params, ParamStore) else params
    if state is None:
        state = zero_state(circuit.n_qubits)
    elif n_qubits_of(state) != circuit.n_qubits:
        raise ValueError("state width does not match circuit")
    if not circuit.gates:
        validate(circuit).raise_if_invalid()
        return state.copy()
    executor = make_executor(circuit, plan, budget=budget)
    return executor.run(circuit.gate_angles(values), np.asarray(state, dtype=complex))


def expectation_z(state: np.ndarray, wire: int) -> np.ndarray:
    w = n_qubits_of(state)
    if not 0 <= wire < w:
        raise ValueError(f"wire {wire} out of range for {w} qubits")
    probs = probabilities(state).reshape(*state.shape[:-1], 2**wire, 2, 2 ** (w - wire - 1))
    marg = probs.sum(axis=(-3, -1))
    return marg[..., 0] - marg[..., 1]


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2
