"""Circuit representation: gate kinds, gate instances, named parameters.

Qubit indexing is MSb-0: qubit 0 is the most significant bit of a basis
state index, so ``|q0 q1 ... q_{W-1}>`` is stored at index
``q0 * 2**(W-1) + ... + q_{W-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class GateKind(Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    CNOT = "cx"
    CZ = "cz"

    @property
    def parametric(self) -> bool:
        return self in _PARAMETRIC

    @property
    def n_qubits(self) -> int:
        return 2 if self in _TWO_QUBIT else 1


_PARAMETRIC = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})
_TWO_QUBIT = frozenset({GateKind.CNOT, GateKind.CZ})


@dataclass(frozen=True)
class GateInstance:
    """One gate application.

    ``param`` is either the name of a parameter in the circuit's
    :class:`ParamStore` or a fixed angle in radians. For CNOT/CZ the control
    qubit is listed first.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    param: str | float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


class ParamStore:
    """Ordered, uniquely named trainable angles.

    Each parameter carries a ``remap`` flag (whether weight remapping applies
    to it when enabled) and an ``unused`` flag that exempts it from the
    "referenced by some gate" check.
    """

    def __init__(self):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._values: list[float] = []
        self._remap: list[bool] = []
        self._unused: list[bool] = []

    def add(self, name: str, value: float = 0.0, *, remap: bool = True, unused: bool = False) -> int:
        if name in self._index:
            raise ValueError(f"duplicate parameter name {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        self._values.append(float(value))
        self._remap.append(bool(remap))
        self._unused.append(bool(unused))
        return self._index[name]

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> float:
        return self._values[self._index[name]]

    def __setitem__(self, name: str, value: float) -> None:
        self._values[self._index[name]] = float(value)

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def names(self) -> list[str]:
        return list(self._names)

    @property
    def values(self) -> np.ndarray:
        return np.array(self._values, dtype=float)

    @values.setter
    def values(self, new: Iterable[float]) -> None:
        new = [float(v) for v in new]
        if len(new) != len(self._names):
            raise ValueError(f"expected {len(self._names)} values, got {len(new)}")
        self._values = new

    @property
    def remap_mask(self) -> np.ndarray:
        return np.array(self._remap, dtype=bool)

    @property
    def unused_mask(self) -> np.ndarray:
        return np.array(self._unused, dtype=bool)

    def copy(self) -> "ParamStore":
        out = ParamStore()
        for name, v, r, u in zip(self._names, self._values, self._remap, self._unused):
            out.add(name, v, remap=r, unused=u)
        return out

    def __repr__(self) -> str:
        return f"ParamStore({dict(zip(self._names, self._values))!r})"


@dataclass(frozen=True)
class Circuit:
    """Gates over ``n_qubits`` wires, in execution order.

    The gate list is immutable; parameter values live in ``params`` and may
    be updated between runs.
    """

    n_qubits: int
    gates: tuple[GateInstance, ...] = ()
    params: ParamStore = field(default_factory=ParamStore)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    @property
    def num_params(self) -> int:
        return len(self.params)

    def gate_angles(self, values: Sequence[float] | np.ndarray | None = None) -> list[float | None]:
        """Per-gate angle in radians, resolving parameter references.

        ``values`` overrides the stored parameter values (same order as
        ``params.names``).
        """
        if values is None:
            values = self.params.values
        angles: list[float | None] = []
        for gate in self.gates:
            if gate.param is None:
                angles.append(None)
            elif isinstance(gate.param, str):
                angles.append(float(values[self.params.index(gate.param)]))
            else:
                angles.append(float(gate.param))
        return angles

    def param_gates(self) -> list[list[int]]:
        """For each parameter, the indices of gates referencing it."""
        out: list[list[int]] = [[] for _ in range(len(self.params))]
        for i, gate in enumerate(self.gates):
            if isinstance(gate.param, str) and gate.param in self.params:
                out[self.params.index(gate.param)].append(i)
        return out


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_invalid(self) -> None:
        if self.errors:
            raise ValueError("invalid circuit: " + "; ".join(self.errors))


def validate(circuit: Circuit) -> ValidationReport:
    report = ValidationReport()
    n = circuit.n_qubits
    if not isinstance(n, (int, np.integer)) or n < 1:
        report.errors.append(f"qubit count must be a positive integer, got {n!r}")
        return report

    referenced = set()
    for i, gate in enumerate(circuit.gates):
        kind = gate.kind
        if not isinstance(kind, GateKind):
            report.errors.append(f"unknown gate kind {kind!r} at gate {i}")
            continue
        if len(gate.qubits) != kind.n_qubits:
            report.errors.append(
                f"{kind.name} expects {kind.n_qubits} qubit(s), got {len(gate.qubits)} at gate {i}"
            )
            continue
        for q in gate.qubits:
            if not 0 <= q < n:
                report.errors.append(f"qubit index out of range: {q} not in [0, {n}) at gate {i}")
        if kind.n_qubits == 2 and gate.qubits[0] == gate.qubits[1]:
            report.errors.append(f"control equals target at gate {i}")
        if kind.parametric:
            if gate.param is None:
                report.errors.append(f"{kind.name} requires a parameter at gate {i}")
            elif isinstance(gate.param, str):
                if gate.param not in circuit.params:
                    report.errors.append(f"unknown parameter {gate.param!r} at gate {i}")
                referenced.add(gate.param)
            elif not np.isfinite(gate.param):
                report.errors.append(f"non-finite angle at gate {i}")
        elif gate.param is not None:
            report.errors.append(f"{kind.name} takes no parameter at gate {i}")

    for name, unused in zip(circuit.params.names, circuit.params.unused_mask):
        if name not in referenced and not unused:
            report.errors.append(f"parameter {name!r} is not referenced by any gate")
    return report


def _init_value(rng: np.random.Generator | None) -> float:
    return 0.0 if rng is None else float(rng.uniform(-np.pi, np.pi))


def ansatz_su2(n_qubits: int, layers: int, seed: int | None = None) -> Circuit:
    """Hardware-efficient SU(2) ansatz.

    Each layer applies RY then RZ on every qubit followed by a CNOT chain
    0->1->...->W-1. With ``seed`` the weights are drawn uniformly from
    [-pi, pi); otherwise they start at zero.
    """
    if n_qubits < 2:
        raise ValueError("su2 ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    rng = None if seed is None else np.random.default_rng(seed)
    params = ParamStore()
    gates = []
    for layer in range(layers):
        for q in range(n_qubits):
            for kind in (GateKind.RY, GateKind.RZ):
                name = f"l{layer}.{kind.value}{q}"
                params.add(name, _init_value(rng))
                gates.append(GateInstance(kind, (q,), name))
        for q in range(n_qubits - 1):
            gates.append(GateInstance(GateKind.CNOT, (q, q + 1)))
    return Circuit(n_qubits, gates, params)


def ansatz_strongly_entangling(n_qubits: int, layers: int, r: int = 1, seed: int | None = None) -> Circuit:
    """Strongly entangling layers: RZ RY RZ per qubit, then a CNOT ring
    ``q_i -> q_{(i+r) mod W}``."""
    if n_qubits < 2:
        raise ValueError("strongly entangling ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if not 1 <= r < n_qubits:
        raise ValueError(f"range r must satisfy 1 <= r < {n_qubits}, got {r}")
    rng = None if seed is None else np.random.default_rng(seed)
    params = ParamStore()
    gates = []
    for layer in range(layers):
        for q in range(n_qubits):
            for j, kind in enumerate((GateKind.RZ, GateKind.RY, GateKind.RZ)):
                name = f"l{layer}.q{q}.{j}"
                params.add(name, _init_value(rng))
                gates.append(GateInstance(kind, (q,), name))
        for q in range(n_qubits):
            gates.append(GateInstance(GateKind.CNOT, (q, (q + r) % n_qubits)))
    return Circuit(n_qubits, gates, params)


ANSATZE = {"su2": ansatz_su2, "strongly": ansatz_strongly_entangling}


def circuit_to_dict(circuit: Circuit) -> dict:
    """JSON-ready dump: qubit count, gates, and parameter table."""
    return {
        "n_qubits": circuit.n_qubits,
        "gates": [
            {"kind": g.kind.value, "qubits": list(g.qubits), **({} if g.param is None else {"param": g.param})}
            for g in circuit.gates
        ],
        "params": [
            {"name": n, "value": float(v), "remap": bool(r), "unused": bool(u)}
            for n, v, r, u in zip(
                circuit.params.names, circuit.params.values, circuit.params.remap_mask, circuit.params.unused_mask
            )
        ],
    }


def circuit_from_dict(data: dict) -> Circuit:
    params = ParamStore()
    for p in data.get("params", []):
        params.add(p["name"], p.get("value", 0.0), remap=p.get("remap", True), unused=p.get("unused", False))
    gates = [GateInstance(GateKind(g["kind"]), tuple(g["qubits"]), g.get("param")) for g in data["gates"]]
    return Circuit(int(data["n_qubits"]), gates, params)
