"""Partition a circuit into bounded-width groups of gates.

Two-qubit gates form the nodes of a dependency graph; an edge joins two of
them when they share a qubit and no other two-qubit gate on that qubit sits
between them. A greedy pass over each connected component (components in
order of their first gate, gates in circuit order) closes the current group
as soon as the next gate would push it past ``max_qubits``. Single-qubit
gates are then attached to the group holding the nearest two-qubit gate on
the same qubit, ties going to the earlier group. Qubits never touched by a
two-qubit gate get a width-1 group of their own.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import networkx as nx

from .circuit import Circuit


@dataclass
class DependencyGraph:
    nodes: list[int]  # circuit indices of two-qubit gates, in order
    edges: set[tuple[int, int]] = field(default_factory=set)  # pairs of node positions

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from(self.edges)
        return g


@dataclass
class SubCircuitGroup:
    qubits: tuple[int, ...]
    gates: list[int]

    @property
    def width(self) -> int:
        return len(self.qubits)

    def local_index(self, qubit: int) -> int:
        return self.qubits.index(qubit)


@dataclass
class SplitPlan:
    groups: list[SubCircuitGroup]
    max_qubits: int

    def to_dict(self) -> dict:
        return {
            "max_qubits": self.max_qubits,
            "groups": [{"qubits": list(g.qubits), "gates": list(g.gates)} for g in self.groups],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_dependency_graph(circuit: Circuit) -> DependencyGraph:
    nodes = [i for i, g in enumerate(circuit.gates) if g.kind.n_qubits == 2]
    last_on_qubit: dict[int, int] = {}
    edges = set()
    for pos, gate_idx in enumerate(nodes):
        for q in circuit.gates[gate_idx].qubits:
            if q in last_on_qubit:
                edges.add((last_on_qubit[q], pos))
            last_on_qubit[q] = pos
    return DependencyGraph(nodes, edges)


def greedy_split(graph: DependencyGraph, circuit: Circuit, max_qubits: int) -> SplitPlan:
    """Groups of two-qubit gates only; see :func:`attach_single_qubit_gates`."""
    if max_qubits < 2:
        raise ValueError("max_qubits must be >= 2 to hold a two-qubit gate")
    components = sorted(
        (sorted(c) for c in nx.weakly_connected_components(graph.to_networkx())),
        key=lambda c: c[0],
    )
    groups: list[SubCircuitGroup] = []
    for comp in components:
        qubits: set[int] = set()
        members: list[int] = []
        for pos in comp:
            gate_idx = graph.nodes[pos]
            touched = qubits | set(circuit.gates[gate_idx].qubits)
            if members and len(touched) > max_qubits:
                groups.append(SubCircuitGroup(tuple(sorted(qubits)), members))
                touched, members = set(circuit.gates[gate_idx].qubits), []
            qubits = touched
            members.append(gate_idx)
        if members:
            groups.append(SubCircuitGroup(tuple(sorted(qubits)), members))
    groups.sort(key=lambda g: g.gates[0])
    return SplitPlan(groups, max_qubits)


def attach_single_qubit_gates(plan: SplitPlan, circuit: Circuit) -> SplitPlan:
    """Return a new plan with every single-qubit gate assigned to a group."""
    groups = [SubCircuitGroup(g.qubits, list(g.gates)) for g in plan.groups]
    # per qubit: (circuit index, group position) of each two-qubit gate, in order
    anchors: dict[int, list[tuple[int, int]]] = {}
    for gpos, group in enumerate(groups):
        for idx in group.gates:
            for q in circuit.gates[idx].qubits:
                anchors.setdefault(q, []).append((idx, gpos))
    for lst in anchors.values():
        lst.sort()

    orphans: dict[int, list[int]] = {}
    for idx, gate in enumerate(circuit.gates):
        if gate.kind.n_qubits != 1:
            continue
        q = gate.qubits[0]
        if q not in anchors:
            orphans.setdefault(q, []).append(idx)
            continue
        # strict '<' keeps the earlier candidate on ties
        best = None
        for anchor_idx, gpos in anchors[q]:
            dist = abs(anchor_idx - idx)
            if best is None or dist < best[0]:
                best = (dist, gpos)
        groups[best[1]].gates.append(idx)

    for group in groups:
        group.gates.sort()

    # singletons go in circuit order relative to the other groups
    for q, idxs in sorted(orphans.items(), key=lambda kv: kv[1][0]):
        single = SubCircuitGroup((q,), idxs)
        pos = next((i for i, g in enumerate(groups) if _first_anchor(g, circuit) > idxs[0]), len(groups))
        groups.insert(pos, single)
    return SplitPlan(groups, plan.max_qubits)


def _first_anchor(group: SubCircuitGroup, circuit: Circuit) -> int:
    two = [i for i in group.gates if circuit.gates[i].kind.n_qubits == 2]
    return two[0] if two else group.gates[0]


def split_circuit(circuit: Circuit, max_qubits: int) -> SplitPlan:
    graph = build_dependency_graph(circuit)
    return attach_single_qubit_gates(greedy_split(graph, circuit, max_qubits), circuit)


@dataclass
class PlanReport:
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def validate_plan(plan: SplitPlan, circuit: Circuit, max_qubits: int | None = None) -> PlanReport:
    """Check coverage, exactly-once assignment, per-qubit order and widths."""
    report = PlanReport()
    limit = plan.max_qubits if max_qubits is None else max_qubits
    n_gates = len(circuit.gates)
    seen: dict[int, int] = {}
    for gpos, group in enumerate(plan.groups):
        if len(set(group.qubits)) != len(group.qubits):
            report.errors.append(f"group {gpos} lists a qubit twice")
        if group.width > limit and group.width > 1:
            report.errors.append(f"group {gpos} has width {group.width} > {limit}")
        for idx in group.gates:
            if not 0 <= idx < n_gates:
                report.errors.append(f"group {gpos} references unknown gate {idx}")
                continue
            if idx in seen:
                report.errors.append(f"gate {idx} assigned to groups {seen[idx]} and {gpos}")
            seen[idx] = gpos
            stray = set(circuit.gates[idx].qubits) - set(group.qubits)
            if stray:
                report.errors.append(f"gate {idx} touches qubits {sorted(stray)} outside group {gpos}")
    missing = sorted(set(range(n_gates)) - seen.keys())
    if missing:
        report.errors.append(f"gates not covered: {missing}")

    executed: dict[int, list[int]] = {}
    for group in plan.groups:
        for idx in group.gates:
            if 0 <= idx < n_gates:
                for q in circuit.gates[idx].qubits:
                    executed.setdefault(q, []).append(idx)
    for q in sorted(executed):
        expected = [i for i, g in enumerate(circuit.gates) if q in g.qubits]
        if executed[q] != expected:
            report.errors.append(f"order violation on qubit {q}")
    return report
