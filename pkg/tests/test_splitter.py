import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kronsim.circuit import ansatz_strongly_entangling, ansatz_su2
from kronsim.executor import run
from kronsim.splitter import (
    SplitPlan,
    SubCircuitGroup,
    attach_single_qubit_gates,
    build_dependency_graph,
    greedy_split,
    split_circuit,
    validate_plan,
)
from oracles import circuit_of, random_circuit, run_dense


def brute_force_edges(circuit):
    """Pairwise check: u -> v iff they share a qubit and no two-qubit gate on it sits between."""
    nodes = [i for i, g in enumerate(circuit.gates) if g.kind.n_qubits == 2]
    edges = set()
    for a, u in enumerate(nodes):
        for b, v in enumerate(nodes):
            if b <= a:
                continue
            for q in set(circuit.gates[u].qubits) & set(circuit.gates[v].qubits):
                between = [w for w in nodes if u < w < v and q in circuit.gates[w].qubits]
                if not between:
                    edges.add((a, b))
    return edges


def _groups(plan):
    return [(set(g.qubits), g.gates) for g in plan.groups]


def cnot_chain(n_qubits):
    return circuit_of(n_qubits, *[("cx", q, q + 1) for q in range(n_qubits - 1)])


class TestDependencyGraph:
    def test_disjoint_pair(self):
        graph = build_dependency_graph(circuit_of(5, ("cx", 0, 1), ("cx", 1, 2), ("cx", 3, 4)))
        assert graph.nodes == [0, 1, 2]
        assert graph.edges == {(0, 1)}

    def test_no_two_qubit_gates(self):
        graph = build_dependency_graph(circuit_of(2, ("h", 0), ("rx", 1, 0.2)))
        assert graph.nodes == [] and graph.edges == set()

    def test_single_qubit_gates_do_not_break_succession(self):
        graph = build_dependency_graph(circuit_of(2, ("cx", 0, 1), ("rx", 1, 0.3), ("cx", 0, 1)))
        assert graph.nodes == [0, 2]
        assert graph.edges == {(0, 1)}

    def test_cz_counts_as_node(self):
        graph = build_dependency_graph(circuit_of(3, ("cz", 0, 1), ("cx", 1, 2)))
        assert graph.edges == {(0, 1)}

    def test_is_acyclic_in_circuit_order(self):
        graph = build_dependency_graph(ansatz_strongly_entangling(5, 2, 2))
        assert all(u < v for u, v in graph.edges)

    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), w=st.integers(2, 8), n=st.integers(0, 40))
    def test_matches_brute_force(self, seed, w, n):
        c = random_circuit(np.random.default_rng(seed), w, n, two_qubit_fraction=0.5)
        assert build_dependency_graph(c).edges == brute_force_edges(c)


class TestGreedy:
    def test_disjoint_pair(self):
        c = circuit_of(5, ("cx", 0, 1), ("cx", 1, 2), ("cx", 3, 4))
        plan = greedy_split(build_dependency_graph(c), c, 3)
        assert _groups(plan) == [({0, 1, 2}, [0, 1]), ({3, 4}, [2])]

    def test_chain_closes_group(self):
        c = cnot_chain(4)
        plan = greedy_split(build_dependency_graph(c), c, 3)
        assert _groups(plan) == [({0, 1, 2}, [0, 1]), ({2, 3}, [2])]

    @pytest.mark.parametrize("g", [2, 3, 6])
    def test_single_cnot(self, g):
        c = circuit_of(2, ("cx", 1, 0))
        plan = greedy_split(build_dependency_graph(c), c, g)
        assert _groups(plan) == [({0, 1}, [0])]

    def test_rejects_width_below_two(self):
        c = circuit_of(2, ("cx", 0, 1))
        with pytest.raises(ValueError):
            greedy_split(build_dependency_graph(c), c, 1)
        with pytest.raises(ValueError):
            split_circuit(c, 1)

    def test_qubit_tuples_sorted(self):
        c = circuit_of(3, ("cx", 2, 0))
        assert split_circuit(c, 3).groups[0].qubits == (0, 2)


class TestAttach:
    def test_between_two_cnots_of_one_group(self):
        c = circuit_of(3, ("cx", 0, 1), ("rx", 1, 0.1), ("cx", 1, 2))
        plan = split_circuit(c, 3)
        assert _groups(plan) == [({0, 1, 2}, [0, 1, 2])]

    def test_orphan_qubit_gets_singleton(self):
        c = circuit_of(4, ("cx", 0, 1), ("h", 3), ("rx", 0, 0.2))
        plan = split_circuit(c, 3)
        assert ({3}, [1]) in _groups(plan)
        assert ({0, 1}, [0, 2]) in _groups(plan)
        single = next(g for g in plan.groups if g.qubits == (3,))
        assert single.width == 1
        assert validate_plan(plan, c).ok

    def test_tie_goes_to_earlier_group(self):
        # anchors on q1 at 0 (group A) and 2 (group B), RX at 1 is equidistant
        c = circuit_of(4, ("cx", 0, 1), ("rx", 1, 0.5), ("cx", 1, 2), ("cx", 2, 3))
        plan = split_circuit(c, 2)
        assert _groups(plan)[0] == ({0, 1}, [0, 1])
        assert validate_plan(plan, c).ok

    def test_nearest_anchor_wins(self):
        c = circuit_of(4, ("cx", 0, 1), ("h", 0), ("h", 3), ("rx", 1, 0.5), ("cx", 1, 2), ("cx", 2, 3))
        plan = split_circuit(c, 2)
        owner = next(g for g in plan.groups if 4 in g.gates)
        # RX q1 at 3: distance 3 back to gate 0, 1 forward to gate 4
        assert owner.gates == [3, 4]
        assert validate_plan(plan, c).ok

    def test_no_two_qubit_gates_at_all(self):
        c = circuit_of(2, ("h", 1), ("h", 0), ("x", 1))
        plan = split_circuit(c, 3)
        assert _groups(plan) == [({1}, [0, 2]), ({0}, [1])]
        assert validate_plan(plan, c).ok

    def test_input_plan_untouched(self):
        c = circuit_of(2, ("cx", 0, 1), ("h", 0))
        base = greedy_split(build_dependency_graph(c), c, 2)
        attach_single_qubit_gates(base, c)
        assert base.groups[0].gates == [0]


class TestValidatePlan:
    def test_su2_is_valid(self):
        c = ansatz_su2(5, 2)
        assert validate_plan(split_circuit(c, 3), c, 3).ok

    def test_duplicate_gate(self):
        c = circuit_of(3, ("cx", 0, 1), ("cx", 1, 2))
        plan = SplitPlan([SubCircuitGroup((0, 1, 2), [0, 1]), SubCircuitGroup((1, 2), [1])], 3)
        report = validate_plan(plan, c)
        assert not report.ok
        assert any("assigned to groups" in e for e in report.errors)

    def test_reordered_rotations(self):
        c = circuit_of(2, ("rx", 0, 0.1), ("rx", 0, 0.2))
        plan = SplitPlan([SubCircuitGroup((0,), [1]), SubCircuitGroup((0,), [0]), SubCircuitGroup((1,), [])], 2)
        report = validate_plan(plan, c)
        assert "order violation on qubit 0" in report.errors

    def test_missing_gate(self):
        c = circuit_of(2, ("h", 0), ("h", 1))
        plan = SplitPlan([SubCircuitGroup((0,), [0])], 2)
        assert any("gates not covered" in e for e in validate_plan(plan, c).errors)

    def test_too_wide(self):
        c = circuit_of(3, ("cx", 0, 1), ("cx", 1, 2))
        plan = SplitPlan([SubCircuitGroup((0, 1, 2), [0, 1])], 2)
        assert not validate_plan(plan, c).ok
        assert validate_plan(plan, c, 3).ok

    def test_gate_outside_group_qubits(self):
        c = circuit_of(3, ("cx", 0, 2))
        plan = SplitPlan([SubCircuitGroup((0, 1), [0])], 3)
        assert any("outside group" in e for e in validate_plan(plan, c).errors)

    def test_serialization(self):
        plan = split_circuit(circuit_of(3, ("cx", 0, 1), ("h", 2)), 3)
        assert plan.to_dict() == {"max_qubits": 3, "groups": [{"qubits": [0, 1], "gates": [0]}, {"qubits": [2], "gates": [1]}]}


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w=st.integers(2, 8), n=st.integers(1, 40), g=st.integers(3, 6))
def test_plans_valid_and_deterministic(seed, w, n, g):
    c = random_circuit(np.random.default_rng(seed), w, n)
    plan = split_circuit(c, g)
    assert validate_plan(plan, c, g).ok
    assert plan == split_circuit(c, g)
    assert all(grp.width <= g for grp in plan.groups)


@pytest.mark.parametrize("ansatz", [lambda: ansatz_su2(6, 2), lambda: ansatz_strongly_entangling(6, 2, 2)])
@pytest.mark.parametrize("g", [3, 4, 5, 6])
def test_gallery_plans_valid(ansatz, g):
    c = ansatz()
    assert validate_plan(split_circuit(c, g), c, g).ok


@pytest.mark.parametrize("length", range(2, 13))
def test_group_count_non_increasing_on_chains(length):
    c = cnot_chain(length + 1)
    counts = [len(split_circuit(c, g).groups) for g in range(2, length + 3)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w=st.integers(2, 7), n=st.integers(1, 30), g=st.integers(2, 6))
def test_split_execution_matches_dense(seed, w, n, g):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, w, n)
    want = run_dense(c, np.eye(1, 2**w, dtype=complex))
    got = run(c, plan=split_circuit(c, g))
    assert np.max(np.abs(got - want)) < 1e-10
