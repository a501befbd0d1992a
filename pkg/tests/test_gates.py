import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kronsim.circuit import GateKind
from kronsim.gates import decompose, fixed_matrix, gate_matrix
from oracles import small_matrix

ROTATIONS = [GateKind.RX, GateKind.RY, GateKind.RZ]
FIXED = [GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.CNOT, GateKind.CZ]


def test_rx_identity_at_zero():
    np.testing.assert_array_equal(decompose(GateKind.RX).matrix(0.0), np.eye(2))


def test_rx_at_pi():
    # cos(pi/2) = 0 up to rounding, -i sin(pi/2) = -i
    expected = np.array([[0, -1j], [-1j, 0]])
    np.testing.assert_allclose(decompose(GateKind.RX).matrix(np.pi), expected, atol=1e-15)


def test_rx_closed_form():
    t = 0.731
    c, s = np.cos(t / 2), np.sin(t / 2)
    expected = np.array([[c, -1j * s], [-1j * s, c]])
    np.testing.assert_allclose(decompose(GateKind.RX).matrix(t), expected, atol=1e-15)


@pytest.mark.parametrize("kind, axis", [(GateKind.RX, [[0, 1], [1, 0]]), (GateKind.RY, [[0, -1j], [1j, 0]]), (GateKind.RZ, [[1, 0], [0, -1]])])
def test_partials(kind, axis):
    d = decompose(kind)
    np.testing.assert_array_equal(d.a, np.eye(2))
    np.testing.assert_array_equal(d.b, np.array(axis))
    assert np.count_nonzero(d.a) == 2 and np.count_nonzero(d.b) == 2


def test_decompose_rejects_fixed():
    with pytest.raises(ValueError):
        decompose(GateKind.H)


def test_fixed_matrices():
    np.testing.assert_allclose(fixed_matrix(GateKind.H), np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    np.testing.assert_array_equal(fixed_matrix(GateKind.Z), np.diag([1, -1]))
    cnot = fixed_matrix(GateKind.CNOT)
    basis = np.eye(4)
    # |10> -> |11>, |11> -> |10>, |0x> fixed
    assert np.argmax(cnot @ basis[2]) == 3
    assert np.argmax(cnot @ basis[3]) == 2
    assert np.argmax(cnot @ basis[0]) == 0 and np.argmax(cnot @ basis[1]) == 1


def test_fixed_rejects_parametric():
    with pytest.raises(ValueError):
        fixed_matrix(GateKind.RX)


def test_fixed_tables_are_read_only():
    with pytest.raises(ValueError):
        fixed_matrix(GateKind.X)[0, 0] = 5


def test_gate_matrix_examples():
    np.testing.assert_allclose(gate_matrix(GateKind.RZ, np.pi / 2), np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]), atol=1e-15)
    np.testing.assert_array_equal(gate_matrix(GateKind.X), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(gate_matrix(GateKind.RY, 0.0), np.eye(2))


def test_gate_matrix_arity():
    with pytest.raises(ValueError):
        gate_matrix(GateKind.RX)
    with pytest.raises(ValueError):
        gate_matrix(GateKind.H, 0.3)


@settings(max_examples=200, deadline=None)
@given(theta=st.floats(-2 * np.pi, 2 * np.pi), kind=st.sampled_from(ROTATIONS))
def test_decomposition_matches_direct_and_exponential(theta, kind):
    d = decompose(kind).matrix(theta)
    assert np.max(np.abs(d - gate_matrix(kind, theta))) < 1e-12
    assert np.max(np.abs(d - small_matrix(kind, theta))) < 1e-12


@settings(max_examples=100, deadline=None)
@given(theta=st.floats(-2 * np.pi, 2 * np.pi), kind=st.sampled_from(ROTATIONS))
def test_rotations_unitary(theta, kind):
    for u in (decompose(kind).matrix(theta), gate_matrix(kind, theta)):
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12


@pytest.mark.parametrize("kind", FIXED)
def test_fixed_unitary(kind):
    u = fixed_matrix(kind)
    assert np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) < 1e-12


def test_coefficients_vectorised():
    thetas = np.array([0.0, np.pi, -1.0])
    coeffs = decompose(GateKind.RY).coefficients(thetas)
    assert coeffs.shape == (3, 2)
    np.testing.assert_allclose(coeffs[:, 0], np.cos(thetas / 2))
    np.testing.assert_allclose(coeffs[:, 1], -1j * np.sin(thetas / 2))
