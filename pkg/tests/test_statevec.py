import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conclusive_teleport.statevec import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Z,
    SIGMA_Z_SIGMA_X,
    FactorizationError,
    StateVector,
    apply_gate,
    extract_subsystem,
    fidelity,
    tensor_product,
)

from conftest import brute_force_joint

R2 = 1 / math.sqrt(2)
ZERO = StateVector.from_bits("0")
ONE = StateVector.from_bits("1")
PLUS = StateVector([R2, R2])


@st.composite
def qubit_states(draw, n=1):
    parts = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=2 ** (n + 1), max_size=2 ** (n + 1)))
    amps = np.array(parts[0::2]) + 1j * np.array(parts[1::2])
    if np.linalg.norm(amps) < 1e-3:
        amps = np.eye(2**n)[0].astype(complex)
    return StateVector.normalized(amps)


class TestStateVector:
    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            StateVector([1, 0, 0])

    def test_rejects_unnormalised(self):
        with pytest.raises(ValueError):
            StateVector([1, 1])

    def test_amplitudes_are_read_only(self):
        s = StateVector([1, 0])
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_from_bits_index_convention(self):
        assert StateVector.from_bits("011").amplitudes[3] == 1
        assert StateVector.from_bits("100").amplitudes[4] == 1


class TestTensorProduct:
    def test_basis_case(self):
        out = tensor_product(ZERO, ONE)
        np.testing.assert_array_equal(out.amplitudes, [0, 1, 0, 0])
        assert out.num_qubits == 2

    def test_plus_zero(self):
        out = tensor_product(PLUS, ZERO)
        np.testing.assert_allclose(out.amplitudes, [R2, 0, R2, 0], atol=1e-15)

    def test_four_qubit_expansion_matches_bit_loop(self):
        alpha, beta = math.sqrt(0.8), math.sqrt(0.2)
        a, b = 0.6, 0.8
        out = tensor_product(
            tensor_product(StateVector([a, b]), StateVector([alpha, beta])),
            StateVector([alpha, 0, 0, beta]),
        )
        expected = brute_force_joint(a, b, alpha, beta)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)
        support = np.flatnonzero(np.abs(expected) > 0)
        np.testing.assert_array_equal(support, [0, 3, 4, 7, 8, 11, 12, 15])
        # a alpha^2, a alpha beta, a beta alpha, a beta^2, then the same with b
        hand = [a * alpha**2, a * alpha * beta, a * beta * alpha, a * beta**2,
                b * alpha**2, b * alpha * beta, b * beta * alpha, b * beta**2]
        np.testing.assert_allclose(out.amplitudes[support], hand, atol=1e-15)

    @given(qubit_states(), qubit_states(), qubit_states(2))
    def test_associative_and_normalised(self, u, v, w):
        left = tensor_product(tensor_product(u, v), w)
        right = tensor_product(u, tensor_product(v, w))
        np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-12)
        assert abs(left.norm_sq() - 1) < 1e-12


class TestApplyGate:
    def test_bit_flip(self):
        assert apply_gate(ZERO, 0, SIGMA_X).allclose(ONE)

    def test_phase_flip(self):
        a, b = 0.6, 0.8j
        out = apply_gate(StateVector([a, b]), 0, SIGMA_Z)
        np.testing.assert_allclose(out.amplitudes, [a, -b], atol=1e-15)

    def test_phi8_branch_correction(self):
        a, b = 0.6, 0.8j
        m = np.array([[1, 0], [0, -1]]) @ np.array([[0, 1], [1, 0]])
        expected = m @ np.array([-b, a])
        out = apply_gate(StateVector([-b, a]), 0, SIGMA_Z_SIGMA_X)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)
        np.testing.assert_allclose(out.amplitudes, [a, b], atol=1e-15)

    def test_acts_on_the_labelled_qubit(self):
        s = StateVector.from_bits("000")
        assert apply_gate(s, 1, SIGMA_X).allclose(StateVector.from_bits("010"))
        assert apply_gate(s, 2, SIGMA_X).allclose(StateVector.from_bits("001"))

    def test_target_out_of_range(self):
        with pytest.raises(ValueError):
            apply_gate(ZERO, 1, SIGMA_X)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            apply_gate(ZERO, 0, np.diag([1.0, 0.5]))

    @given(qubit_states(3), st.integers(0, 2))
    @settings(max_examples=50)
    def test_double_flip_is_identity_and_norm_preserved(self, s, q):
        once = apply_gate(s, q, SIGMA_X)
        assert abs(once.norm_sq() - 1) < 1e-12
        np.testing.assert_allclose(apply_gate(once, q, SIGMA_X).amplitudes, s.amplitudes, atol=1e-12)

    def test_correction_gates_are_unitary(self):
        for g in (IDENTITY, SIGMA_X, SIGMA_Z, SIGMA_Z_SIGMA_X):
            np.testing.assert_allclose(g.conj().T @ g, np.eye(2), atol=1e-12)


class TestFidelity:
    def test_identical(self):
        assert fidelity(ZERO, ZERO) == 1

    def test_orthogonal(self):
        assert fidelity(ZERO, ONE) == 0

    def test_plus(self):
        assert fidelity(ZERO, PLUS) == pytest.approx(0.5, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(ZERO, StateVector.from_bits("00"))

    @given(qubit_states(2), qubit_states(2))
    def test_symmetric_and_bounded(self, u, v):
        f = fidelity(u, v)
        assert 0 <= f <= 1
        assert f == pytest.approx(fidelity(v, u), abs=1e-15)

    def test_global_phase_ignored(self):
        s = StateVector([0.6, 0.8j])
        assert fidelity(s, StateVector(np.exp(0.7j) * s.amplitudes)) == pytest.approx(1, abs=1e-15)


class TestExtractSubsystem:
    def test_product_state(self):
        out = extract_subsystem(StateVector.from_bits("01"), [0], ZERO)
        assert out.allclose(ONE)

    def test_entangled_state_rejected(self):
        bell = StateVector([R2, 0, 0, R2])
        with pytest.raises(FactorizationError):
            extract_subsystem(bell, [0], ZERO)

    def test_non_adjacent_qubits(self):
        s = tensor_product(tensor_product(ZERO, PLUS), ONE)
        assert extract_subsystem(s, [0, 2], StateVector.from_bits("01")).allclose(PLUS)

    def test_witnessed_order_follows_measured_labels(self):
        s = tensor_product(tensor_product(ZERO, PLUS), ONE)
        assert extract_subsystem(s, [2, 0], StateVector.from_bits("10")).allclose(PLUS)

    def test_phi5_branch_leaves_input_with_bob(self):
        alpha, beta = math.sqrt(0.8), math.sqrt(0.2)
        a, b = 0.6, 0.8
        joint = brute_force_joint(a, b, alpha, beta)
        phi5 = np.zeros(8)
        phi5[[2, 5]] = R2
        projected = np.kron(np.outer(phi5, phi5), np.eye(2)) @ joint
        bob = extract_subsystem(StateVector.normalized(projected), [0, 1, 2], StateVector(phi5))
        assert fidelity(bob, StateVector([a, b])) == pytest.approx(1, abs=1e-12)
