import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conclusive_teleport.analysis import ReplayRandom
from conclusive_teleport.measurement import (
    IDENTIFY_MINUS,
    IDENTIFY_PLUS,
    INCONCLUSIVE,
    Povm,
    ProjectorSet,
    apply_povm,
    born_probabilities,
    build_idp_povm,
    inverse_cdf,
    measure_projective,
    povm_probabilities,
    validate_povm,
)
from conclusive_teleport.protocols import (
    ChannelSpec,
    build_projectors,
    prepare_joint_state,
    InputQubit,
    subspace_states,
)
from conclusive_teleport.statevec import StateVector, extract_subsystem, fidelity

from conftest import brute_force_joint

R2 = 1 / math.sqrt(2)


@st.composite
def qubit(draw):
    theta = draw(st.floats(0, math.pi))
    phi = draw(st.floats(0, 2 * math.pi))
    return StateVector([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


class TestProjectorSet:
    def test_rejects_incomplete(self):
        with pytest.raises(ValueError):
            ProjectorSet((0,), ((StateVector.from_bits("0"),),))

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError):
            ProjectorSet((0,), ((StateVector.from_bits("0"),), (StateVector([R2, R2]),)))

    def test_matrices_sum_to_identity(self):
        ps = ProjectorSet.computational((0, 1))
        np.testing.assert_allclose(sum(ps.matrices()), np.eye(4), atol=1e-15)


class TestBornProbabilities:
    def test_eigenstate(self):
        assert born_probabilities(StateVector.from_bits("0"), ProjectorSet.computational((0,))) == [1, 0]

    def test_plus(self):
        probs = born_probabilities(StateVector([R2, R2]), ProjectorSet.computational((0,)))
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-15)

    def test_protocol_projectors_match_brute_force(self):
        alpha, beta, a, b = math.sqrt(0.8), math.sqrt(0.2), 0.6, 0.8
        joint = StateVector(brute_force_joint(a, b, alpha, beta))
        # brute force: sum |amplitude|^2 of each Alice basis component
        amps = brute_force_joint(a, b, alpha, beta).reshape(8, 2)
        phi = np.zeros((8, 8))
        phi[0, 0] = phi[1, 7] = phi[2, 3] = phi[3, 4] = 1
        phi[4, [2, 5]] = [R2, R2]
        phi[5, [2, 5]] = [R2, -R2]
        phi[6, [1, 6]] = [R2, R2]
        phi[7, [1, 6]] = [R2, -R2]
        weights = np.sum(np.abs(phi @ amps) ** 2, axis=1)
        expected = [weights[0] + weights[1], weights[2] + weights[3], *weights[4:]]
        probs = born_probabilities(joint, build_projectors())
        np.testing.assert_allclose(probs, expected, atol=1e-15)
        # frozen from the brute force above: a^2 alpha^4 + b^2 beta^4, a^2 beta^4 + b^2 alpha^4
        np.testing.assert_allclose(probs, [0.256, 0.424, 0.08, 0.08, 0.08, 0.08], atol=1e-12)

    def test_direct_outcome_independent_of_input(self, rng):
        channel = ChannelSpec.from_alpha_sq(0.7)
        for _ in range(20):
            z = rng.standard_normal(4)
            inp = InputQubit.normalized(complex(z[0], z[1]), complex(z[2], z[3]))
            p = born_probabilities(prepare_joint_state(inp, channel), build_projectors())
            assert p[2] == pytest.approx(0.7 * 0.3 / 2, abs=1e-12)


class TestMeasureProjective:
    def test_eigenstate_outcome(self):
        out = measure_projective(StateVector.from_bits("0"), ProjectorSet.computational((0,)),
                                 np.random.default_rng(0))
        assert out.outcome_index == 0 and out.probability == 1

    def test_bell_state_halves(self):
        bell = StateVector([R2, 0, 0, R2])
        probs = born_probabilities(bell, ProjectorSet.computational((0,)))
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-15)
        out = measure_projective(bell, ProjectorSet.computational((0,)), ReplayRandom([0.75]))
        assert out.outcome_index == 1
        assert out.post_state.allclose(StateVector.from_bits("11"))

    def test_deterministic_given_seed(self):
        bell = StateVector([R2, 0, 0, R2])
        ps = ProjectorSet.computational((1,))
        a = [measure_projective(bell, ps, np.random.default_rng(9)).outcome_index for _ in range(5)]
        b = [measure_projective(bell, ps, np.random.default_rng(9)).outcome_index for _ in range(5)]
        assert a == b

    def test_probability_matches_expectation(self):
        joint = prepare_joint_state(InputQubit(0.6, 0.8), ChannelSpec.from_alpha_sq(0.8))
        ps = build_projectors()
        for u in np.linspace(0, 0.999, 23):
            out = measure_projective(joint, ps, ReplayRandom([u]))
            expectation = np.vdot(joint.amplitudes,
                                  np.kron(ps.matrix(out.outcome_index), np.eye(2)) @ joint.amplitudes).real
            assert out.probability == pytest.approx(expectation, abs=1e-12)

    def test_sampled_frequencies_within_four_sigma(self):
        joint = prepare_joint_state(InputQubit(0.6, 0.8), ChannelSpec.from_alpha_sq(0.8))
        ps = build_projectors()
        probs = np.array(born_probabilities(joint, ps))
        rng = np.random.default_rng(5)
        n = 20_000
        counts = np.bincount([measure_projective(joint, ps, rng).outcome_index for _ in range(n)],
                             minlength=6)
        se = np.sqrt(probs * (1 - probs) / n)
        assert np.all(np.abs(counts / n - probs) <= 4 * se)

    def test_bulk_inverse_cdf_at_a_million(self):
        joint = prepare_joint_state(InputQubit(0.6, 0.8), ChannelSpec.from_alpha_sq(0.8))
        probs = np.array(born_probabilities(joint, build_projectors()))
        n = 1_000_000
        idx = inverse_cdf(probs, np.random.default_rng(6).random(n))
        freq = np.bincount(idx, minlength=6) / n
        assert np.all(np.abs(freq - probs) <= 4 * np.sqrt(probs * (1 - probs) / n))


class TestInverseCdf:
    def test_never_picks_zero_probability(self):
        probs = [0.0, 0.5, 0.0, 0.5, 0.0]
        u = np.linspace(0, 1 - 1e-16, 1001)
        assert set(np.unique(inverse_cdf(probs, u))) == {1, 3}

    def test_rounding_overflow_goes_to_last_possible(self):
        assert inverse_cdf([0.5, 0.5 - 1e-15, 0.0], 0.9999999999999999) == 1

    def test_scalar_matches_vector(self):
        probs = [0.2, 0.3, 0.5]
        u = np.random.default_rng(1).random(100)
        vec = inverse_cdf(probs, u)
        assert [inverse_cdf(probs, x) for x in u] == list(vec)


class TestIdpPovm:
    def test_orthogonal_states_projective(self):
        povm = build_idp_povm(StateVector([1, 0]), StateVector([0, 1]))
        np.testing.assert_allclose(povm.effect(IDENTIFY_PLUS), np.diag([1, 0]), atol=1e-15)
        np.testing.assert_allclose(povm.effect(IDENTIFY_MINUS), np.diag([0, 1]), atol=1e-15)
        np.testing.assert_allclose(povm.effect(INCONCLUSIVE), 0, atol=1e-15)

    def test_identical_states_never_conclusive(self):
        u = StateVector([0.6, 0.8])
        povm = build_idp_povm(u, u)
        np.testing.assert_array_equal(povm.effects[0], 0)
        np.testing.assert_array_equal(povm.effects[1], 0)
        np.testing.assert_array_equal(povm.effects[2], np.eye(2))

    def test_channel_value_at_alpha_sq_08(self):
        channel = ChannelSpec.from_alpha_sq(0.8)
        u_plus, u_minus = subspace_states(channel, 1)
        povm = build_idp_povm(u_plus, u_minus)
        conclusive = povm.effects[0] + povm.effects[1]
        for u in (u_plus, u_minus):
            p = np.vdot(u.amplitudes, conclusive @ u.amplitudes).real
            assert p == pytest.approx(0.08 / 0.68, abs=1e-12)
            assert p == pytest.approx(0.117647, abs=1e-6)

    def test_valid_at_alpha_sq_08(self):
        report = validate_povm(build_idp_povm(*subspace_states(ChannelSpec.from_alpha_sq(0.8), 1)))
        assert report.completeness_residual < 1e-12
        assert report.min_eigenvalue >= -1e-12
        assert report.valid

    @given(qubit(), qubit())
    @settings(max_examples=200)
    def test_unambiguous_and_optimal(self, u_plus, u_minus):
        s = abs(np.vdot(u_plus.amplitudes, u_minus.amplitudes))
        povm = build_idp_povm(u_plus, u_minus)
        e_plus, e_minus, _ = povm.effects
        up, um = u_plus.amplitudes, u_minus.amplitudes
        assert np.vdot(um, e_plus @ um).real < 1e-12
        assert np.vdot(up, e_minus @ up).real < 1e-12
        for u in (up, um):
            conclusive = np.vdot(u, (e_plus + e_minus) @ u).real
            assert conclusive == pytest.approx(1 - s, abs=1e-12)
        assert validate_povm(povm).valid
        for m, e in zip(povm.kraus(), povm.effects):
            np.testing.assert_allclose(m.conj().T @ m, e, atol=1e-12)

    def test_hundred_random_pairs(self, rng):
        for _ in range(100):
            z = rng.standard_normal((2, 4))
            up, um = (StateVector.normalized([complex(r[0], r[1]), complex(r[2], r[3])]) for r in z)
            povm = build_idp_povm(up, um)
            assert np.vdot(um.amplitudes, povm.effects[0] @ um.amplitudes).real < 1e-12
            assert np.vdot(up.amplitudes, povm.effects[1] @ up.amplitudes).real < 1e-12

    def test_near_degenerate_stays_valid(self):
        for beta_sq in (1e-6, 1e-9, 1e-12, 1e-15):
            channel = ChannelSpec(math.sqrt(1 - beta_sq), math.sqrt(beta_sq))
            report = validate_povm(build_idp_povm(*subspace_states(channel, 2)))
            assert report.valid, (beta_sq, report)


class TestValidatePovm:
    def test_projective(self):
        report = validate_povm(Povm.from_projectors(ProjectorSet.computational((0,))))
        assert report.completeness_residual == 0
        assert report.min_eigenvalue == 0

    def test_double_identity_flagged(self):
        report = validate_povm(Povm((np.eye(2), np.eye(2)), ("x", "y")))
        assert report.completeness_residual == 1
        assert not report.valid

    def test_apply_rejects_invalid(self):
        with pytest.raises(ValueError):
            apply_povm(StateVector([1, 0]), Povm((np.eye(2), np.eye(2)), ("x", "y")), 0,
                       np.random.default_rng(0))


class TestApplyPovm:
    def test_trivial_povm(self):
        s = StateVector([0.6, 0.8j])
        out = apply_povm(s, Povm((np.eye(2),), ("all",)), 0, np.random.default_rng(0))
        assert out.probability == pytest.approx(1)
        assert out.post_state.allclose(s)

    def test_projective_povm_matches_projective_measurement(self):
        s = StateVector.normalized([0.3, 0.1j, -0.5, 0.8])
        ps = ProjectorSet.computational((1,))
        povm = Povm.from_projectors(ProjectorSet.computational((0,)))
        np.testing.assert_allclose(povm_probabilities(s, povm, 1), born_probabilities(s, ps), atol=1e-15)
        for u in (0.1, 0.5, 0.9):
            a = apply_povm(s, povm, 1, ReplayRandom([u]))
            b = measure_projective(s, ps, ReplayRandom([u]))
            assert a.outcome_index == b.outcome_index
            assert a.post_state.allclose(b.post_state)

    @pytest.mark.parametrize("alpha_sq", [0.55, 0.7, 0.8, 0.95])
    def test_identify_plus_completes_teleportation(self, alpha_sq):
        channel = ChannelSpec.from_alpha_sq(alpha_sq)
        a, b = 0.6, 0.8j
        a2, b2 = channel.alpha_sq, channel.beta_sq
        # logical Alice qubit (x) Bob: a alpha^2 |0~>|0> + b beta^2 |1~>|1>
        logical = StateVector.normalized([a * a2, 0, 0, b * b2])
        povm = build_idp_povm(*subspace_states(channel, 1))
        out = apply_povm(logical, povm, 0, ReplayRandom([0.0]))
        assert povm.labels[out.outcome_index] == IDENTIFY_PLUS
        # oracle: M+ = |w><w| / sqrt(1+s) with w orthogonal to (alpha^2, -beta^2)
        w = np.array([b2, a2]) / math.hypot(a2, b2)
        bob_oracle = w.conj() @ logical.amplitudes.reshape(2, 2)
        bob_oracle = bob_oracle / np.linalg.norm(bob_oracle)
        bob = extract_subsystem(out.post_state, [0], StateVector(w))
        assert fidelity(bob, StateVector(bob_oracle)) == pytest.approx(1, abs=1e-12)
        assert fidelity(bob, StateVector([a, b])) == pytest.approx(1, abs=1e-12)

    def test_sampled_povm_frequencies(self):
        channel = ChannelSpec.from_alpha_sq(0.7)
        povm = build_idp_povm(*subspace_states(channel, 1))
        s = StateVector.normalized([0.6 * 0.49, 0, 0, 0.8 * 0.09])
        probs = np.array(povm_probabilities(s, povm, 0))
        rng = np.random.default_rng(3)
        n = 20_000
        counts = np.bincount([apply_povm(s, povm, 0, rng).outcome_index for _ in range(n)], minlength=3)
        assert np.all(np.abs(counts / n - probs) <= 4 * np.sqrt(probs * (1 - probs) / n))
