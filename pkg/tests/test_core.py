import numpy as np
import pytest

from matmdp import (
    DimensionMismatch,
    MdpInstance,
    NonFiniteInput,
    Policy,
    SimplexViolation,
    ValidationError,
    build_marginalizer,
    build_policy_matrix,
    state_action_transition,
    state_transition,
)
from matmdp.model_io import generate_random_mdp, random_policy

from oracles import pair_chain_loops, policy_matrix_loops, state_chain_loops


class TestPolicyMatrix:
    def test_single_state_single_action(self):
        np.testing.assert_array_equal(build_policy_matrix([1.0], 1, 1).Pi, [[1.0]])

    def test_uniform_two_by_two(self):
        Pi = build_policy_matrix([0.5] * 4, 2, 2).Pi
        np.testing.assert_array_equal(Pi, [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]])

    def test_deterministic_placement(self):
        Pi = build_policy_matrix([1, 0, 0, 1], 2, 2).Pi
        np.testing.assert_array_equal(Pi, [[1, 0, 0, 0], [0, 0, 0, 1]])

    def test_matches_loop_construction(self):
        for seed in range(20):
            pol = random_policy(seed, 4, 3)
            np.testing.assert_array_equal(pol.Pi, policy_matrix_loops(pol.pi, 4, 3))

    def test_rows_sum_to_one_and_pi_xi_identity(self):
        for seed in range(100):
            S, A = 1 + seed % 6, 1 + seed % 4
            pol = random_policy(seed, S, A)
            Xi = build_marginalizer(S, A).Xi
            np.testing.assert_allclose(pol.Pi @ Xi.T, np.eye(S), atol=1e-12)
            np.testing.assert_allclose(pol.Pi.sum(axis=1), np.ones(S), atol=1e-12)

    def test_from_matrix_round_trip(self):
        pol = random_policy(3, 3, 2)
        back = Policy.from_matrix(pol.Pi, 2)
        np.testing.assert_array_equal(back.pi, pol.pi)

    def test_rejects_bad_block(self):
        with pytest.raises(SimplexViolation, match="state 1"):
            Policy([0.5, 0.5, 0.7, 0.7], 2, 2)

    def test_rejects_negative(self):
        with pytest.raises(SimplexViolation):
            Policy([1.5, -0.5], 1, 2)

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            Policy([1.0, 0.0, 1.0], 2, 2)

    def test_rejects_nan(self):
        with pytest.raises(NonFiniteInput):
            Policy([np.nan, 1.0], 1, 2)

    def test_off_block_entries_rejected(self):
        Pi = np.array([[0.5, 0.5, 0.0, 0.0], [0.1, 0.0, 0.4, 0.5]])
        with pytest.raises(ValidationError):
            Policy.from_matrix(Pi, 2)

    def test_deterministic_constructor(self):
        pol = Policy.deterministic([1, 0], 2)
        np.testing.assert_array_equal(pol.pi, [0, 1, 1, 0])

    def test_is_read_only(self):
        pol = Policy.uniform(2, 2)
        with pytest.raises(ValueError):
            pol.pi[0] = 1.0


class TestMarginalizer:
    def test_single_block(self):
        np.testing.assert_array_equal(build_marginalizer(1, 2).Xi, [[1, 1]])

    def test_two_by_two(self):
        np.testing.assert_array_equal(build_marginalizer(2, 2).Xi, [[1, 1, 0, 0], [0, 0, 1, 1]])

    def test_one_action_is_identity(self):
        np.testing.assert_array_equal(build_marginalizer(3, 1).Xi, np.eye(3))


class TestTransitions:
    def test_m1_uniform_state_chain(self, m1, uniform2):
        np.testing.assert_allclose(state_transition(uniform2, m1), [[0.5, 0.5], [0.5, 0.5]])
        np.testing.assert_allclose(state_transition(uniform2, m1), state_chain_loops(m1.P, uniform2.pi, 2, 2))

    def test_m1_selfloop_state_chain(self, m1, selfloop2):
        np.testing.assert_allclose(state_transition(selfloop2, m1), np.eye(2))

    def test_single_state(self):
        mdp = MdpInstance([[1.0], [1.0]], [0.0, 1.0], 0.5, [1.0])
        np.testing.assert_allclose(state_transition(Policy([0.3, 0.7], 1, 2), mdp), [[1.0]])
        np.testing.assert_allclose(state_action_transition(MdpInstance([[1.0]], [1.0], 0.5, [1.0]),
                                                           Policy([1.0], 1, 1)), [[1.0]])

    def test_m1_selfloop_pair_chain(self, m1, selfloop2):
        PPi = state_action_transition(m1, selfloop2)
        for row in (0, 2):
            np.testing.assert_array_equal(PPi[row], [1, 0, 0, 0])
        for row in (1, 3):
            np.testing.assert_array_equal(PPi[row], [0, 0, 0, 1])

    def test_m1_uniform_pair_chain(self, m1, uniform2):
        PPi = state_action_transition(m1, uniform2)
        np.testing.assert_allclose(PPi, pair_chain_loops(m1.P, uniform2.pi, 2, 2))
        np.testing.assert_allclose(PPi[0], [0.5, 0.5, 0, 0])
        np.testing.assert_allclose(PPi[1], [0, 0, 0.5, 0.5])

    def test_random_products_match_loops(self):
        for seed in range(10):
            mdp = generate_random_mdp(seed, 4, 3, 0.9)
            pol = random_policy(seed + 100, 4, 3)
            np.testing.assert_allclose(state_transition(pol, mdp), state_chain_loops(mdp.P, pol.pi, 4, 3), atol=1e-14)
            np.testing.assert_allclose(state_action_transition(mdp, pol), pair_chain_loops(mdp.P, pol.pi, 4, 3),
                                       atol=1e-14)

    def test_incompatible_policy(self, m1):
        with pytest.raises(DimensionMismatch):
            state_transition(Policy.uniform(3, 2), m1)


class TestMdpInstance:
    def test_shapes(self, m1):
        assert (m1.num_states, m1.num_actions, m1.num_pairs) == (2, 2, 4)

    def test_rejects_bad_row(self):
        P = np.array([[0.9, 0.0], [0.0, 1.0]])
        with pytest.raises(SimplexViolation, match="row"):
            MdpInstance(P, [0.0, 0.0], 0.5, [1.0, 0.0])

    @pytest.mark.parametrize("gamma", [1.0, -0.1, 1.5, float("nan")])
    def test_rejects_gamma(self, gamma, m1):
        with pytest.raises(ValidationError):
            m1.replace(gamma=gamma)

    def test_gamma_zero_allowed(self, m1):
        assert m1.replace(gamma=0.0).gamma == 0.0

    def test_rejects_bad_rho0(self, m1):
        with pytest.raises(SimplexViolation):
            m1.replace(rho0=np.array([0.5, 0.6]))

    def test_rejects_inconsistent_shape(self):
        with pytest.raises(DimensionMismatch):
            MdpInstance(np.eye(3)[:, :2], [0.0] * 3, 0.5, [1.0, 0.0])

    def test_equality_and_immutability(self, m1):
        from matmdp import builtin_m1

        assert m1 == builtin_m1()
        assert m1 != m1.replace(gamma=0.9)
        with pytest.raises(ValueError):
            m1.P[0, 0] = 0.5


class TestPerturbations:
    def test_finite_policy_difference_has_zero_row_sums(self):
        for seed in range(50):
            a, b = random_policy(2 * seed, 5, 3), random_policy(2 * seed + 1, 5, 3)
            np.testing.assert_allclose((b.Pi - a.Pi).sum(axis=1), 0.0, atol=1e-15)
