from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase
from scipy import sparse

from apps.core.exceptions import DegenerateRewardError, ValidationError
from apps.core.numeric import FLOAT, RATIONAL, asarray, to_float
from apps.fmatrix.services import balance_E, balance_S, path_to_fmatrix
from apps.kingman.services import enumerate_paths, tier_blocks
from apps.statespace.services import enumerate_states

from .services import (
    DiscretePhaseType, build_rewards, dph_factorial_moment, dph_moments, dph_pmf, dph_pmf_vector,
    fundamental_matrix, left_fundamental, mdph_cross_moment, ranked_coalescent_dph, reward_covariance,
    reward_moments, reward_transform, right_fundamental,
)

F = Fraction

PI_U_N6 = [1, 1, F(2, 5), F(3, 5), F(3, 10), F(1, 5), F(2, 5), F(1, 10), F(2, 5), F(1, 10), F(1, 6), F(1, 3)]

SIGMA_N5 = [
    [F(2, 9), F(1, 6), 0],
    [F(1, 6), F(1, 4), F(1, 12)],
    [0, F(1, 12), F(1, 4)],
]


def geometric(q):
    return DiscretePhaseType(pi=asarray([1], RATIONAL), T=asarray([[q]], RATIONAL))


def kingman(n, mode=RATIONAL):
    space = enumerate_states(n)
    return space, ranked_coalescent_dph(space, tier_blocks(space, mode))


class DiscretePhaseTypeTests(SimpleTestCase):

    def test_validation(self):
        with self.assertRaises(ValidationError):
            DiscretePhaseType(pi=asarray([1], RATIONAL), T=asarray([[F(3, 2)]], RATIONAL))
        with self.assertRaises(ValidationError):
            DiscretePhaseType(pi=asarray([1, 0], RATIONAL), T=asarray([[0]], RATIONAL))

    def test_geometric(self):
        d = geometric(F(1, 2))
        self.assertFalse(d.nilpotent)
        self.assertEqual(dph_pmf(d, 3), F(1, 8))
        self.assertEqual(dph_factorial_moment(d, 1), 2)
        self.assertEqual(dph_factorial_moment(d, 2), 4)
        self.assertEqual(dph_moments(d), (2, 2))

    def test_geometric_float(self):
        d = DiscretePhaseType(pi=np.array([1.0]), T=np.array([[0.25]]))
        mean, var = dph_moments(d)
        self.assertAlmostEqual(mean, 4 / 3)
        self.assertAlmostEqual(var, 0.25 / 0.75 ** 2)

    def test_zero_matrix(self):
        d = DiscretePhaseType(pi=asarray([1, 0], RATIONAL), T=asarray([[0, 0], [0, 0]], RATIONAL))
        self.assertEqual(fundamental_matrix(d).tolist(), [[1, 0], [0, 1]])

    def test_third_factorial_moment(self):
        rng = np.random.default_rng(0)
        T = rng.random((4, 4))
        T = 0.9 * T / T.sum(axis=1, keepdims=True)
        d = DiscretePhaseType(pi=np.array([0.4, 0.3, 0.2, 0.1]), T=T)
        pmf = dph_pmf_vector(d, m_max=2000)
        brute = sum(m * (m - 1) * (m - 2) * p for m, p in enumerate(pmf, start=1))
        self.assertAlmostEqual(dph_factorial_moment(d, 3) / brute, 1.0, places=6)

    def test_absorption_time_of_coalescent(self):
        _, d = kingman(6)
        self.assertTrue(d.nilpotent)
        self.assertEqual(dph_moments(d), (5, 0))
        self.assertEqual(dph_pmf(d, 5), 1)

    def test_fundamental_products(self):
        _, d = kingman(6)
        self.assertEqual(left_fundamental(d, d.pi).tolist(), PI_U_N6)
        U = fundamental_matrix(d)
        self.assertEqual((d.pi @ U).tolist(), PI_U_N6)

    def test_finite_sum_matches_inverse(self):
        _, d = kingman(7, FLOAT)
        U = fundamental_matrix(d)
        np.testing.assert_allclose(U, np.linalg.inv(np.eye(d.p) - d.T), atol=1e-12)
        values = np.arange(d.p, dtype=float)
        np.testing.assert_allclose(right_fundamental(d, values), U @ values, atol=1e-12)


class RewardTests(SimpleTestCase):

    def setUp(self):
        self.space, self.d = kingman(5)
        self.rewards = build_rewards(self.space)

    def test_reward_vectors(self):
        self.assertEqual(self.rewards.column('S').tolist(), [0, 0, 2, 1, 2, 1, 0])
        self.assertEqual(self.rewards.column('E').tolist(), [5, 3, 2, 1, 1, 0, 0])
        self.assertEqual(self.rewards.labels, ['S', 'E', 'F3,1', 'F4,1', 'F4,2'])

    def test_reward_vectors_n6(self):
        rewards = build_rewards(enumerate_states(6))
        self.assertEqual(rewards.column('F4,2').tolist(), [0, 0, 0, 0, 2, 2, 1, 1, 0, 0, 0, 0])
        self.assertEqual(rewards.column('F5,1').tolist(), [0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0])

    def test_small_n_has_no_rewards(self):
        with self.assertRaises(ValidationError):
            build_rewards(enumerate_states(3))

    def test_moments(self):
        self.assertEqual(reward_moments(self.d, self.rewards.column('S')), (F(8, 3), F(11, 9)))
        self.assertEqual(reward_moments(self.d, self.rewards.column('E')), (F(10), F(2, 3)))

    def test_unit_reward(self):
        self.assertEqual(reward_moments(self.d, np.ones(self.d.p, dtype=np.int64)), dph_moments(self.d))

    def test_cross_moment(self):
        cross, cov = mdph_cross_moment(self.d, self.rewards.column('S'), self.rewards.column('E'))
        self.assertEqual(cov, F(5, 6))
        self.assertEqual(cross, F(5, 6) + F(8, 3) * 10)
        r = self.rewards.column('S')
        second, var = mdph_cross_moment(self.d, r, r)
        self.assertEqual(var, F(11, 9))

    def test_covariance_of_nonfixed_entries(self):
        mean, cov = reward_covariance(self.d, self.rewards.R[:, 2:])
        self.assertEqual(mean.tolist(), [F(2, 3), F(1, 2), F(3, 2)])
        self.assertEqual(cov.tolist(), SIGMA_N5)

    def test_moments_match_enumeration(self):
        for n in range(5, 9):
            with self.subTest(n=n):
                space, d = kingman(n)
                rewards = build_rewards(space)
                mean, cov = reward_covariance(d, rewards)
                positions = [tuple(int(v) for v in label[1:].split(',')) for label in rewards.labels[2:]]
                probs, values = [], []
                for path, prob in enumerate_paths(space):
                    matrix = path_to_fmatrix(space, path)
                    row = [balance_S(matrix), balance_E(matrix)] + [matrix.entry(i, j) for i, j in positions]
                    probs.append(prob)
                    values.append(np.array(row, dtype=object))
                brute_mean = sum(p * v for p, v in zip(probs, values))
                brute_second = sum(p * np.outer(v, v) for p, v in zip(probs, values))
                brute_cov = brute_second - np.outer(brute_mean, brute_mean)
                self.assertEqual(mean.tolist(), brute_mean.tolist())
                self.assertEqual(cov.tolist(), brute_cov.tolist())

    def test_persistence_is_sum_of_entries(self):
        space, d = kingman(8)
        rewards = build_rewards(space)
        mean, cov = reward_covariance(d, rewards)
        self.assertEqual(mean[0], sum(mean[2:]))
        self.assertEqual(cov[0, 0], cov[2:, 2:].sum())


class RewardTransformTests(SimpleTestCase):

    def setUp(self):
        self.space, self.d = kingman(5)
        self.r_S = build_rewards(self.space).column('S')

    def test_persistence_chain(self):
        d = reward_transform(self.d, self.r_S)
        self.assertEqual(d.pi.tolist(), [F(1, 2), 0, F(1, 2), 0, 0, 0])
        self.assertEqual(d.T.tolist(), [
            [0, 1, 0, 0, 0, 0],
            [0, 0, 0, F(2, 3), 0, 0],
            [0, 0, 0, F(1, 3), 0, F(1, 3)],
            [0, 0, 0, 0, 1, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
        ])
        self.assertEqual(d.exit.tolist(), [0, F(1, 3), F(1, 3), 0, 1, 1])

    def test_law_matches_enumeration(self):
        pmf = dph_pmf_vector(reward_transform(self.d, self.r_S))
        self.assertEqual(pmf, [F(1, 6), F(1, 3), F(1, 6), F(1, 3)])
        brute = {}
        for path, prob in enumerate_paths(self.space):
            value = balance_S(path_to_fmatrix(self.space, path))
            brute[value] = brute.get(value, 0) + prob
        self.assertEqual(brute, {m: p for m, p in enumerate(pmf, start=1)})

    def test_sparse_chain(self):
        d = DiscretePhaseType(pi=to_float(self.d.pi), T=sparse.csr_matrix(to_float(self.d.T)))
        pmf = dph_pmf_vector(reward_transform(d, self.r_S))
        np.testing.assert_allclose(pmf, [1 / 6, 1 / 3, 1 / 6, 1 / 3], atol=1e-12)

    def test_unit_reward_keeps_law(self):
        d = reward_transform(self.d, np.ones(self.d.p, dtype=np.int64))
        self.assertEqual(d.p, self.d.p)
        self.assertEqual(dph_pmf_vector(d), dph_pmf_vector(self.d))

    def test_degenerate(self):
        with self.assertRaises(DegenerateRewardError):
            reward_transform(self.d, np.zeros(self.d.p, dtype=np.int64))
        only_last = np.zeros(self.d.p, dtype=np.int64)
        only_last[6] = 1
        d = reward_transform(self.d, only_last)
        self.assertEqual(d.defect, F(2, 3))
        with self.assertRaises(ValidationError):
            reward_transform(self.d, -np.ones(self.d.p, dtype=np.int64))
