from fractions import Fraction
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.test import SimpleTestCase, override_settings
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import CapacityError, ValidationError
from apps.core.numeric import FLOAT, RATIONAL
from apps.kingman.services import tier_blocks
from apps.phasetype.services import build_rewards, left_fundamental, ranked_coalescent_dph
from apps.statespace.services import enumerate_states

from .services import (
    TieredVector, assemble, left_products, moment_rows, nonfixed_moments, right_products, se_moments,
)

F = Fraction

U_R42_N6 = [F(3, 2), F(3, 2), F(3, 2), F(3, 2), 2, 2, 1, 1, 0, 0, 0, 0]
U_R51_N6 = [F(2, 5), F(2, 5), F(1, 2), F(1, 3), F(2, 3), F(1, 3), F(1, 3), 0, 1, 0, 0, 0]


def exact(n):
    space = enumerate_states(n)
    return space, tier_blocks(space, RATIONAL)


class TierProductTests(SimpleTestCase):

    def test_left_products(self):
        space, blocks = exact(6)
        products = left_products(blocks)
        self.assertEqual([p.tier for p in products], [0, 1, 2, 3, 4])
        self.assertEqual(products[3].values.tolist(), [F(3, 10), F(1, 5), F(2, 5), F(1, 10)])
        dph = ranked_coalescent_dph(space, blocks)
        self.assertEqual(assemble(space, products).tolist(), left_fundamental(dph, dph.pi).tolist())

    def test_left_products_n5(self):
        _, blocks = exact(5)
        self.assertEqual(left_products(blocks)[2].values.tolist(), [F(1, 2), F(1, 2)])

    def test_initial_vector_outside_first_tier(self):
        _, blocks = exact(5)
        with self.assertRaises(ValidationError):
            left_products(blocks, TieredVector(1, np.array([F(1)], dtype=object)))

    def test_right_products(self):
        space, blocks = exact(6)
        rewards = build_rewards(space)
        u_r42 = assemble(space, right_products(blocks, rewards.column('F4,2'), space))
        self.assertEqual(u_r42.tolist(), U_R42_N6)
        u_r51 = assemble(space, right_products(blocks, rewards.column('F5,1'), space))
        self.assertEqual(u_r51.tolist(), U_R51_N6)

    def test_right_products_from_segment(self):
        space, blocks = exact(6)
        segment = TieredVector(3, np.array([2, 2, 1, 1], dtype=object))
        products = right_products(blocks, segment)
        self.assertEqual([p.tier for p in products], [3, 2, 1, 0])
        self.assertEqual(products[-1].values.tolist(), [F(3, 2)])

    def test_reward_on_several_tiers(self):
        space, blocks = exact(5)
        with self.assertRaises(ValidationError):
            right_products(blocks, build_rewards(space).column('S'), space)
        with self.assertRaises(ValidationError):
            right_products(blocks, np.zeros(space.size, dtype=np.int64))


class NonfixedMomentTests(SimpleTestCase):

    def test_n5(self):
        space, blocks = exact(5)
        summary = nonfixed_moments(space, blocks)
        self.assertEqual(summary.positions, [(3, 1), (4, 1), (4, 2)])
        self.assertEqual(summary.mean.tolist(), [F(2, 3), F(1, 2), F(3, 2)])
        self.assertEqual(summary.cov.tolist(), [
            [F(2, 9), F(1, 6), 0],
            [F(1, 6), F(1, 4), F(1, 12)],
            [0, F(1, 12), F(1, 4)],
        ])
        self.assertGreater(summary.work, 0)

    def test_n6_pair(self):
        space, blocks = exact(6)
        summary = nonfixed_moments(space, blocks)
        self.assertEqual(summary.second_moment((4, 2), (5, 1)), F(2, 3))
        self.assertEqual(summary.cov_of((4, 2), (5, 1)), F(1, 15))
        self.assertEqual(summary.cov_of((5, 1), (4, 2)), F(1, 15))
        with self.assertRaises(ValidationError):
            summary.mean_of(2, 1)

    def test_se_moments(self):
        space, blocks = exact(5)
        mu, sigma = se_moments(nonfixed_moments(space, blocks))
        self.assertEqual(mu.tolist(), [F(8, 3), 10])
        self.assertEqual(sigma.tolist(), [[F(11, 9), F(5, 6)], [F(5, 6), F(2, 3)]])

    def test_small_n(self):
        with self.assertRaises(ValidationError):
            nonfixed_moments(enumerate_states(3))

    def test_threads_do_not_change_result(self):
        space, blocks = exact(8)
        one = nonfixed_moments(space, blocks, threads=1)
        four = nonfixed_moments(space, blocks, threads=4)
        self.assertEqual(one.mean.tolist(), four.mean.tolist())
        self.assertEqual(one.cov.tolist(), four.cov.tolist())

    def test_json(self):
        space, blocks = exact(5)
        payload = nonfixed_moments(space, blocks).to_json()
        self.assertEqual(payload['mean'], ['2/3', '1/2', '3/2'])
        self.assertEqual(payload['positions'], [[3, 1], [4, 1], [4, 2]])

    def test_twenty_five_leaves_full_rank(self):
        space = enumerate_states(25)
        summary = nonfixed_moments(space, tier_blocks(space, FLOAT))
        self.assertEqual(summary.cov.shape, (253, 253))
        np.testing.assert_allclose(summary.cov, summary.cov.T, atol=1e-9)
        self.assertEqual(np.linalg.matrix_rank(summary.cov), 253)
        self.assertGreater(np.linalg.eigvalsh(summary.cov).min(), 1e-5)


class EngineAgreementTests(SimpleTestCase):

    def test_exact_engines_agree(self):
        space, blocks = exact(7)
        targets = ('S', 'E', 'F')
        self.assertEqual(
            moment_rows(space, blocks, targets, engine='feedforward'),
            moment_rows(space, blocks, targets, engine='dense'),
        )

    def test_float_engines_agree(self):
        space = enumerate_states(12)
        blocks = tier_blocks(space, FLOAT)
        targets = ('S', 'E', 'F')
        fast = moment_rows(space, blocks, targets, engine='feedforward')
        dense = moment_rows(space, blocks, targets, engine='dense')
        self.assertEqual([row[:3] for row in fast], [row[:3] for row in dense])
        np.testing.assert_allclose([row[3] for row in fast], [row[3] for row in dense], atol=1e-10)

    def test_float_matches_exact(self):
        space = enumerate_states(9)
        exact_rows = moment_rows(space, tier_blocks(space, RATIONAL), ('S', 'E'))
        float_rows = moment_rows(space, tier_blocks(space, FLOAT), ('S', 'E'))
        np.testing.assert_allclose(
            [float(row[3]) for row in exact_rows], [row[3] for row in float_rows], rtol=1e-12,
        )

    @override_settings(RANKEDTREES_EXACT_MAX_N=6)
    def test_rational_full_covariance_guard(self):
        space, blocks = exact(7)
        with self.assertRaises(CapacityError):
            moment_rows(space, blocks, ('S', 'F'))
        self.assertEqual(len(moment_rows(space, blocks, ('S', 'E'))), 5)

    def test_unknown_target_or_engine(self):
        space, blocks = exact(5)
        with self.assertRaises(ValidationError):
            moment_rows(space, blocks, ('S', 'X'))
        with self.assertRaises(ValidationError):
            moment_rows(space, blocks, ('S',), engine='monte-carlo')


class MomentsCommandTests(SimpleTestCase):

    def test_se_table(self):
        out = StringIO()
        call_command('moments', '--n', '5', '--targets', 'S,E', stdout=out)
        self.assertEqual(out.getvalue().splitlines(), [
            'statistic,a,b,value',
            'mean,S,,8/3',
            'var,S,,11/9',
            'mean,E,,10',
            'var,E,,2/3',
            'cov,S,E,5/6',
        ])

    def test_f_table(self):
        out = StringIO()
        call_command('moments', '--n', '6', '--targets', 'F', '--engine', 'dense', stdout=out)
        self.assertIn('cov,"F4,2","F5,1",1/15', out.getvalue().splitlines())


class MomentsAPITests(APISimpleTestCase):

    def test_moments(self):
        response = self.client.get('/api/moments/5/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['header'], ['statistic', 'a', 'b', 'value'])
        self.assertEqual(response.data['rows'][0], ['mean', 'S', '', '8/3'])

    def test_nonfixed_targets(self):
        response = self.client.get('/api/moments/5/?targets=F')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(response.data['rows']), 3 + 6)

    def test_limits(self):
        self.assertEqual(self.client.get('/api/moments/20/').status_code, 413)
        self.assertEqual(self.client.get('/api/moments/3/').status_code, 400)
        self.assertEqual(self.client.get('/api/moments/5/?targets=Q').status_code, 400)
