from fractions import Fraction
from io import StringIO

from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import ValidationError
from apps.core.numeric import FLOAT, RATIONAL
from apps.kingman.services import tier_blocks
from apps.phasetype.services import build_rewards, dph_pmf_vector, ranked_coalescent_dph, reward_transform
from apps.statespace.services import enumerate_states

from .services import bcp_E_pmf, bcp_kernel, bcp_sizes, bcp_states, e_moments

F = Fraction


class BcpStateTests(SimpleTestCase):

    def test_n4(self):
        space = bcp_states(4)
        self.assertEqual(space.vectors.tolist(), [[4, 0, 0], [2, 1, 0], [1, 0, 1], [0, 2, 0]])
        self.assertEqual(space.tier_counts(), [1, 1, 2])

    def test_n5(self):
        space = bcp_states(5)
        self.assertEqual(space.vectors.tolist(), [
            [5, 0, 0, 0],
            [3, 1, 0, 0],
            [2, 0, 1, 0],
            [1, 2, 0, 0],
            [1, 0, 0, 1],
            [0, 1, 1, 0],
        ])
        state = space.state(3)
        self.assertEqual((state.tier, state.blocks, state.singletons), (2, 3, 2))

    def test_index_of(self):
        space = bcp_states(5)
        self.assertEqual(space.index_of((0, 1, 1, 0)), 6)
        with self.assertRaises(ValidationError):
            space.index_of((0, 0, 0, 0, 1))
        with self.assertRaises(ValidationError):
            space.index_of((1, 1, 1, 0))

    def test_small_n(self):
        with self.assertRaises(ValidationError):
            bcp_states(2)

    def test_sizes(self):
        rows = bcp_sizes(10)
        self.assertEqual(rows[0], (3, 3, 3))
        self.assertEqual(rows[-1], (10, 42, 89))
        for n, bcp, ranked in rows:
            self.assertEqual(bcp_states(n).size + 1, bcp)
            self.assertLessEqual(bcp, ranked)
        with self.assertRaises(ValidationError):
            bcp_sizes(2)


class BcpKernelTests(SimpleTestCase):

    def test_n5_rows(self):
        blocks = bcp_kernel(bcp_states(5), RATIONAL)
        self.assertEqual([block.dense_rows() for block in blocks], [
            [[1]],
            [[F(1, 2), F(1, 2)]],
            [[F(2, 3), F(1, 3)], [F(1, 3), F(2, 3)]],
        ])

    def test_n4_matches_ranked_coalescent(self):
        bcp = [block.dense_rows() for block in bcp_kernel(bcp_states(4), RATIONAL)]
        ranked = [block.dense_rows() for block in tier_blocks(enumerate_states(4), RATIONAL)]
        self.assertEqual(bcp, ranked)

    def test_stochastic_rows(self):
        for block in bcp_kernel(bcp_states(9), RATIONAL):
            self.assertTrue(all(sum(row) == 1 for row in block.dense_rows()))
        for block in bcp_kernel(bcp_states(20), FLOAT):
            self.assertTrue(all(abs(s - 1) < 1e-12 for s in block.row_sums()))


class ExternalLengthTests(SimpleTestCase):

    def test_pmf(self):
        self.assertEqual(bcp_E_pmf(4, RATIONAL), [(6, F(1, 3)), (7, F(2, 3))])
        self.assertEqual(bcp_E_pmf(5, RATIONAL), [(9, F(1, 3)), (10, F(1, 3)), (11, F(1, 3))])

    def test_moments(self):
        self.assertEqual(e_moments(5, RATIONAL), (10, F(2, 3)))

    def test_matches_ranked_coalescent(self):
        for n in range(4, 11):
            with self.subTest(n=n):
                space = enumerate_states(n)
                d = ranked_coalescent_dph(space, tier_blocks(space, RATIONAL))
                pmf = dph_pmf_vector(reward_transform(d, build_rewards(space).column('E')))
                ranked = [(m, p) for m, p in enumerate(pmf, start=1) if p != 0]
                self.assertEqual(bcp_E_pmf(n, RATIONAL), ranked)

    def test_float_mass(self):
        pmf = bcp_E_pmf(25, FLOAT)
        self.assertAlmostEqual(sum(p for _, p in pmf), 1.0, places=9)


class BcpCommandTests(SimpleTestCase):

    def test_pmf(self):
        out = StringIO()
        call_command('bcp', '--n', '5', stdout=out)
        self.assertEqual(out.getvalue().splitlines(), ['m,probability', '9,1/3', '10,1/3', '11,1/3'])

    def test_sizes(self):
        out = StringIO()
        call_command('bcp', '--sizes', '--n-max', '10', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], 'n,bcp_states,ranked_states')
        self.assertEqual(lines[-1], '10,42,89')

    def test_states(self):
        out = StringIO()
        call_command('bcp', '--n', '4', '--states', stdout=out)
        self.assertEqual(out.getvalue().splitlines(), [
            'index,tier,a1,a2,a3', '1,0,4,0,0', '2,1,2,1,0', '3,2,1,0,1', '4,2,0,2,0',
        ])


class BcpAPITests(APISimpleTestCase):

    def test_edist(self):
        response = self.client.get('/api/bcp/4/edist/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['n'], 4)
        self.assertEqual(
            [dict(row) for row in response.data['pmf']],
            [{'m': 6, 'probability': '1/3'}, {'m': 7, 'probability': '2/3'}],
        )

    def test_limits(self):
        self.assertEqual(self.client.get('/api/bcp/30/edist/').status_code, 413)
        self.assertEqual(self.client.get('/api/bcp/2/edist/').status_code, 400)
