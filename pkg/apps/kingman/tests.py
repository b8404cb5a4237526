import json
from collections import Counter
from fractions import Fraction
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import CapacityError, InfeasiblePathError, TierMismatchError, ValidationError
from apps.core.numeric import FLOAT, RATIONAL
from apps.statespace.services import enumerate_states

from .services import (
    assemble_dense, block_from_rows, enumerate_paths, feasible, iter_sample_paths, path_probability,
    sample_path, tier_blocks, transition_prob,
)

F = Fraction

# Núcleo de Kingman para n = 5 (estados 1..7)
T5 = [
    [0, 1, 0, 0, 0, 0, 0],
    [0, 0, F(1, 2), F(1, 2), 0, 0, 0],
    [0, 0, 0, 0, F(2, 3), 0, F(1, 3)],
    [0, 0, 0, 0, F(1, 3), F(1, 3), F(1, 3)],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
]

# Números de Euler zigzag A000111(n-1)
TREE_COUNTS = {3: 1, 4: 2, 5: 5, 6: 16, 7: 61, 8: 272, 9: 1385}


class FeasibilityTests(SimpleTestCase):

    def setUp(self):
        self.space = enumerate_states(5)

    def test_coalescence_pairs(self):
        x = self.space.state(2)
        self.assertEqual(feasible(x, self.space.state(3)), (3, 4))
        self.assertEqual(feasible(x, self.space.state(4)), (4, 4))

    def test_tier_gap(self):
        with self.assertRaises(TierMismatchError):
            feasible(self.space.state(2), self.space.state(5))
        self.assertEqual(transition_prob(self.space.state(2), self.space.state(5)), 0)

    def test_transition_probabilities(self):
        state = self.space.state
        self.assertEqual(transition_prob(state(2), state(3)), F(1, 2))
        self.assertEqual(transition_prob(state(3), state(5)), F(2, 3))
        self.assertEqual(transition_prob(state(3), state(6)), 0)
        self.assertAlmostEqual(transition_prob(state(4), state(7), FLOAT), 1 / 3)


class TierBlockTests(SimpleTestCase):

    def test_n5_kernel(self):
        space = enumerate_states(5)
        pi, T = assemble_dense(space, tier_blocks(space, RATIONAL))
        self.assertEqual(T.tolist(), T5)
        self.assertEqual(pi.tolist(), [1, 0, 0, 0, 0, 0, 0])

    def test_n6_blocks(self):
        space = enumerate_states(6)
        blocks = tier_blocks(space, RATIONAL)
        self.assertEqual([b.shape for b in blocks], [(1, 1), (1, 2), (2, 4), (4, 4)])
        self.assertEqual(blocks[0].dense().tolist(), [[1]])
        self.assertEqual(blocks[1].dense().tolist(), [[F(2, 5), F(3, 5)]])
        _, local = space.local_position(space.index_of((0, 3, 2, 2, 1)))
        self.assertEqual(blocks[3].dense()[local].tolist(), [F(1, 3), F(1, 3), 0, F(1, 3)])

    def test_n4_blocks(self):
        space = enumerate_states(4)
        blocks = tier_blocks(space, RATIONAL)
        self.assertEqual(blocks[1].dense().tolist(), [[F(2, 3), F(1, 3)]])

    def test_rows_are_stochastic(self):
        for n in range(3, 10):
            for block in tier_blocks(enumerate_states(n), RATIONAL):
                self.assertTrue(all(s == 1 for s in block.row_sums()))
        for block in tier_blocks(enumerate_states(14), FLOAT):
            self.assertTrue(np.all(np.abs(block.row_sums() - 1.0) < 1e-12))

    def test_modes_agree(self):
        space = enumerate_states(8)
        for exact, approx in zip(tier_blocks(space, RATIONAL), tier_blocks(space, FLOAT)):
            np.testing.assert_allclose(exact.dense().astype(float), approx.dense(), atol=1e-15)

    def test_external_block(self):
        block = block_from_rows(0, [[0.5, 0.5]])
        self.assertEqual(block.nnz, 2)
        with self.assertRaises(ValidationError):
            block_from_rows(0, [[0.5, 0.4]])
        with self.assertRaises(ValidationError):
            block_from_rows(0, [[F(3, 2), F(-1, 2)]], RATIONAL)


class PathTests(SimpleTestCase):

    def test_path_probability(self):
        space = enumerate_states(5)
        self.assertEqual(path_probability(space, (1, 2, 3, 5)), F(1, 3))
        self.assertEqual(path_probability(space, (1, 2, 4, 6)), F(1, 6))
        with self.assertRaises(InfeasiblePathError) as ctx:
            path_probability(space, (1, 2, 3, 6))
        self.assertEqual(ctx.exception.step, 3)
        with self.assertRaises(InfeasiblePathError):
            path_probability(space, (1, 2, 3))

    def test_enumeration_counts_and_mass(self):
        for n, count in TREE_COUNTS.items():
            with self.subTest(n=n):
                paths = enumerate_paths(enumerate_states(n))
                self.assertEqual(len(paths), count)
                self.assertEqual(sum(prob for _, prob in paths), 1)

    def test_enumeration_n10(self):
        paths = enumerate_paths(enumerate_states(10))
        self.assertEqual(len(paths), 7936)
        self.assertEqual(sum(prob for _, prob in paths), 1)

    def test_enumeration_n5(self):
        space = enumerate_states(5)
        found = {path.indices: prob for path, prob in enumerate_paths(space)}
        self.assertEqual(found, {
            (1, 2, 3, 5): F(1, 3),
            (1, 2, 3, 7): F(1, 6),
            (1, 2, 4, 5): F(1, 6),
            (1, 2, 4, 6): F(1, 6),
            (1, 2, 4, 7): F(1, 6),
        })

    def test_enumeration_guard(self):
        with self.assertRaises(CapacityError):
            enumerate_paths(enumerate_states(13))


class SamplingTests(SimpleTestCase):

    def test_n3_unique_path(self):
        space = enumerate_states(3)
        self.assertEqual(sample_path(space, seed=1).indices, (1, 2))

    def test_seed_determinism(self):
        space = enumerate_states(12)
        self.assertEqual(sample_path(space, seed=5), sample_path(space, seed=5))

    def test_frequencies_match_kernel(self):
        space = enumerate_states(5)
        draws = 20_000
        counts = Counter(p.indices for p in iter_sample_paths(space, tier_blocks(space, FLOAT), draws, seed=3))
        for path, prob in enumerate_paths(space):
            p = float(prob)
            se = np.sqrt(p * (1 - p) / draws)
            self.assertLess(abs(counts[path.indices] / draws - p), 4 * se)

    def test_n4_frequency(self):
        space = enumerate_states(4)
        paths = list(iter_sample_paths(space, tier_blocks(space, FLOAT), 6000, seed=11))
        rate = sum(1 for p in paths if p.indices[-1] == 3) / len(paths)
        self.assertAlmostEqual(rate, 2 / 3, delta=0.025)

    def test_paths_are_feasible(self):
        space = enumerate_states(15)
        blocks = tier_blocks(space, FLOAT)
        for path in iter_sample_paths(space, blocks, 50, seed=2):
            self.assertGreater(path_probability(space, path, blocks), 0)


class KernelCommandTests(SimpleTestCase):

    def test_blocks_json(self):
        out = StringIO()
        call_command('kernel', '--n', '4', stdout=out)
        self.assertEqual(json.loads(out.getvalue()), {
            'n': 4,
            'mode': 'rational',
            'blocks': [
                {'from_tier': 0, 'shape': [1, 1], 'entries': [[1, 2, '1']]},
                {'from_tier': 1, 'shape': [1, 2], 'entries': [[2, 3, '2/3'], [2, 4, '1/3']]},
            ],
        })

    def test_blocks_float(self):
        out = StringIO()
        call_command('kernel', '--n', '6', '--mode', 'float', stdout=out)
        payload = json.loads(out.getvalue())
        self.assertEqual(payload['mode'], 'float')
        self.assertEqual(len(payload['blocks']), 4)
        for block in payload['blocks']:
            sums = Counter()
            for source, _, prob in block['entries']:
                sums[source] += float(prob)
            for total in sums.values():
                self.assertAlmostEqual(total, 1.0)

    def test_sample_jsonl(self):
        out = StringIO()
        call_command('sample', '--n', '6', '--count', '3', '--seed', '4', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(len(lines), 3)
        self.assertIn('"tri":[[2],[1,3]', lines[0])


class TierBlockAPITests(APISimpleTestCase):

    def test_blocks(self):
        response = self.client.get('/api/kingman/4/blocks/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data[1]['probs'], [['2/3', '1/3']])
        self.assertEqual(response.data[1]['shape'], [1, 2])
