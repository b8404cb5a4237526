import json
import os
import tempfile
from fractions import Fraction
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import CapacityError, ValidationError
from apps.core.io import write_jsonl
from apps.core.numeric import FLOAT, RATIONAL
from apps.fmatrix.services import fmatrix_record, path_to_fmatrix
from apps.kingman.services import enumerate_paths, tier_blocks
from apps.statespace.services import enumerate_states

from .services import (
    _edges, brute_force_means, frechet_dispersion, frechet_variance, mean_matrix_exact, mean_matrix_sample,
    path_cost, state_costs, vitreebi,
)

F = Fraction

MEAN_TRI_N5 = [['2'], ['1', '3'], ['2/3', '2', '4'], ['1/2', '3/2', '3', '5']]


def exact(n):
    space = enumerate_states(n)
    blocks = tier_blocks(space, RATIONAL)
    return space, blocks, mean_matrix_exact(space, blocks)


def n5_sample(space):
    # Cada árvore de 5 folhas com a frequência da sua probabilidade
    paths = [(1, 2, 3, 5), (1, 2, 3, 5), (1, 2, 4, 5), (1, 2, 4, 6), (1, 2, 3, 7), (1, 2, 4, 7)]
    return [path_to_fmatrix(space, path) for path in paths]


class MeanMatrixTests(SimpleTestCase):

    def test_exact_n5(self):
        _, _, mean = exact(5)
        self.assertEqual(mean.tri(), MEAN_TRI_N5)
        self.assertEqual(mean.entry(4, 2), F(3, 2))
        self.assertEqual(mean.column(1).tolist(), [2, 1, F(2, 3), F(1, 2)])

    def test_exact_n6_nonfixed(self):
        _, _, mean = exact(6)
        self.assertEqual(mean.entry(4, 2), F(3, 2))
        self.assertEqual(mean.entry(5, 1), F(2, 5))

    def test_sample_mean(self):
        space, _, mean = exact(5)
        sample = mean_matrix_sample(n5_sample(space), mode=RATIONAL)
        self.assertEqual(sample.M.tolist(), mean.M.tolist())

    def test_weighted_sample_mean(self):
        space, blocks, mean = exact(7)
        paths = enumerate_paths(space, blocks)
        sample = mean_matrix_sample(
            [path_to_fmatrix(space, path) for path, _ in paths], weights=[p for _, p in paths], mode=RATIONAL,
        )
        self.assertEqual(sample.M.tolist(), mean.M.tolist())

    def test_float_sample_mean(self):
        space, _, mean = exact(5)
        sample = mean_matrix_sample(n5_sample(space), mode=FLOAT)
        for row, expected in zip(sample.M.tolist(), mean.M.tolist()):
            for value, target in zip(row, expected):
                self.assertAlmostEqual(value, float(target))

    def test_invalid_samples(self):
        space = enumerate_states(5)
        sample = n5_sample(space)
        with self.assertRaises(ValidationError):
            mean_matrix_sample([])
        with self.assertRaises(ValidationError):
            mean_matrix_sample(sample + [path_to_fmatrix(enumerate_states(4), (1, 2, 3))])
        with self.assertRaises(ValidationError):
            mean_matrix_sample(sample, weights=[1, 2])
        with self.assertRaises(ValidationError):
            mean_matrix_sample(sample, weights=[0] * len(sample))


class VitreebiTests(SimpleTestCase):

    def test_state_costs_n5(self):
        space, _, mean = exact(5)
        self.assertEqual(
            state_costs(space, mean).tolist(),
            [0, 0, F(1, 4), F(1, 4), F(13, 36), F(13, 36), F(25, 36)],
        )

    def test_state_costs_n6(self):
        space, _, mean = exact(6)
        costs = state_costs(space, mean)
        self.assertEqual(costs[2], F(9, 25))
        self.assertEqual(costs[5], F(29, 100))

    def test_costs_of_other_size(self):
        space, _, _ = exact(5)
        _, _, mean = exact(6)
        with self.assertRaises(ValidationError):
            state_costs(space, mean)

    def test_n5_means(self):
        space, _, mean = exact(5)
        min_cost, paths = vitreebi(space, mean)
        self.assertEqual(min_cost, F(11, 18))
        self.assertEqual([p.indices for p in paths], [(1, 2, 3, 5), (1, 2, 4, 5), (1, 2, 4, 6)])

    def test_n6_means(self):
        space, _, mean = exact(6)
        min_cost, paths = vitreebi(space, mean)
        self.assertEqual(min_cost, F(437, 450))
        self.assertEqual([p.indices for p in paths], [(1, 2, 4, 6, 10), (1, 2, 4, 7, 11)])
        for path in paths:
            self.assertEqual(path_cost(space, mean, path), min_cost)

    def test_thirteen_leaves(self):
        space = enumerate_states(13)
        mean = mean_matrix_exact(space, tier_blocks(space, FLOAT))
        _, paths = vitreebi(space, mean)
        self.assertEqual(len(paths), 4)

    def test_twenty_five_leaves(self):
        space = enumerate_states(25)
        mean = mean_matrix_exact(space, tier_blocks(space, FLOAT))
        _, paths = vitreebi(space, mean)
        self.assertEqual(len(paths), 2)

    def test_edges_match_kernel_support(self):
        space, blocks, _ = exact(7)
        for block in blocks:
            sources, targets = _edges(space, block.from_tier)
            expected_sources, expected_targets = block.nonzeros()
            self.assertEqual(sources.tolist(), expected_sources.tolist())
            self.assertEqual(targets.tolist(), expected_targets.tolist())

    def test_path_cap(self):
        space, _, mean = exact(5)
        with self.assertRaises(CapacityError):
            vitreebi(space, mean, cap=0)
        with self.assertRaises(CapacityError):
            vitreebi(space, mean, cap=2)
        self.assertEqual(len(vitreebi(space, mean, cap=3)[1]), 3)

    def test_float_ties(self):
        space = enumerate_states(6)
        mean = mean_matrix_exact(space, tier_blocks(space, FLOAT))
        min_cost, paths = vitreebi(space, mean)
        self.assertAlmostEqual(min_cost, 437 / 450)
        self.assertEqual([p.indices for p in paths], [(1, 2, 4, 6, 10), (1, 2, 4, 7, 11)])

    def test_matches_brute_force(self):
        for n in range(5, 11):
            with self.subTest(n=n):
                space, blocks, mean = exact(n)
                min_cost, paths = vitreebi(space, mean)
                best, best_paths = brute_force_means(space, mean, blocks)
                self.assertEqual(min_cost, best)
                self.assertEqual([p.indices for p in paths], best_paths)

    def test_sample_means(self):
        space = enumerate_states(5)
        sample = mean_matrix_sample(n5_sample(space)[:1], mode=RATIONAL)
        min_cost, paths = vitreebi(space, sample)
        self.assertEqual(min_cost, 0)
        self.assertEqual([p.indices for p in paths], [(1, 2, 3, 5)])


class VarianceTests(SimpleTestCase):

    def test_n5(self):
        space, blocks, mean = exact(5)
        self.assertEqual(frechet_variance(space, blocks, mean), F(13, 18))

    def test_methods_agree(self):
        space, blocks, mean = exact(6)
        self.assertEqual(
            frechet_variance(space, blocks, mean, method='moments'),
            frechet_variance(space, blocks, mean, method='enumeration'),
        )
        with self.assertRaises(ValidationError):
            frechet_variance(space, blocks, mean, method='bootstrap')

    def test_dispersion(self):
        space, blocks, mean = exact(5)
        self.assertEqual(frechet_dispersion(space, (1, 2, 3, 5), blocks, mean), F(4, 3))
        self.assertEqual(frechet_dispersion(space, (1, 2, 4, 7), blocks, mean), F(13, 18) + F(1, 4) + F(25, 36))


class FrechetCommandTests(SimpleTestCase):

    def test_model(self):
        out = StringIO()
        call_command('frechet', '--n', '6', stdout=out)
        payload = json.loads(out.getvalue())
        self.assertEqual(payload['min_cost'], '437/450')
        self.assertEqual(payload['source'], 'kingman')
        self.assertEqual([m['path'] for m in payload['means']], [[1, 2, 4, 6, 10], [1, 2, 4, 7, 11]])

    def test_sample(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        path = os.path.join(tmp.name, 'corpus.jsonl')
        write_jsonl(path, [fmatrix_record(matrix) for matrix in n5_sample(enumerate_states(5))])
        out = StringIO()
        call_command('frechet', '--sample', path, '--mode', 'rational', stdout=out)
        payload = json.loads(out.getvalue())
        self.assertEqual(payload['min_cost'], '11/18')
        self.assertIsNone(payload['variance'])
        self.assertEqual(payload['mean_matrix'], MEAN_TRI_N5)

    def test_missing_n(self):
        with self.assertRaises(CommandError):
            call_command('frechet', stdout=StringIO())


class FrechetAPITests(APISimpleTestCase):

    def test_means(self):
        response = self.client.get('/api/frechet/6/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['min_cost'], '437/450')
        self.assertEqual(len(response.data['means']), 2)

    def test_variance(self):
        response = self.client.get('/api/frechet/5/')
        self.assertEqual(response.data['variance'], '13/18')
        self.assertEqual(response.data['mean_matrix'], MEAN_TRI_N5)

    def test_limit(self):
        self.assertEqual(self.client.get('/api/frechet/40/').status_code, 413)

    def test_weighted_sample(self):
        space = enumerate_states(5)
        first, third = (fmatrix_record(path_to_fmatrix(space, p)) for p in [(1, 2, 3, 5), (1, 2, 4, 6)])
        response = self.client.post(
            '/api/frechet/sample/', {'matrices': [first, third], 'weights': ['1', '0']}, format='json',
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['min_cost'], '0')
        self.assertEqual([m['path'] for m in response.data['means']], [[1, 2, 3, 5]])
        self.assertIsNone(response.data['variance'])

    def test_sample_of_all_trees(self):
        space = enumerate_states(5)
        records = [fmatrix_record(matrix) for matrix in n5_sample(space)]
        response = self.client.post('/api/frechet/sample/', {'matrices': records}, format='json')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['min_cost'], '11/18')
        self.assertEqual(response.data['mean_matrix'], MEAN_TRI_N5)

    def test_rational_weights(self):
        space = enumerate_states(5)
        records = [fmatrix_record(path_to_fmatrix(space, p)) for p in [(1, 2, 3, 5), (1, 2, 4, 7)]]
        response = self.client.post(
            '/api/frechet/sample/', {'matrices': records, 'weights': ['2/3', '1/3']}, format='json',
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['mean_matrix'][3], ['2/3', '5/3', '3', '5'])

    def test_invalid_sample(self):
        record = fmatrix_record(path_to_fmatrix(enumerate_states(5), (1, 2, 3, 5)))
        bad_weight = self.client.post(
            '/api/frechet/sample/', {'matrices': [record], 'weights': ['abc']}, format='json',
        )
        self.assertEqual(bad_weight.status_code, 400)
        self.assertIn('weights', bad_weight.data)
        missing = self.client.post(
            '/api/frechet/sample/', {'matrices': [record, record], 'weights': ['1']}, format='json',
        )
        self.assertEqual(missing.status_code, 400)
        negative = self.client.post(
            '/api/frechet/sample/', {'matrices': [record], 'weights': ['-1']}, format='json',
        )
        self.assertEqual(negative.status_code, 400)
        self.assertEqual(self.client.post('/api/frechet/sample/', {'matrices': []}, format='json').status_code, 400)
