import json
from collections import Counter
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from scipy import stats

from apps.core.exceptions import ValidationError
from apps.core.numeric import RATIONAL
from apps.fmatrix.services import balance_S, fmatrix_to_path
from apps.kingman.services import enumerate_paths, tier_blocks
from apps.statespace.services import enumerate_states

from .services import BetaConfig, iter_beta_trees, sample_beta_tree, sample_tree, split_probabilities


class SplitProbabilityTests(SimpleTestCase):

    def test_normalized_and_symmetric(self):
        for beta in (-1.9, -1.0, 0.0, 2.5, 50.0):
            for k in (2, 5, 12):
                probs = split_probabilities(beta, k)
                self.assertEqual(len(probs), k - 1)
                self.assertAlmostEqual(probs.sum(), 1.0)
                np.testing.assert_allclose(probs, probs[::-1])

    def test_uniform_at_zero(self):
        np.testing.assert_allclose(split_probabilities(0.0, 6), np.full(5, 0.2))

    def test_balance_grows_with_beta(self):
        # Divisão mais equilibrada recebe mais massa quando beta cresce
        self.assertLess(split_probabilities(-1.5, 8)[3], split_probabilities(5.0, 8)[3])
        self.assertGreater(split_probabilities(-1.5, 8)[0], split_probabilities(5.0, 8)[0])


class BetaConfigTests(SimpleTestCase):

    def test_invalid(self):
        with self.assertRaises(ValidationError):
            BetaConfig(beta=-2, n=10)
        with self.assertRaises(ValidationError):
            BetaConfig(beta=0.5, n=2)

    def test_valid(self):
        config = BetaConfig(beta=-1.99, n=3, seed=1)
        self.assertEqual(sample_beta_tree(config).tri(), [[2], [1, 3]])


class SamplerTests(SimpleTestCase):

    def test_ranks(self):
        tree = sample_tree(9, 1.0, np.random.default_rng(3))
        self.assertEqual(sorted(node.rank for node in tree.internal_nodes()), list(range(2, 10)))
        self.assertEqual(tree.root.rank, 2)

    def test_samples_are_ranked_shapes(self):
        space = enumerate_states(9)
        for F in iter_beta_trees(BetaConfig(beta=-1.2, n=9, seed=11), 50):
            self.assertEqual(len(fmatrix_to_path(space, F)), 8)

    def test_deterministic(self):
        config = BetaConfig(beta=0.7, n=12, seed=5)
        first = list(iter_beta_trees(config, 20))
        second = list(iter_beta_trees(config, 20))
        self.assertEqual(first, second)
        self.assertNotEqual(first, list(iter_beta_trees(BetaConfig(beta=0.7, n=12, seed=6), 20)))

    def test_zero_matches_kingman(self):
        space = enumerate_states(5)
        expected = dict((path.indices, prob) for path, prob in enumerate_paths(space, tier_blocks(space, RATIONAL)))
        count = 3000
        observed = Counter(
            fmatrix_to_path(space, F).indices for F in iter_beta_trees(BetaConfig(beta=0.0, n=5, seed=2024), count)
        )
        self.assertLessEqual(set(observed), set(expected))
        keys = sorted(expected)
        result = stats.chisquare(
            [observed.get(key, 0) for key in keys], [count * float(expected[key]) for key in keys],
        )
        self.assertGreater(result.pvalue, 1e-4)

    def test_imbalance_decreases_with_beta(self):
        def mean_S(beta):
            trees = iter_beta_trees(BetaConfig(beta=beta, n=10, seed=9), 300)
            return np.mean([balance_S(F) for F in trees])
        self.assertGreater(mean_S(-1.5), mean_S(10.0))


class SimulateCommandTests(SimpleTestCase):

    def test_kingman(self):
        out = StringIO()
        call_command('simulate', '--model', 'kingman', '--n', '6', '--count', '5', '--seed', '1', stdout=out)
        records = [json.loads(line) for line in out.getvalue().splitlines()]
        self.assertEqual(len(records), 5)
        self.assertTrue(all(record['n'] == 6 and len(record['tri']) == 5 for record in records))

    def test_beta_requires_parameter(self):
        with self.assertRaises(CommandError):
            call_command('simulate', '--model', 'beta', '--n', '6', '--seed', '1', stdout=StringIO())
        with self.assertRaises(CommandError):
            call_command('simulate', '--model', 'beta', '--beta', '-3', '--n', '6', '--seed', '1', stdout=StringIO())
