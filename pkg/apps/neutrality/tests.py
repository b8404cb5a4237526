import json
import os
import tempfile
from fractions import Fraction
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.bcp.services import bcp_E_distribution
from apps.core.exceptions import DegenerateBoxingError, SingularCovarianceError, ValidationError
from apps.core.io import write_jsonl
from apps.core.numeric import FLOAT, RATIONAL
from apps.fmatrix.services import FMatrix, fmatrix_record

from . import services as neutrality
from .services import Box, box_null, inverse_sqrt, null_model, parse_grid, power_curve, run_tests, simulate_corpus

F = Fraction

# As cinco árvores de 5 folhas
F1 = [[2], [1, 3], [1, 2, 4], [1, 2, 3, 5]]
F2 = [[2], [1, 3], [1, 2, 4], [1, 1, 3, 5]]
F3 = [[2], [1, 3], [1, 2, 4], [0, 1, 3, 5]]
F4 = [[2], [1, 3], [0, 2, 4], [0, 2, 3, 5]]
F5 = [[2], [1, 3], [0, 2, 4], [0, 1, 3, 5]]


def sample(*tris):
    return [FMatrix.from_tri(5, tri) for tri in tris]


# Média amostral igual à média nula em todas as entradas
MEAN_SAMPLE = sample(F1, F1, F2, F3, F4, F5)
THIRDS = [Box(0, 9, 1 / 3), Box(10, 10, 1 / 3), Box(11, None, 1 / 3)]


class NullModelTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.null = null_model(5, RATIONAL)

    def test_exact_quantities(self):
        self.assertEqual(self.null.exact['mu_SE'].tolist(), [F(8, 3), 10])
        self.assertEqual(self.null.exact['Sigma_SE'].tolist(), [[F(11, 9), F(5, 6)], [F(5, 6), F(2, 3)]])
        np.testing.assert_allclose(self.null.M, [2 / 3, 1 / 2, 3 / 2])
        self.assertEqual([m for m, _ in self.null.e_pmf], [9, 10, 11])
        np.testing.assert_allclose([p for _, p in self.null.e_pmf], [1 / 3] * 3)

    def test_payload(self):
        payload = neutrality.null_payload(self.null)
        self.assertEqual(payload['mu_SE'], ['8/3', '10'])
        self.assertEqual(payload['Sigma_SE'], [['11/9', '5/6'], ['5/6', '2/3']])

    def test_sample_entries(self):
        # Vetores de entradas não fixas (F31, F41, F42)
        self.assertEqual([F.nonfixed().tolist() for F in sample(F1, F2, F3, F4, F5)], [
            [1, 1, 2], [1, 1, 1], [1, 0, 1], [0, 0, 2], [0, 0, 1],
        ])

    def test_statistics_at_null_mean(self):
        reports = run_tests(MEAN_SAMPLE, self.null, ('WF', 'WSE', 'HT'))
        self.assertEqual([r.test for r in reports], ['WF', 'WSE', 'HT'])
        for report in reports:
            self.assertAlmostEqual(report.statistic, 0.0, places=9)
            self.assertAlmostEqual(report.p_value, 1.0, places=6)
        self.assertEqual(reports[2].distribution, 'chi2(3)')

    def test_se_statistic_only_sees_S_and_E(self):
        trees = sample(F1, F2, F5)
        wse = neutrality.test_WSE(trees, self.null.mu_SE, self.null.Sigma_SE)
        self.assertAlmostEqual(wse.statistic, 0.0, places=9)
        ht = neutrality.test_hotelling(trees, self.null.M, self.null.Sigma)
        self.assertGreater(ht.statistic, 0.1)

    def test_permutation_invariance(self):
        trees = sample(F1, F1, F1, F3, F5)
        forward = run_tests(trees, self.null, ('WF', 'WSE', 'HT'))
        backward = run_tests(trees[::-1], self.null, ('WF', 'WSE', 'HT'))
        for a, b in zip(forward, backward):
            self.assertAlmostEqual(a.statistic, b.statistic)

    def test_imbalanced_sample(self):
        # Só lagartas: S e E acima da média nula
        reports = run_tests(sample(*[F1] * 200), self.null, ('WF', 'WSE', 'HT'))
        for report in reports:
            self.assertLess(report.p_value, 1e-6)
        self.assertGreater(reports[1].statistic, 0)

    def test_invalid_requests(self):
        with self.assertRaises(ValidationError):
            run_tests(MEAN_SAMPLE, self.null, ('WF', 'KS'))
        with self.assertRaises(ValidationError):
            run_tests([FMatrix.from_tri(4, [[2], [1, 3], [1, 2, 4]])], self.null, ('WF',))
        with self.assertRaises(ValidationError):
            neutrality.test_WF([], self.null.M, self.null.Sigma)
        with self.assertRaises(ValidationError):
            neutrality.test_WF(MEAN_SAMPLE, [0.5, 0.5], self.null.Sigma)


class InverseSqrtTests(SimpleTestCase):

    def test_diagonal(self):
        np.testing.assert_allclose(inverse_sqrt([[4.0, 0.0], [0.0, 9.0]]), [[0.5, 0.0], [0.0, 1 / 3]])

    def test_round_trip(self):
        Sigma = np.array([[2 / 9, 1 / 6, 0], [1 / 6, 1 / 4, 1 / 12], [0, 1 / 12, 1 / 4]])
        root = inverse_sqrt(Sigma)
        np.testing.assert_allclose(root @ Sigma @ root, np.eye(3), atol=1e-12)

    def test_singular(self):
        with self.assertRaises(SingularCovarianceError) as ctx:
            inverse_sqrt([[1.0, 1.0], [1.0, 1.0]])
        self.assertAlmostEqual(ctx.exception.min_eigenvalue, 0.0)
        self.assertIn('menor autovalor', str(ctx.exception))
        with self.assertRaises(SingularCovarianceError):
            inverse_sqrt([[1.0, 0.5], [0.0, 1.0]])


class BoxingTests(SimpleTestCase):
    e_pmf = [(value, 0.05) for value in range(1, 21)]

    def test_equiprobable(self):
        boxes = box_null(self.e_pmf, K=10, m=1000)
        self.assertEqual(len(boxes), 10)
        for box in boxes:
            self.assertAlmostEqual(box.prob, 0.1)
        self.assertEqual((boxes[0].low, boxes[0].high), (0, 2))
        self.assertEqual((boxes[-1].low, boxes[-1].high), (19, None))
        self.assertIn(500, boxes[-1])

    def test_merging(self):
        boxes = box_null(self.e_pmf, K=10, m=40)
        self.assertLess(len(boxes), 10)
        self.assertGreaterEqual(min(40 * box.prob for box in boxes), 5)
        self.assertAlmostEqual(sum(box.prob for box in boxes), 1.0)
        covered = [value for value, _ in self.e_pmf if any(value in box for box in boxes)]
        self.assertEqual(len(covered), 20)

    def test_degenerate(self):
        with self.assertRaises(DegenerateBoxingError):
            box_null(self.e_pmf, K=10, m=1)
        with self.assertRaises(DegenerateBoxingError):
            box_null(self.e_pmf, K=1, m=1000)


class ExternalLengthTestTests(SimpleTestCase):

    def test_perfect_fit(self):
        report = neutrality.test_GE(sample(F1, F2, F3), boxes=THIRDS)
        self.assertAlmostEqual(report.statistic, 0.0)
        self.assertAlmostEqual(report.p_value, 1.0)
        self.assertEqual(report.distribution, 'chi2(2)')

    def test_caterpillars(self):
        report = neutrality.test_GE(sample(*[F1] * 30), boxes=THIRDS)
        self.assertAlmostEqual(report.statistic, 60 * np.log(3))
        self.assertLess(report.p_value, 1e-10)

    def test_two_boxes(self):
        boxes = [Box(0, 10, 2 / 3), Box(11, None, 1 / 3)]
        self.assertEqual(neutrality.test_GE(sample(F1, F2, F3), boxes=boxes).distribution, 'chi2(1)')

    def test_null_distribution(self):
        null_E = bcp_E_distribution(5, RATIONAL)
        report = neutrality.test_GE(sample(F1, F2, F3) * 10, null_E=null_E, K=3)
        self.assertEqual(len(report.config['boxes']), 3)
        self.assertAlmostEqual(report.statistic, 0.0)

    def test_missing_null(self):
        with self.assertRaises(ValidationError):
            neutrality.test_GE(sample(F1))
        with self.assertRaises(ValidationError):
            neutrality.test_GE([], boxes=THIRDS)


class SimulationTests(SimpleTestCase):

    def test_simulate_corpus(self):
        kingman = simulate_corpus('kingman', 6, 4, seed=1)
        self.assertEqual(len(kingman), 4)
        self.assertTrue(all(F.n == 6 for F in kingman))
        self.assertEqual(simulate_corpus('beta', 7, 5, seed=3, beta=1.0), simulate_corpus('beta', 7, 5, seed=3, beta=1.0))

    def test_invalid_corpus_requests(self):
        with self.assertRaises(ValidationError):
            simulate_corpus('beta', 6, 4, seed=1)
        with self.assertRaises(ValidationError):
            simulate_corpus('aldous', 6, 4, seed=1)
        with self.assertRaises(ValidationError):
            simulate_corpus('kingman', 6, 0, seed=1)

    def test_parse_grid(self):
        grid = parse_grid('-0.9:1.0:0.1')
        self.assertEqual(len(grid), 20)
        self.assertEqual((grid[0], grid[9], grid[-1]), (-0.9, 0.0, 1.0))
        self.assertEqual(parse_grid('0, 1.5'), [0.0, 1.5])
        for text in ('0:1:0', 'a:b', '1,x'):
            with self.assertRaises(ValidationError):
                parse_grid(text)


class PowerCurveTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.null = null_model(6, FLOAT)

    def test_single_replicate(self):
        tests = ('WF', 'WSE', 'HT')
        rows = power_curve([0.0, -1.5], 6, 30, 1, seed=8, null=self.null, tests=tests)
        self.assertEqual([(row[0], row[1]) for row in rows], [
            ('WF', 0.0), ('WSE', 0.0), ('HT', 0.0), ('WF', -1.5), ('WSE', -1.5), ('HT', -1.5),
        ])
        self.assertTrue(all(row[2] in (0.0, 1.0) and row[3] == 0.0 and row[4] == 1 for row in rows))
        self.assertEqual(rows, power_curve([0.0, -1.5], 6, 30, 1, seed=8, null=self.null, tests=tests))

    def test_invalid(self):
        with self.assertRaises(ValidationError):
            power_curve([], 6, 30, 1, seed=1, null=self.null)
        with self.assertRaises(ValidationError):
            power_curve([-3.0], 6, 30, 1, seed=1, null=self.null)
        with self.assertRaises(ValidationError):
            power_curve([0.0], 6, 30, 1, seed=1, null=self.null, tests=('WF', 'KS'))
        with self.assertRaises(ValidationError):
            power_curve([0.0], 6, 30, 0, seed=1, null=self.null)

    def test_level_under_null(self):
        null = null_model(8, FLOAT)
        rows = power_curve([0.0], 8, 200, 200, seed=2024, null=null)
        self.assertEqual([row[0] for row in rows], ['GE', 'WF', 'WSE', 'HT'])
        for name, _, rate, se, _ in rows:
            with self.subTest(test=name):
                self.assertLessEqual(rate, 0.12)
                self.assertGreater(se, 0.0)

    def test_power_against_imbalance(self):
        rows = power_curve([-1.8], 6, 200, 20, seed=5, null=self.null, tests=('WSE',))
        self.assertGreater(rows[0][2], 0.5)

    def test_new_tests_not_weaker_than_hotelling(self):
        null = null_model(8, FLOAT)
        rows = power_curve([-1.8], 8, 200, 30, seed=11, null=null)
        rates = {name: rate for name, _, rate, _, _ in rows}
        for name in ('GE', 'WF', 'WSE'):
            with self.subTest(test=name):
                self.assertGreater(rates[name], 0.8)
                self.assertGreaterEqual(rates[name], rates['HT'] - 0.05)


class NeutralityCommandTests(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.path = os.path.join(tmp.name, 'corpus.jsonl')

    def test_report(self):
        write_jsonl(self.path, [fmatrix_record(F) for F in simulate_corpus('kingman', 6, 300, seed=4)])
        out = StringIO()
        call_command('neutrality', '--in', self.path, '--tests', 'GE,WF,WSE,HT', '--mode', 'rational', stdout=out)
        payload = json.loads(out.getvalue())
        self.assertEqual((payload['n'], payload['m']), (6, 300))
        self.assertEqual(payload['null']['model'], 'kingman')
        self.assertEqual([t['test'] for t in payload['tests']], ['GE', 'WF', 'WSE', 'HT'])
        self.assertTrue(all(0.0 <= t['p_value'] <= 1.0 for t in payload['tests']))

    def test_empty_corpus(self):
        write_jsonl(self.path, [])
        with self.assertRaises(CommandError):
            call_command('neutrality', '--in', self.path, stdout=StringIO())
