import os
import tempfile
from fractions import Fraction
from io import StringIO

from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import CorpusFormatError, InvalidFMatrixError, ValidationError
from apps.core.io import write_jsonl
from apps.kingman.services import enumerate_paths
from apps.statespace.services import enumerate_states

from .services import (
    FMatrix, RankedTree, TreeNode, balance_E, balance_S, balance_scatter, caterpillar, colless,
    distance, fmatrix_record, fmatrix_to_path, fmatrix_to_tree, most_balanced, nonfixed_positions, path_to_fmatrix,
    read_corpus, sackin, squared_distance, tree_to_fmatrix, validate,
)

# As cinco árvores ranqueadas com n = 5 e seus caminhos
FIVE_LEAVES = {
    (1, 2, 3, 5): [[2], [1, 3], [1, 2, 4], [1, 2, 3, 5]],
    (1, 2, 4, 5): [[2], [1, 3], [1, 2, 4], [1, 1, 3, 5]],
    (1, 2, 4, 6): [[2], [1, 3], [1, 2, 4], [0, 1, 3, 5]],
    (1, 2, 3, 7): [[2], [1, 3], [0, 2, 4], [0, 2, 3, 5]],
    (1, 2, 4, 7): [[2], [1, 3], [0, 2, 4], [0, 1, 3, 5]],
}

IMBALANCED_10 = [
    [2], [1, 3], [1, 2, 4], [1, 2, 3, 5], [1, 2, 3, 4, 6], [1, 1, 2, 3, 5, 7], [1, 1, 2, 3, 4, 6, 8],
    [1, 1, 2, 3, 4, 6, 7, 9], [1, 1, 2, 3, 4, 6, 7, 8, 10],
]

BALANCED_10 = [
    [2], [1, 3], [0, 2, 4], [0, 1, 3, 5], [0, 1, 2, 4, 6], [0, 1, 2, 4, 5, 7], [0, 0, 1, 3, 3, 6, 8],
    [0, 0, 1, 2, 3, 5, 7, 9], [0, 0, 1, 1, 2, 4, 6, 8, 10],
]


def matrix(tri):
    return FMatrix.from_tri(len(tri) + 1, tri)


def balanced_tree_8():
    def cherry(rank):
        return TreeNode(rank=rank, children=[TreeNode(), TreeNode()])
    left = TreeNode(rank=3, children=[cherry(5), cherry(6)])
    right = TreeNode(rank=4, children=[cherry(7), cherry(8)])
    return RankedTree(n=8, root=TreeNode(rank=2, children=[left, right]))


class FMatrixTests(SimpleTestCase):

    def test_nonfixed_positions(self):
        self.assertEqual(nonfixed_positions(5), [(3, 1), (4, 1), (4, 2)])
        self.assertEqual(len(nonfixed_positions(25)), 23 * 22 // 2)
        self.assertEqual(nonfixed_positions(3), [])

    def test_diagonal_is_checked(self):
        with self.assertRaises(InvalidFMatrixError) as ctx:
            matrix([[3], [1, 3], [1, 2, 4], [1, 2, 3, 5]])
        self.assertEqual(ctx.exception.column, 1)

    def test_triangle_shape_is_checked(self):
        with self.assertRaises(InvalidFMatrixError):
            FMatrix.from_tri(5, [[2], [1, 3], [1, 2, 4]])
        with self.assertRaises(InvalidFMatrixError):
            FMatrix.from_tri(4, [[2], [1, 3], [1, 2]])

    def test_infeasible_column_is_reported(self):
        with self.assertRaises(InvalidFMatrixError) as ctx:
            validate(matrix(BALANCED_10))
        self.assertEqual(ctx.exception.column, 5)

    def test_path_bijection_n5(self):
        space = enumerate_states(5)
        for path, tri in FIVE_LEAVES.items():
            F = matrix(tri)
            self.assertEqual(path_to_fmatrix(space, path), F)
            self.assertEqual(fmatrix_to_path(space, F).indices, path)

    def test_round_trip(self):
        for n in range(3, 9):
            space = enumerate_states(n)
            for path, _ in enumerate_paths(space):
                F = path_to_fmatrix(space, path)
                self.assertEqual(fmatrix_to_path(space, F), path)
                self.assertEqual(tree_to_fmatrix(fmatrix_to_tree(F)), F)

    def test_n3(self):
        F = path_to_fmatrix(enumerate_states(3), (1, 2))
        self.assertEqual(F.tri(), [[2], [1, 3]])
        tree = fmatrix_to_tree(F)
        self.assertEqual(tree.root.leaves, 3)
        self.assertEqual([node.rank for node in tree.internal_nodes()], [2, 3])

    def test_distance(self):
        F1, F2 = matrix(FIVE_LEAVES[(1, 2, 3, 5)]), matrix(FIVE_LEAVES[(1, 2, 4, 5)])
        self.assertEqual(distance(F1, F1), 0)
        self.assertEqual(distance(F1, F2), 1.0)
        self.assertEqual(distance(F1, F2), distance(F2, F1))
        with self.assertRaises(ValidationError):
            squared_distance(F1, caterpillar(6))

    def test_triangle_inequality(self):
        matrices = [matrix(tri) for tri in FIVE_LEAVES.values()]
        for a in matrices:
            for b in matrices:
                for c in matrices:
                    self.assertLessEqual(distance(a, c), distance(a, b) + distance(b, c) + 1e-12)


class BalanceTests(SimpleTestCase):

    def test_external_length_and_persistence(self):
        self.assertEqual((balance_E(matrix(IMBALANCED_10)), balance_S(matrix(IMBALANCED_10))), (42, 69))
        self.assertEqual((balance_E(matrix(BALANCED_10)), balance_S(matrix(BALANCED_10))), (32, 43))

    def test_n5_values(self):
        values = {path: (balance_E(matrix(tri)), balance_S(matrix(tri))) for path, tri in FIVE_LEAVES.items()}
        self.assertEqual(values, {
            (1, 2, 3, 5): (11, 4), (1, 2, 4, 5): (10, 3), (1, 2, 4, 6): (9, 2),
            (1, 2, 3, 7): (10, 2), (1, 2, 4, 7): (9, 1),
        })

    def test_n4_persistence(self):
        space = enumerate_states(4)
        values = {path.indices: balance_S(path_to_fmatrix(space, path)) for path, _ in enumerate_paths(space)}
        self.assertEqual(values, {(1, 2, 3): 1, (1, 2, 4): 0})

    def test_persistence_minimum_is_most_balanced(self):
        for n in range(6, 11):
            with self.subTest(n=n):
                space = enumerate_states(n)
                scored = sorted(
                    (balance_S(F), F.tri())
                    for F in (path_to_fmatrix(space, path) for path, _ in enumerate_paths(space))
                )
                self.assertLess(scored[0][0], scored[1][0])
                self.assertEqual(matrix(scored[0][1]), most_balanced(n))

    def test_most_balanced(self):
        self.assertEqual(most_balanced(5), matrix(FIVE_LEAVES[(1, 2, 4, 7)]))
        for n in range(3, 13):
            with self.subTest(n=n):
                F = most_balanced(n)
                validate(F)
                # cada evento consome um ramo da camada j enquanto houver algum
                expected = [[max(0, 2 * j + 1 - i) for j in range(1, i + 1)] for i in range(1, n)]
                self.assertEqual(F.tri(), expected)
        self.assertEqual((sackin(most_balanced(8)), colless(most_balanced(8))), (24, 0))

    def test_caterpillar(self):
        self.assertEqual(caterpillar(5), matrix(FIVE_LEAVES[(1, 2, 3, 5)]))
        F = caterpillar(10)
        self.assertEqual((sackin(F), colless(F)), (54, 36))

    def test_balanced_tree(self):
        F = tree_to_fmatrix(balanced_tree_8())
        validate(F)
        self.assertEqual((sackin(F), colless(F)), (24, 0))

    def test_scatter(self):
        scatter = balance_scatter(enumerate_states(5), 'sackin')
        self.assertEqual(sum(prob for _, _, prob in scatter), 1)
        self.assertIn((14, 4, Fraction(1, 3)), scatter)
        with self.assertRaises(ValidationError):
            balance_scatter(enumerate_states(5), 'gini')


class CorpusTests(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.path = os.path.join(tmp.name, 'corpus.jsonl')

    def test_read_corpus(self):
        write_jsonl(self.path, [fmatrix_record(caterpillar(6)), fmatrix_record(caterpillar(6))])
        self.assertEqual(list(read_corpus(self.path)), [caterpillar(6)] * 2)

    def test_bad_record_line(self):
        write_jsonl(self.path, [fmatrix_record(caterpillar(5)), {'n': 5, 'tri': [[3]]}])
        with self.assertRaises(CorpusFormatError) as ctx:
            list(read_corpus(self.path))
        self.assertEqual(ctx.exception.line, 2)

    def test_balance_command(self):
        write_jsonl(self.path, [
            fmatrix_record(matrix(FIVE_LEAVES[(1, 2, 3, 5)])),
            fmatrix_record(matrix(BALANCED_10)),
        ])
        out = StringIO()
        call_command('balance', '--in', self.path, stdout=out)
        self.assertEqual(out.getvalue().splitlines(), [
            'record,n,E,S,sackin,colless',
            '1,5,11,4,14,6',
            '2,10,32,43,,',
        ])

    def test_scatter_command(self):
        out = StringIO()
        call_command('balance', '--scatter', 'colless', '--n', '5', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], 'index_value,S,probability')
        self.assertIn('6,4,1/3', lines)


class BalanceAPITests(APISimpleTestCase):

    def test_balance(self):
        response = self.client.post(
            '/api/fmatrix/balance/', {'n': 5, 'tri': FIVE_LEAVES[(1, 2, 3, 5)]}, format='json',
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data, {'E': 11, 'S': 4, 'sackin': 14, 'colless': 6})

    def test_invalid_matrix(self):
        response = self.client.post('/api/fmatrix/balance/', {'n': 5, 'tri': [[3]]}, format='json')
        self.assertEqual(response.status_code, 400)
        response = self.client.post('/api/fmatrix/balance/', {'n': 10, 'tri': BALANCED_10}, format='json')
        self.assertEqual(response.status_code, 400)
