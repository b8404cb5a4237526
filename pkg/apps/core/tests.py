import json
import os
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from openpyxl import load_workbook

from rankedtrees.cli import dispatch

from .conf import DEFAULTS, setting
from .exceptions import (
    CapacityError, CorpusFormatError, InvalidFMatrixError, SingularChainError, ValidationError,
)
from .io import iter_jsonl, write_json, write_jsonl, write_table
from .numeric import (
    AUTO, FLOAT, RATIONAL, asarray, format_number, inverse, parse_number, resolve_mode,
)


class NumericTests(SimpleTestCase):

    def test_format_number(self):
        self.assertEqual(format_number(Fraction(874, 900)), '437/450')
        self.assertEqual(format_number(Fraction(4, 2)), '2')
        self.assertEqual(format_number(7), '7')
        self.assertEqual(format_number(np.int64(3)), '3')
        self.assertEqual(format_number(0.1), '0.10000000000000001')

    def test_parse_number(self):
        self.assertEqual(parse_number('3/4'), Fraction(3, 4))
        self.assertEqual(parse_number(' 5 '), Fraction(5))
        with self.assertRaises(ValidationError):
            parse_number('abc')

    def test_resolve_mode(self):
        self.assertEqual(resolve_mode(AUTO, 12), RATIONAL)
        self.assertEqual(resolve_mode(AUTO, 13), FLOAT)
        self.assertEqual(resolve_mode(FLOAT, 5), FLOAT)
        with self.assertRaises(ValidationError):
            resolve_mode('decimal', 5)

    @override_settings(RANKEDTREES_EXACT_MAX_N=6)
    def test_auto_follows_settings(self):
        self.assertEqual(resolve_mode(AUTO, 7), FLOAT)

    def test_rational_inverse(self):
        matrix = asarray([[2, 1], [1, 1]], RATIONAL)
        inv = inverse(matrix)
        self.assertEqual(inv.tolist(), [[1, -1], [-1, 2]])
        self.assertIsInstance(inv[0, 0], Fraction)

    def test_singular_inverse(self):
        with self.assertRaises(SingularChainError):
            inverse(asarray([[1, 1], [1, 1]], RATIONAL))
        with self.assertRaises(SingularChainError):
            inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))


class ConfTests(SimpleTestCase):

    def test_defaults(self):
        self.assertEqual(DEFAULTS['RANKEDTREES_MAX_N'], 30)
        self.assertEqual(setting('RANKEDTREES_EIGEN_FLOOR'), 1e-12)

    @override_settings(RANKEDTREES_MIN_EXPECTED=2.5)
    def test_override(self):
        self.assertEqual(setting('RANKEDTREES_MIN_EXPECTED'), 2.5)


class ExceptionTests(SimpleTestCase):

    def test_exit_codes(self):
        self.assertEqual(ValidationError('x').exit_code, 2)
        self.assertEqual(CapacityError('x').exit_code, 3)
        self.assertEqual(InvalidFMatrixError('x', column=2).exit_code, 2)

    def test_messages_point_to_location(self):
        self.assertIn('linha 3', str(CorpusFormatError('JSON inválido', line=3)))
        self.assertIn('coluna 4', str(InvalidFMatrixError('diagonal', column=4)))


class IOTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_json_is_written_atomically(self):
        target = self.path('out/report.json')
        write_json(target, {'a': 1})
        with open(target, encoding='utf-8') as handle:
            self.assertEqual(json.load(handle), {'a': 1})
        self.assertEqual(os.listdir(os.path.dirname(target)), ['report.json'])

    def test_jsonl_round_trip_and_line_numbers(self):
        target = self.path('corpus.jsonl')
        self.assertEqual(write_jsonl(target, [{'n': 3}, {'n': 4}]), 2)
        self.assertEqual([record for _, record in iter_jsonl(target)], [{'n': 3}, {'n': 4}])
        with open(target, 'a', encoding='utf-8') as handle:
            handle.write('\n{quebrado\n')
        with self.assertRaises(CorpusFormatError) as ctx:
            list(iter_jsonl(target))
        self.assertEqual(ctx.exception.line, 4)

    def test_missing_file(self):
        with self.assertRaises(ValidationError):
            list(iter_jsonl(self.path('nada.jsonl')))

    def test_csv_and_xlsx_tables(self):
        rows = [[1, Fraction(1, 3)], [2, 0.5]]
        csv_path = self.path('t.csv')
        write_table(csv_path, ['a', 'b'], rows)
        with open(csv_path, encoding='utf-8') as handle:
            self.assertEqual(handle.read(), 'a,b\n1,1/3\n2,0.5\n')

        xlsx_path = self.path('t.xlsx')
        self.assertEqual(write_table(xlsx_path, ['a', 'b'], rows), 2)
        sheet = load_workbook(xlsx_path).active
        self.assertEqual([c.value for c in sheet[1]], ['a', 'b'])
        self.assertEqual([c.value for c in sheet[2]], [1, '1/3'])
        self.assertEqual([c.value for c in sheet[3]], [2, 0.5])


class CommandErrorTests(SimpleTestCase):

    def test_validation_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('statespace', '--n', '2', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_capacity_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('statespace', '--n', '31', '--sizes', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 3)


class CliDispatchTests(SimpleTestCase):

    def run_cli(self, *argv):
        out, err = StringIO(), StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = dispatch(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_statespace_sizes(self):
        code, out, _ = self.run_cli('statespace', '--n', '25', '--sizes')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip().splitlines()[-1], 'total,121393')

    def test_frechet(self):
        code, out, _ = self.run_cli('frechet', '--n', '6', '--model', 'kingman')
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload['min_cost'], '437/450')
        self.assertEqual([m['path'] for m in payload['means']], [[1, 2, 4, 6, 10], [1, 2, 4, 7, 11]])

    def test_moments(self):
        code, out, _ = self.run_cli('moments', '--n', '5', '--targets', 'S,E')
        self.assertEqual(code, 0)
        values = [line.split(',')[-1] for line in out.strip().splitlines()[1:]]
        self.assertEqual(values, ['8/3', '11/9', '10', '2/3', '5/6'])

    def test_exit_codes(self):
        self.assertEqual(self.run_cli('statespace', '--n', '2')[0], 2)
        self.assertEqual(self.run_cli('statespace', '--n', '40', '--sizes')[0], 3)
        self.assertEqual(self.run_cli('descobrir')[0], 2)
        self.assertEqual(self.run_cli('statespace', '--flag-inexistente')[0], 2)
        self.assertEqual(self.run_cli('sample', '--n', '5')[0], 2)

    def test_help(self):
        code, out, _ = self.run_cli('test', '--help')
        self.assertEqual(code, 0)
        self.assertIn('--tests', out)

    def test_simulate_is_reproducible(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        outputs = []
        for name in ('a.jsonl', 'b.jsonl'):
            target = os.path.join(tmp.name, name)
            code, _, _ = self.run_cli(
                'simulate', '--model', 'beta', '--beta', '-0.5', '--n', '8', '--count', '20',
                '--seed', '7', '--out', target,
            )
            self.assertEqual(code, 0)
            with open(target, 'rb') as handle:
                outputs.append(handle.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(len(outputs[0].splitlines()), 20)
