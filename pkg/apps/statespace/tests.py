import json
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework.test import APISimpleTestCase

from apps.core.exceptions import CapacityError, ValidationError

from .encoding import decode, diff_encoding
from .services import enumerate_states, fibonacci, lift_states, tier_sizes

STATES_N5 = [
    (0, 0, 0, 5), (0, 0, 4, 3), (0, 3, 2, 2), (0, 3, 2, 1), (2, 1, 1, 1), (2, 1, 1, 0), (2, 1, 0, 0),
]


def vectors(space):
    return [tuple(int(v) for v in row) for row in space.vectors]


class EncodingTests(SimpleTestCase):

    def test_diff_encoding(self):
        self.assertEqual(diff_encoding((0, 3, 2, 1, 1)), ((0, 1, 1, 0), 1))
        self.assertEqual(diff_encoding((0, 0, 0, 5)), ((0, 0, 0), 5))
        self.assertEqual(
            diff_encoding((0, 0, 0, 5, 4, 4, 3, 2, 1, 0)),
            ((0, 0, 0, 1, 0, 1, 1, 1, 1), 0),
        )

    def test_decode_inverts_encoding(self):
        for x in STATES_N5:
            self.assertEqual(decode(*diff_encoding(x)), x)

    def test_rejects_jumps(self):
        with self.assertRaises(ValidationError):
            diff_encoding((0, 4, 2, 1))


class EnumerationTests(SimpleTestCase):

    def test_n4(self):
        self.assertEqual(vectors(enumerate_states(4)), [(0, 0, 4), (0, 3, 2), (2, 1, 1), (2, 1, 0)])

    def test_n5(self):
        space = enumerate_states(5)
        self.assertEqual(vectors(space), STATES_N5)
        self.assertEqual(space.tier_counts(), [1, 1, 2, 3])

    def test_counts_follow_fibonacci(self):
        for n in range(3, 21):
            with self.subTest(n=n):
                self.assertEqual(enumerate_states(n).size + 1, fibonacci(n + 1))

    def test_n25(self):
        self.assertEqual(enumerate_states(25).size + 1, 121393)

    def test_last_entries_match_formula(self):
        for n in range(3, 16):
            with self.subTest(n=n):
                sizes = tier_sizes(n)
                self.assertEqual(enumerate_states(n).last_entry_counts(), sizes)
                self.assertEqual(sum(sizes) + 1, fibonacci(n + 1))

    def test_tier_sizes_small(self):
        self.assertEqual(tier_sizes(3), [0, 1, 0, 1])
        self.assertEqual(tier_sizes(5)[0], 2)
        self.assertEqual(tier_sizes(9)[8], 0)

    def test_index_round_trip(self):
        space = enumerate_states(8)
        for index in range(1, space.size + 1):
            state = space.state(index)
            self.assertEqual(space.index_of(state.x), index)
            self.assertEqual(state.column, 7 - state.tier)
        dcodes = {state.dcode for state in space.states}
        self.assertEqual(len(dcodes), space.size)

    def test_index_of_rejects_non_states(self):
        space = enumerate_states(5)
        for x in [(0, 0, 3, 3), (0, 3, 2), (1, 1, 1, 1)]:
            with self.assertRaises(ValidationError):
                space.index_of(x)

    def test_lifting(self):
        for n in range(3, 9):
            with self.subTest(n=n):
                self.assertEqual(lift_states(enumerate_states(n)), set(vectors(enumerate_states(n + 1))))

    def test_limits(self):
        with self.assertRaises(ValidationError):
            enumerate_states(2)
        with self.assertRaises(CapacityError) as ctx:
            enumerate_states(31)
        self.assertIn(str(fibonacci(32)), str(ctx.exception))


class StateSpaceCommandTests(SimpleTestCase):

    def test_sizes_csv(self):
        out = StringIO()
        call_command('statespace', '--n', '4', '--sizes', stdout=out)
        self.assertEqual(
            out.getvalue().splitlines(),
            ['j,count', '0,1', '1,1', '2,1', '3,0', '4,1', 'total,5'],
        )

    def test_sizes_n25(self):
        out = StringIO()
        call_command('statespace', '--n', '25', '--sizes', stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[1], f'0,{fibonacci(24) - 1}')
        self.assertEqual(lines[-1], 'total,121393')

    def test_states_json(self):
        out = StringIO()
        call_command('statespace', '--n', '4', stdout=out)
        self.assertEqual(json.loads(out.getvalue()), [
            {'index': 1, 'tier': 0, 'x': [0, 0, 4]},
            {'index': 2, 'tier': 1, 'x': [0, 3, 2]},
            {'index': 3, 'tier': 2, 'x': [2, 1, 1]},
            {'index': 4, 'tier': 2, 'x': [2, 1, 0]},
        ])

    def test_emit_file(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        target = os.path.join(tmp.name, 'states.json')
        call_command('statespace', '--n', '5', '--emit', target, stdout=StringIO(), stderr=StringIO())
        with open(target, encoding='utf-8') as handle:
            payload = json.load(handle)
        self.assertEqual([tuple(s['x']) for s in payload], STATES_N5)
        self.assertEqual([s['index'] for s in payload], list(range(1, 8)))


class StateSpaceAPITests(APISimpleTestCase):

    def test_sizes(self):
        response = self.client.get('/api/statespace/25/sizes/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['total'], 121393)

    def test_states(self):
        response = self.client.get('/api/statespace/4/states/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual([s['x'] for s in response.data], [[0, 0, 4], [0, 3, 2], [2, 1, 1], [2, 1, 0]])
        self.assertEqual(response.data[1]['external_count'], 2)

    def test_errors(self):
        self.assertEqual(self.client.get('/api/statespace/31/sizes/').status_code, 413)
        self.assertEqual(self.client.get('/api/statespace/2/sizes/').status_code, 400)
        self.assertEqual(self.client.get('/api/statespace/20/states/').status_code, 413)
