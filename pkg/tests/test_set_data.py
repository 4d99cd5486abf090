"""
Tests for JSON ingestion and canonical artifact formatting.
"""
import math
import os
import sys
import unittest

import numpy as np

# Add parent directory to path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import export_data  # noqa: E402
import set_data  # noqa: E402
from errors import InputError  # noqa: E402
from geometry import fig1, m_set  # noqa: E402
from separation import Branch  # noqa: E402


class TestParsing(unittest.TestCase):

    def test_parse_point(self):
        np.testing.assert_allclose(set_data.parse_point('2,0', 2), [2.0, 0.0])
        with self.assertRaises(InputError):
            set_data.parse_point('2,0', 3)
        with self.assertRaises(InputError):
            set_data.parse_point('two,0')

    def test_builtin_with_arguments(self):
        pc_set = set_data.builtin_set('unit_box(2,1)')
        self.assertEqual((pc_set.n, pc_set.m), (2, 1))
        self.assertEqual(set_data.builtin_set('fig1', points_per_axis=5).grid.size, 5)

    def test_builtin_errors(self):
        for ref in ('nope', 'unit_box(a)', 'fig1(1,2,3,4,5)'):
            with self.assertRaises(InputError, msg=ref):
                set_data.builtin_set(ref)

    def test_set_errors(self):
        base = {'n': 1, 'm': 1, 'y_box': [[0.0, 1.0]], 'grid': {'points_per_axis': 3}}
        with self.assertRaises(InputError):
            set_data.parse_set({k: v for k, v in base.items() if k != 'n'})
        with self.assertRaises(InputError):
            set_data.parse_set(dict(base, y_box=[[0.0, 1.0], [0.0, 1.0]]))
        with self.assertRaises(InputError):
            set_data.parse_set(dict(base, grid={}))
        with self.assertRaises(InputError):
            set_data.parse_set(dict(base, constraints=[{'a': [1.0, 2.0], 'b': 0.0}]))
        with self.assertRaises(InputError):
            set_data.parse_set(dict(base, constraints=[{'a': [{'terms': [{'exp': [1]}]}],
                                                        'b': 0.0}]))

    def test_wrongly_typed_fields(self):
        """Type errors in any field are input errors, not crashes."""
        base = {'n': 1, 'm': 1, 'y_box': [[0.0, 1.0]], 'grid': {'points_per_axis': 3}}
        bad_sets = [dict(base, n='abc'), dict(base, m=[1]), dict(base, y_box=5),
                    dict(base, grid=3), dict(base, x_bound='wide'),
                    dict(base, constraints=[{'a': 1.0, 'b': 0.0}])]
        for obj in bad_sets:
            with self.assertRaises(InputError, msg=repr(obj)):
                set_data.parse_set(obj)
        with self.assertRaises(InputError):
            set_data.parse_paff({'n': 'one', 'm': 1, 'coeffs': [1.0, 2.0]})
        with self.assertRaises(InputError):
            set_data.parse_paff({'n': 1, 'm': 1, 'coeffs': 7})
        module = {'n': 1, 'm': 1, 'grid': {'y_box': [[0.0, 1.0]], 'points_per_axis': 2},
                  'fibers': [{'generators': [[1.0, 1.0]]}] * 2}
        for obj in (dict(module, n='abc'), dict(module, fibers=[{}, {}]),
                    dict(module, grid={'y_box': 5, 'points_per_axis': 2})):
            with self.assertRaises(InputError, msg=repr(obj)):
                set_data.parse_module(obj)

    def test_set_round_trip(self):
        original = m_set(5)
        restored = set_data.parse_set(export_data.set_to_dict(original))
        self.assertEqual(restored.name, original.name)
        for a, b in zip(original.grid_slices, restored.grid_slices):
            self.assertAlmostEqual(a.support([1.0]), b.support([1.0]), places=9)

    def test_paff_coefficient_count(self):
        with self.assertRaises(InputError):
            set_data.parse_paff({'n': 1, 'm': 1, 'coeffs': [1.0]})
        p = set_data.parse_paff({'function': {'n': 1, 'm': 1, 'coeffs': [1.0, 2.0]}})
        self.assertAlmostEqual(p.evaluate([3.0], [0.0]), 7.0)

    def test_document_kind(self):
        self.assertEqual(set_data.document_kind(fig1()), 'set')
        self.assertEqual(set_data.document_kind({'fibers': []}), 'module')
        self.assertEqual(set_data.document_kind({'branch': 'SliceEmpty'}), 'certificate')
        self.assertEqual(set_data.document_kind({'coeffs': []}), 'paff')
        self.assertEqual(set_data.document_kind({'kind': 'distance', 'mu': []}), 'separator')
        with self.assertRaises(InputError):
            set_data.document_kind([1, 2])

    def test_separator(self):
        sep = set_data.parse_separator({'kind': 'correction', 'v': [1.0], 'c': -0.5,
                                        'mu': [0.0, None], 'y_z': [0.0], 'delta': 0.1})
        self.assertEqual(sep.kind, 'correction')
        self.assertTrue(math.isnan(sep.mu[1]))
        for bad in ({'kind': 'wavy', 'v': [1.0], 'c': 0.0, 'mu': [], 'y_z': [0.0]},
                    {'kind': 'distance', 'v': [0.0], 'c': 'x', 'mu': [], 'y_z': [0.0]},
                    {'kind': 'distance', 'mu': []}):
            with self.assertRaises(InputError):
                set_data.parse_separator(bad)

    def test_bad_certificate(self):
        with self.assertRaises(InputError):
            set_data.parse_certificate({'branch': 'Sideways', 'v': [0], 'c': 0, 'M': 0,
                                        'y_z': [0]})


class TestCanonicalJson(unittest.TestCase):

    def test_formatting(self):
        text = export_data.canonical_json({'b': math.nan, 'a': np.float64(1 / 3),
                                           'c': Branch.SLICE_EMPTY, 'd': np.arange(2)})
        self.assertEqual(text, '{\n  "a": 0.333333333333,\n  "b": null,\n'
                               '  "c": "SliceEmpty",\n  "d": [\n    0,\n    1\n  ]\n}\n')

    def test_infinity_is_null(self):
        self.assertEqual(export_data.canonical_json([math.inf]), '[\n  null\n]\n')

    def test_numpy_bools(self):
        self.assertEqual(export_data.canonical_json(np.bool_(True)), 'true\n')


if __name__ == '__main__':
    unittest.main()
