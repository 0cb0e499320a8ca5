import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from ..attention import SEXTET_FIELDS, ContrastiveBatch
from ..errors import AttrContrastError, ErrorReason
from ..features import CombinationEmbedding, ImageFeatures
from ..gradcheck import (GRADCHECK_TARGETS, AttributeFixture, PerceptualFixture, gradcheck, load_fixture,
                         random_fixture, relative_error)
from ..tensorio import write_tensor


class GradcheckTestCase(SimpleTestCase):
    def test_random_fixtures_pass(self):
        for target in GRADCHECK_TARGETS:
            for seed in range(20):
                report = gradcheck(target, random_fixture(target, seed), eps=1e-5, tol=1e-4)
                self.assertTrue(report.passed, f'{target} seed {seed}: {report.max_rel_error}')

    def test_standard_infonce_passes(self):
        for seed in range(5):
            report = gradcheck('l_diff', random_fixture('l_diff', seed), nce_standard=True)
            self.assertTrue(report.passed, f'seed {seed}: {report.max_rel_error}')

    def test_identical_unit_vectors(self):
        batch = ContrastiveBatch.from_arrays({name: np.array([[1.0, 0.0, 0.0]]) for name in SEXTET_FIELDS})
        report = gradcheck('l_diff', batch)
        self.assertTrue(np.isfinite(report.max_rel_error))
        self.assertEqual(set(report.as_dict()), {'target', 'eps', 'tol', 'max_rel_error', 'passed'})

    def test_clamped_attribute_fixture(self):
        fixture = AttributeFixture(ImageFeatures([[100.0]], 1, 1), CombinationEmbedding([100.0]), 1)
        with self.assertRaises(AttrContrastError) as cm:
            gradcheck('l_attr', fixture)
        self.assertIs(cm.exception.reason, ErrorReason.DEGENERATE_FIXTURE)

    def test_zero_norm_fixture(self):
        arrays = {name: np.array([[1.0, 0.0]]) for name in SEXTET_FIELDS}
        arrays['v2_pos'] = np.zeros((1, 2))
        with self.assertRaises(AttrContrastError) as cm:
            gradcheck('l_diff', ContrastiveBatch.from_arrays(arrays))
        self.assertIs(cm.exception.reason, ErrorReason.DEGENERATE_FIXTURE)

    def test_bad_arguments(self):
        fixture = PerceptualFixture(np.ones(4), np.zeros(4), (1, 2, 2))
        with self.assertRaises(AttrContrastError) as cm:
            gradcheck('l_gan', fixture)
        self.assertIs(cm.exception.reason, ErrorReason.OUT_OF_RANGE)
        with self.assertRaises(AttrContrastError):
            gradcheck('l_per', fixture, tol=0.0)
        with self.assertRaises(AttrContrastError):
            random_fixture('l_per', -1)

    def test_defaults_come_from_settings(self):
        fixture = random_fixture('l_per', 0)
        report = gradcheck('l_per', fixture)
        self.assertEqual((report.eps, report.tol), (1e-5, 1e-4))
        with self.settings(ATTRCONTRAST={**settings.ATTRCONTRAST, 'GRADCHECK_EPS': 1e-6, 'GRADCHECK_TOL': 0.5}):
            report = gradcheck('l_per', fixture)
            self.assertEqual((report.eps, report.tol), (1e-6, 0.5))
            self.assertEqual(gradcheck('l_per', fixture, eps=1e-4).eps, 1e-4)
        with self.settings(ATTRCONTRAST={**settings.ATTRCONTRAST, 'GRADCHECK_TOL': 0.0}):
            with self.assertRaises(AttrContrastError) as cm:
                gradcheck('l_per', fixture)
            self.assertIs(cm.exception.reason, ErrorReason.OUT_OF_RANGE)

    def test_random_fixture_is_seeded(self):
        first = random_fixture('l_diff', 9).arrays()
        second = random_fixture('l_diff', 9).arrays()
        for name in SEXTET_FIELDS:
            np.testing.assert_array_equal(first[name], second[name])


class RelativeErrorTestCase(SimpleTestCase):
    def test_floor(self):
        self.assertAlmostEqual(float(relative_error(0.0, 1e-6)), 0.01)
        self.assertEqual(float(relative_error(2.0, 2.0)), 0.0)
        self.assertAlmostEqual(float(relative_error(1.0, 1.1)), 0.1 / 1.1)


class LoadFixtureTestCase(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_contrastive_fixture(self):
        random_fixture('l_diff', 3).write(self.root)
        self.assertTrue(gradcheck('l_diff', load_fixture('l_diff', self.root)).passed)

    def test_perceptual_fixture(self):
        write_tensor([1.0, 2.0, 3.0, 4.0], self.root / 'v1_neg.catf')
        write_tensor([0.0, 2.0, 1.0, 4.0], self.root / 'v2_neg.catf')
        fixture = load_fixture('l_per', self.root)
        self.assertEqual(fixture.chw, (4, 1, 1))
        self.assertEqual(load_fixture('l_per', self.root, chw=(1, 2, 2)).chw, (1, 2, 2))
        self.assertTrue(gradcheck('l_per', fixture).passed)

    def test_attribute_fixture(self):
        generator = np.random.Generator(np.random.PCG64(2))
        write_tensor(0.5 * generator.standard_normal((3, 2, 2)), self.root / 'v.catf')
        write_tensor(0.5 * generator.standard_normal(3), self.root / 's.catf')
        fixture = load_fixture('l_attr', self.root, label=0)
        self.assertEqual((fixture.v.h, fixture.v.w, fixture.label), (2, 2, 0))
        self.assertTrue(gradcheck('l_attr', fixture).passed)

    def test_missing_files(self):
        with self.assertRaises(AttrContrastError) as cm:
            load_fixture('l_attr', self.root)
        self.assertIs(cm.exception.reason, ErrorReason.MISSING_FILE)
        self.assertEqual(cm.exception.status, 2)

    def test_zero_embedding_file(self):
        write_tensor(np.ones((2, 3)), self.root / 'v.catf')
        write_tensor(np.zeros(2), self.root / 's.catf')
        with self.assertRaises(AttrContrastError) as cm:
            load_fixture('l_attr', self.root)
        self.assertIs(cm.exception.reason, ErrorReason.DEGENERATE_FIXTURE)
