import numpy as np
from django.test import SimpleTestCase

from ..errors import AttrContrastError, ErrorReason
from ..tensors import as_tensor, cosine_sim, cosine_sim_grad, finite_diff_grad, hadamard, logsumexp, softmax


class AsTensorTestCase(SimpleTestCase):
    def test_read_only_copy(self):
        source = np.arange(4.0)
        tensor = as_tensor(source)
        self.assertFalse(tensor.flags.writeable)
        source[0] = 9.0
        self.assertEqual(tensor[0], 0.0)
        self.assertEqual(tensor.dtype, np.float64)

    def test_rejects_bad_input(self):
        cases = (
            # (data, reason)
            ([], ErrorReason.EMPTY_INPUT),
            (np.zeros((2, 0)), ErrorReason.EMPTY_INPUT),
            ([1.0, np.nan], ErrorReason.NON_FINITE_VALUE),
            ([[np.inf]], ErrorReason.NON_FINITE_VALUE),
        )
        for data, reason in cases:
            with self.assertRaises(AttrContrastError) as cm:
                as_tensor(data)
            self.assertIs(cm.exception.reason, reason)


class SoftmaxTestCase(SimpleTestCase):
    def test_known_values(self):
        np.testing.assert_allclose(softmax(np.zeros(4)), np.full(4, 0.25))
        np.testing.assert_allclose(softmax([0.0, np.log(3.0)]), [0.25, 0.75], atol=1e-12)
        expected = np.exp([1.0, 2.0, 3.0]) / np.exp([1.0, 2.0, 3.0]).sum()
        np.testing.assert_allclose(softmax([1.0, 2.0, 3.0]), expected, rtol=1e-12)

    def test_axis(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0]])
        np.testing.assert_allclose(softmax(x, axis=0).sum(axis=0), [1.0, 1.0])
        np.testing.assert_allclose(softmax(x, axis=1), np.full((2, 2), 0.5))
        with self.assertRaises(AttrContrastError):
            softmax(x, axis=2)

    def test_shift_invariance(self):
        generator = np.random.Generator(np.random.PCG64(5))
        for _ in range(20):
            x = generator.standard_normal(7)
            np.testing.assert_allclose(softmax(x + 123.0), softmax(x), atol=1e-12)

    def test_extreme_values_stay_finite(self):
        for x in ([1e6, -1e6], [1000.0, 1000.0], [-1e6, -1e6, -1e6]):
            result = softmax(x)
            self.assertTrue(np.all(np.isfinite(result)))
            self.assertAlmostEqual(float(result.sum()), 1.0, places=12)
        np.testing.assert_allclose(softmax([1000.0, 1000.0]), [0.5, 0.5])

    def test_logsumexp(self):
        self.assertAlmostEqual(logsumexp(np.zeros(3)), np.log(3.0))
        self.assertAlmostEqual(logsumexp([1e6, 1e6]), 1e6 + np.log(2.0))


class CosineTestCase(SimpleTestCase):
    def test_known_values(self):
        self.assertEqual(cosine_sim([1.0, 0.0], [0.0, 1.0]), 0.0)
        self.assertAlmostEqual(cosine_sim([1.0, 2.0], [2.0, 4.0]), 1.0)
        self.assertAlmostEqual(cosine_sim([1.0, 2.0], [-3.0, -6.0]), -1.0)
        self.assertAlmostEqual(cosine_sim([1.0, 1.0], [1.0, 0.0]), 1 / np.sqrt(2.0))

    def test_clipped(self):
        generator = np.random.Generator(np.random.PCG64(8))
        for _ in range(100):
            a = generator.standard_normal(5)
            self.assertLessEqual(abs(cosine_sim(a, 3.0 * a)), 1.0)

    def test_degenerate(self):
        with self.assertRaises(AttrContrastError) as cm:
            cosine_sim([0.0, 0.0], [1.0, 0.0])
        self.assertIs(cm.exception.reason, ErrorReason.DEGENERATE_VECTOR)
        with self.assertRaises(AttrContrastError) as cm:
            cosine_sim([1.0, 0.0], [1.0, 0.0, 0.0])
        self.assertIs(cm.exception.reason, ErrorReason.SHAPE_MISMATCH)

    def test_gradient_matches_finite_differences(self):
        generator = np.random.Generator(np.random.PCG64(9))
        a, b = generator.standard_normal(6), generator.standard_normal(6)
        _, grad_a, grad_b = cosine_sim_grad(a, b)
        np.testing.assert_allclose(grad_a, finite_diff_grad(lambda x: cosine_sim(x, b), a), atol=1e-8)
        np.testing.assert_allclose(grad_b, finite_diff_grad(lambda x: cosine_sim(a, x), b), atol=1e-8)


class HadamardTestCase(SimpleTestCase):
    def test_same_shape(self):
        np.testing.assert_array_equal(hadamard([[1.0, 2.0], [3.0, 4.0]], np.full((2, 2), 2.0)), [[2.0, 4.0], [6.0, 8.0]])

    def test_channel_broadcast(self):
        image = np.ones((3, 2, 2))
        spatial = np.array([[[0.1, 0.2], [0.3, 0.4]]])
        result = hadamard(image, spatial, broadcast=True)
        self.assertEqual(result.shape, (3, 2, 2))
        for channel in result:
            np.testing.assert_array_equal(channel, spatial[0])

    def test_shape_mismatch(self):
        with self.assertRaises(AttrContrastError) as cm:
            hadamard(np.ones((3, 2, 2)), np.ones((1, 2, 2)))
        self.assertIs(cm.exception.reason, ErrorReason.SHAPE_MISMATCH)
        with self.assertRaises(AttrContrastError):
            hadamard(np.ones((3, 2, 2)), np.ones((2, 2, 2)), broadcast=True)


class FiniteDiffTestCase(SimpleTestCase):
    def test_quadratic(self):
        x = np.array([[1.0, 2.0], [3.0, -4.0]])
        grad = finite_diff_grad(lambda y: float(np.sum(y ** 2)), x)
        np.testing.assert_allclose(grad, 2 * x, atol=1e-6)
        # the input is left untouched
        np.testing.assert_array_equal(x, [[1.0, 2.0], [3.0, -4.0]])

    def test_bad_eps(self):
        for eps in (0.0, -1e-5):
            with self.assertRaises(AttrContrastError) as cm:
                finite_diff_grad(lambda y: 0.0, np.zeros(2), eps)
            self.assertIs(cm.exception.reason, ErrorReason.OUT_OF_RANGE)

    def test_non_finite_function(self):
        with self.assertRaises(AttrContrastError) as cm:
            finite_diff_grad(lambda y: float('nan'), np.zeros(2))
        self.assertIs(cm.exception.reason, ErrorReason.NON_FINITE_VALUE)

    def test_known_derivatives(self):
        self.assertAlmostEqual(finite_diff_grad(lambda y: float(y[0] ** 2), np.array([3.0]))[0], 6.0, delta=1e-8)
        self.assertAlmostEqual(finite_diff_grad(lambda y: float(np.cos(y[0])), np.array([0.0]))[0], 0.0, delta=1e-8)
        a = np.array([[2.0, 0.0], [0.0, 4.0]])
        grad = finite_diff_grad(lambda y: float(y @ a @ y), np.array([1.0, 1.0]))
        np.testing.assert_allclose(grad, [4.0, 8.0], atol=1e-6)
