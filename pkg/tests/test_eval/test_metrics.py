import unittest

import numpy as np

from evdiff.errors import ShapeMismatchError
from evdiff.eval.metrics import SSIM_HEADER_NOTE, MetricReport, evaluate, mse, ssim
from evdiff.simulator.frames import FrameSequence


class TestMSE(unittest.TestCase):

    def test_identical(self):
        a = np.random.default_rng(0).random((3, 1, 4, 4))
        per_frame, mean = mse(a, a)
        np.testing.assert_array_equal(per_frame, np.zeros(3))
        self.assertEqual(mean, 0.0)

    def test_constant_gap(self):
        _, mean = mse(np.zeros((2, 1, 3, 3)), np.full((2, 1, 3, 3), 0.5))
        self.assertEqual(mean, 0.25)

    def test_matches_loop(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((4, 3, 5, 6)), rng.random((4, 3, 5, 6))
        per_frame, _ = mse(a, b)
        for f in range(4):
            total = 0.0
            for value_a, value_b in zip(a[f].ravel(), b[f].ravel()):
                total += (value_a - value_b) ** 2
            self.assertAlmostEqual(per_frame[f], total / a[f].size, places=12)

    def test_frame_sequences_and_3d_input(self):
        a = np.zeros((2, 1, 3, 3))
        per_frame, _ = mse(FrameSequence(a), np.zeros((2, 3, 3)))
        self.assertEqual(per_frame.shape, (2,))

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            mse(np.zeros((2, 1, 3, 3)), np.zeros((3, 1, 3, 3)))


class TestSSIM(unittest.TestCase):

    def test_identical(self):
        a = np.random.default_rng(2).random((2, 1, 16, 16))
        per_frame, mean = ssim(a, a)
        np.testing.assert_allclose(per_frame, [1.0, 1.0], atol=1e-12)
        self.assertAlmostEqual(mean, 1.0, places=12)

    def test_uniform_frames(self):
        a = np.full((1, 1, 12, 12), 0.3)
        self.assertAlmostEqual(ssim(a, a)[1], 1.0, places=12)

    # Flat frames only differ in luminance: (2 mu_a mu_b + c1) / (mu_a^2 + mu_b^2 + c1)
    def test_luminance_only(self):
        a, b = np.full((1, 1, 12, 12), 0.3), np.full((1, 1, 12, 12), 0.5)
        c1 = 0.01 ** 2
        self.assertAlmostEqual(ssim(a, b)[1], (0.3 + c1) / (0.34 + c1), places=8)

    def test_inverted_frame(self):
        a = np.random.default_rng(3).random((1, 1, 24, 24))
        self.assertLess(ssim(a, 1.0 - a)[1], 0.0)

    def test_colour_channels_averaged(self):
        rng = np.random.default_rng(4)
        a = rng.random((1, 3, 16, 16))
        b = a.copy()
        b[0, 2] = rng.random((16, 16))
        per_channel = [ssim(a[:, [c]], b[:, [c]])[1] for c in range(3)]
        self.assertAlmostEqual(ssim(a, b)[1], float(np.mean(per_channel)), places=12)

    def test_frames_smaller_than_window(self):
        with self.assertRaises(ValueError):
            ssim(np.zeros((1, 1, 10, 16)), np.zeros((1, 1, 10, 16)))

    def test_unsupported_window(self):
        a = np.zeros((1, 1, 16, 16))
        with self.assertRaises(ValueError):
            ssim(a, a, window=7)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            ssim(np.zeros((1, 1, 16, 16)), np.zeros((1, 1, 16, 17)))

class TestMetricSymmetries(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(5)
        self.a, self.b = rng.random((4, 2, 16, 16)), rng.random((4, 2, 16, 16))

    def test_arguments_commute(self):
        for metric in (mse, ssim):
            forward, mean = metric(self.a, self.b)
            backward, reverse_mean = metric(self.b, self.a)
            np.testing.assert_allclose(forward, backward, rtol=1e-12, atol=0)
            self.assertAlmostEqual(mean, reverse_mean, places=12)

    # Test when both inputs get the same pixel shuffle
    def test_mse_ignores_shared_pixel_permutation(self):
        order = np.random.default_rng(6).permutation(16 * 16)

        def shuffle(frames):
            flat = frames.reshape(4, 2, -1)[:, :, order]
            return flat.reshape(frames.shape)

        np.testing.assert_allclose(mse(shuffle(self.a), shuffle(self.b))[0], mse(self.a, self.b)[0],
                                   rtol=1e-12, atol=0)

    def test_frame_order_only_reorders_rows(self):
        order = [2, 0, 3, 1]
        for metric in (mse, ssim):
            per_frame, mean = metric(self.a, self.b)
            shuffled, shuffled_mean = metric(self.a[order], self.b[order])
            np.testing.assert_array_equal(shuffled, per_frame[order])
            self.assertAlmostEqual(shuffled_mean, mean, places=12)



class TestEvaluate(unittest.TestCase):

    def test_report_rows(self):
        a = np.random.default_rng(5).random((3, 1, 12, 12))
        report = evaluate(a, a)
        self.assertIsInstance(report, MetricReport)
        rows = report.to_rows()
        self.assertEqual([row["frame_index"] for row in rows], [0, 1, 2, "mean"])
        self.assertEqual(rows[-1]["mse"], 0.0)
        self.assertAlmostEqual(rows[-1]["ssim"], 1.0, places=12)

    def test_header_note_names_window(self):
        self.assertTrue(SSIM_HEADER_NOTE.startswith("#"))
        self.assertIn("11x11", SSIM_HEADER_NOTE)


if __name__ == '__main__':
    unittest.main()
