import unittest

import numpy as np

from evdiff.diffusion.denoisers import GaussianPosteriorDenoiser
from evdiff.diffusion.schedule import make_schedule
from evdiff.sampler.sampling import SamplerConfig, StepContext, sample
from evdiff.zeroshot.hook import ZeroShotHook
from evdiff.zeroshot.modulation import (
    ReferenceSet,
    WeightSchedule,
    build_reference_sets,
    deviations,
    modulate,
    modulate_interp,
    modulate_predict,
    vfi_layout,
    weight,
)


class TestModulationFormulas(unittest.TestCase):

    def test_interp_hand_value(self):
        self.assertAlmostEqual(modulate_interp(0.0, 0.2, 0.6, 0.5), 0.2)

    def test_interp_common_shift(self):
        u = np.array([0.3, -0.1])
        np.testing.assert_allclose(modulate_interp(u, 0.25, 0.25, 1.0), u + 0.25)

    def test_interp_zero_alpha(self):
        u = np.array([0.3, -0.1])
        np.testing.assert_array_equal(modulate_interp(u, 0.4, -0.8, 0.0), u)

    # the correction is exactly alpha times the mean deviation
    def test_interp_equals_mean_deviation_shift(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            u, d0, df = rng.standard_normal((3, 4, 1, 5, 5))
            alpha = rng.uniform()
            np.testing.assert_allclose(modulate_interp(u, d0, df, alpha) - u, alpha * (d0 + df) / 2.0,
                                       rtol=0, atol=1e-12)

    def test_predict_hand_value(self):
        self.assertAlmostEqual(modulate_predict(1.0, -0.4, 0.25), 0.9)

    def test_predict_zero_alpha(self):
        u = np.array([0.7, 0.2])
        np.testing.assert_array_equal(modulate_predict(u, 5.0, 0.0), u)


class TestReferenceSets(unittest.TestCase):

    def test_layouts(self):
        self.assertEqual(vfi_layout("vfi4"), ([0, 4, 8], [1, 2, 3, 5, 6, 7]))
        self.assertEqual(vfi_layout("vfi11"), ([0, 11], list(range(1, 11))))
        self.assertEqual(vfi_layout("vfp"), ([0], list(range(1, 12))))
        with self.assertRaises(ValueError):
            vfi_layout("reconstruct")

    # Test when there are too few frames for the reference layout
    def test_short_sequences(self):
        with self.assertRaises(ValueError):
            vfi_layout("vfi4", 4)
        with self.assertRaises(ValueError):
            build_reference_sets("vfi4", np.zeros((4, 1, 2, 2)), 4)
        with self.assertRaises(ValueError):
            vfi_layout("vfi11", 1)
        self.assertEqual(vfi_layout("vfi4", 5), ([0, 4], [1, 2, 3]))

    def test_vfi4_segments(self):
        latents = np.random.default_rng(0).random((12, 1, 2, 2))
        sets = build_reference_sets("vfi4", latents, 12)
        self.assertEqual([(s.first_index, s.last_index, s.span) for s in sets], [(0, 4, (0, 4)), (4, 8, (4, 9))])
        np.testing.assert_array_equal(sets[1].first, latents[4])

    def test_vfp_set(self):
        latents = np.random.default_rng(1).random((12, 1, 2, 2))
        (refs,) = build_reference_sets("vfp", latents, 12)
        self.assertEqual(refs.mode, "prediction")
        self.assertIsNone(deviations(latents, refs)[1])

    def test_deviations(self):
        u = np.zeros((3, 1, 1, 1))
        refs = ReferenceSet(np.full((1, 1, 1), 0.2), np.full((1, 1, 1), 0.6), first_index=0, last_index=2)
        d0, df = deviations(u, refs)
        self.assertEqual((d0.item(), df.item()), (0.2, 0.6))

    def test_invalid_sets(self):
        first = np.zeros((1, 2, 2))
        with self.assertRaises(ValueError):
            ReferenceSet(first)
        with self.assertRaises(ValueError):
            ReferenceSet(first, first, first_index=3, last_index=1)
        with self.assertRaises(ValueError):
            ReferenceSet(first, first, mode="prediction")
        with self.assertRaises(ValueError):
            ReferenceSet(first, mode="extrapolation")


class TestModulate(unittest.TestCase):

    # References equal to the estimate at the anchors leave every frame alone
    def test_interp_identity(self):
        u = np.random.default_rng(2).standard_normal((12, 1, 3, 3))
        sets = build_reference_sets("vfi11", u, 12)
        np.testing.assert_allclose(modulate(u, sets, 0.8), u, atol=1e-12)

    def test_prediction_anchor(self):
        rng = np.random.default_rng(3)
        u, first = rng.standard_normal((5, 1, 2, 2)), rng.standard_normal((1, 2, 2))
        out = modulate(u, [ReferenceSet(first, mode="prediction")], 1.0)
        np.testing.assert_allclose(out[0], first, atol=1e-12)
        np.testing.assert_allclose(out[3] - u[3], first - u[0], atol=1e-12)

    def test_frames_outside_spans_pass_through(self):
        u = np.random.default_rng(4).standard_normal((12, 1, 2, 2))
        refs = u + 1.0
        out = modulate(u, build_reference_sets("vfi4", refs, 12), 1.0)
        np.testing.assert_array_equal(out[9:], u[9:])
        np.testing.assert_allclose(out[:9], u[:9] + 1.0, atol=1e-12)


class TestWeight(unittest.TestCase):

    def test_nonlinear(self):
        schedule = WeightSchedule()
        self.assertAlmostEqual(weight(schedule, np.log(2.0), 3, 10), 0.5, places=12)
        self.assertGreater(weight(schedule, 80.0, 0, 10), 0.999)

    def test_linear_modes(self):
        self.assertEqual(weight(WeightSchedule("linear-descending"), 1.0, 0, 11), 1.0)
        self.assertEqual(weight(WeightSchedule("linear-descending"), 1.0, 10, 11), 0.0)
        self.assertEqual(weight(WeightSchedule("linear-ascending"), 1.0, 5, 11), 0.5)

    def test_constant(self):
        self.assertEqual(weight(WeightSchedule("constant"), 3.0, 2, 5), 0.5)

    def test_final_alpha(self):
        schedule = WeightSchedule(final_alpha=1.0)
        self.assertEqual(weight(schedule, 0.002, 9, 10), 1.0)
        self.assertLess(weight(schedule, 0.002, 8, 10), 0.01)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            WeightSchedule("cosine")
        with self.assertRaises(ValueError):
            WeightSchedule(final_alpha=1.5)
        with self.assertRaises(ValueError):
            weight(WeightSchedule(), 1.0, 10, 10)


class TestZeroShotHook(unittest.TestCase):

    def test_hook_uses_step_weight(self):
        u = np.zeros((3, 1, 1, 1))
        refs = ReferenceSet(np.full((1, 1, 1), 0.2), np.full((1, 1, 1), 0.6), first_index=0, last_index=2)
        hook = ZeroShotHook([refs], WeightSchedule("constant"))
        context = StepContext(0, 1.0, 0.5, make_schedule(steps=4))
        np.testing.assert_allclose(hook(u, context).ravel(), [0.2, 0.2, 0.2])

    # With alpha forced to 1 on the last step, prediction returns the given first frame
    def test_prediction_reproduces_first_frame(self):
        first = np.random.default_rng(5).random((1, 4, 4))
        hook = ZeroShotHook([ReferenceSet(first, mode="prediction")], WeightSchedule(final_alpha=1.0))
        config = SamplerConfig(make_schedule(steps=12), seed=0)
        result = sample(GaussianPosteriorDenoiser(0.5, 0.2), None, config, refs=hook, shape=(6, 1, 4, 4))
        np.testing.assert_allclose(result.data[0], first, atol=1e-12)


if __name__ == '__main__':
    unittest.main()
