import unittest

import numpy as np

from evdiff.diffusion.denoisers import (
    ConditionalDenoiser,
    ConstantDenoiser,
    GaussianPosteriorDenoiser,
    Latent,
    ZeroDenoiser,
    design_matrix,
    event_features,
    forward_noise,
    from_pixels,
    n_features,
    posterior_mean_gaussian,
    to_pixels,
)
from evdiff.errors import ShapeMismatchError
from evdiff.events.stacking import EventVolume


class TestForwardNoise(unittest.TestCase):

    def test_zero_sigma(self):
        x0 = np.random.default_rng(0).random((2, 1, 3, 3))
        np.testing.assert_array_equal(forward_noise(x0, 0.0, seed=1), x0)

    def test_empirical_std(self):
        x0 = np.zeros((10, 1, 100, 100))
        noisy = forward_noise(x0, 0.7, seed=5)
        self.assertLess(abs(np.std(noisy - x0) - 0.7) / 0.7, 0.01)

    def test_seeded(self):
        x0 = np.ones((1, 1, 4, 4))
        np.testing.assert_array_equal(forward_noise(x0, 2.0, seed=9), forward_noise(x0, 2.0, seed=9))

    def test_keeps_latent_type(self):
        latent = Latent(np.zeros((2, 1, 2, 2)), sigma_index=3)
        noisy = forward_noise(latent, 1.0, seed=0)
        self.assertIsInstance(noisy, Latent)
        self.assertEqual(noisy.sigma_index, 3)

    def test_negative_sigma(self):
        with self.assertRaises(ValueError):
            forward_noise(np.zeros(3), -1.0)


class TestPosteriorMean(unittest.TestCase):

    def test_no_noise(self):
        x = np.array([0.1, 0.9])
        np.testing.assert_allclose(posterior_mean_gaussian(x, 0.0, 0.5, 0.2), x, rtol=1e-15)

    def test_infinite_noise(self):
        np.testing.assert_array_equal(posterior_mean_gaussian(np.array([3.0, -2.0]), np.inf, 0.7, 0.2), [0.7, 0.7])

    def test_hand_value(self):
        self.assertAlmostEqual(float(posterior_mean_gaussian(2.0, 1.0, 0.0, 1.0)), 1.0)

    # Near-deterministic data: the posterior mean snaps back to x0
    def test_recovers_deterministic_data(self):
        x0 = np.full((1, 1, 2, 2), 0.4)
        noisy = forward_noise(x0, 3.0, seed=2)
        np.testing.assert_allclose(posterior_mean_gaussian(noisy, 3.0, 0.4, 1e-9), x0, atol=1e-12)

    def test_invalid_prior(self):
        with self.assertRaises(ValueError):
            posterior_mean_gaussian(1.0, 1.0, 0.0, 0.0)

    def test_denoiser_wrapper(self):
        denoiser = GaussianPosteriorDenoiser(mu=0.0, s0=1.0)
        np.testing.assert_allclose(denoiser(np.full((1, 1, 1, 1), 2.0), 1.0), [[[[1.0]]]])


class TestSimpleDenoisers(unittest.TestCase):

    def test_zero(self):
        out = ZeroDenoiser()(np.ones((2, 1, 3, 3)), 1.0)
        self.assertEqual(out.shape, (2, 1, 3, 3))
        self.assertFalse(np.any(out))

    def test_constant(self):
        out = ConstantDenoiser(0.3)(np.zeros((2, 1, 2, 2)), 5.0)
        self.assertTrue(np.all(out == 0.3))

    def test_accepts_latent(self):
        out = ZeroDenoiser()(Latent(np.ones((1, 1, 2, 2))), 1.0)
        self.assertEqual(out.shape, (1, 1, 2, 2))


class TestConditionalDenoiser(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(0)
        self.x = rng.standard_normal((3, 2, 4, 5))
        data = np.zeros((3, 3, 4, 5))
        data[:, 1] = rng.integers(0, 3, size=(3, 4, 5))
        data[:, 2] = -rng.integers(0, 3, size=(3, 4, 5))
        data[:, 0] = data[:, 1] + data[:, 2]
        self.volume = EventVolume(data)

    def test_event_features(self):
        features = event_features(self.volume, self.x.shape)
        self.assertEqual(features.shape, (3, 4, 4, 5))
        np.testing.assert_array_equal(features[:, 3], np.cumsum(self.volume.data[:, 0], axis=0))

    def test_missing_condition_is_zero(self):
        self.assertFalse(np.any(event_features(None, self.x.shape)))

    def test_condition_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            event_features(self.volume, (4, 2, 4, 5))

    def test_design_matrix_layout(self):
        rows = design_matrix(self.x, 0.5, self.volume, sigma_data=0.5)
        self.assertEqual(rows.shape, (3 * 4 * 5, n_features(2)))
        # c_skip(sigma_data) == 0.5; row of frame 1, pixel (2, 3)
        row = rows[1 * 20 + 2 * 5 + 3]
        np.testing.assert_allclose(row[:2], 0.5 * self.x[1, :, 2, 3])
        np.testing.assert_allclose(row[2:5], self.volume.data[1, :, 2, 3])
        np.testing.assert_allclose(row[-3:], [0.5, np.log(0.5) / 4.0, 1.0])

    def test_pixel_layout_inverts(self):
        np.testing.assert_array_equal(from_pixels(to_pixels(self.x), self.x.shape), self.x)

    def test_affine_denoise_shape(self):
        model = ConditionalDenoiser(channels=2).init_params(seed=0)
        out = model(self.x, 1.0, self.volume)
        self.assertEqual(out.shape, self.x.shape)

    def test_mlp_denoise_shape(self):
        model = ConditionalDenoiser(channels=2, kind="mlp", hidden=6).init_params(seed=0)
        self.assertEqual(set(model.params), {"w1", "w2", "b2"})
        self.assertEqual(model(self.x, 1.0, None).shape, self.x.shape)

    def test_untrained_denoiser(self):
        with self.assertRaises(RuntimeError):
            ConditionalDenoiser(channels=2)(self.x, 1.0)

    def test_channel_mismatch(self):
        model = ConditionalDenoiser(channels=1).init_params(seed=0)
        with self.assertRaises(ShapeMismatchError):
            model(self.x, 1.0)

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            ConditionalDenoiser(kind="unet")

    def test_deterministic(self):
        model = ConditionalDenoiser(channels=2, kind="mlp").init_params(seed=4)
        np.testing.assert_array_equal(model(self.x, 2.0, self.volume), model(self.x, 2.0, self.volume))


if __name__ == '__main__':
    unittest.main()
