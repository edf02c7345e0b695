# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Tests for the delay grid and the IFFT-based cross-correlation."""

import numpy as np
import unittest
from fastcc import DelayGrid, GccCorrelator, gcc_correlate, lag_to_index, make_grid

NONPOSITIVE_GEOMETRY_MSG = "distance, sample rate and speed of sound must be positive"
DELTA_MSG = "delta must divide one sample"
TAU_MAX_MSG = "tau_max_int must be a positive integer"
INTERPOLATION_MSG = "r must be 1, 2 or 4"
GRID_SPACING_MSG = "grid spacing must equal 1/r"
SPECTRUM_LENGTH_MSG = "spectrum length must be N/2+1 for a power-of-two N"
LAG_NOT_INTEGRAL_MSG = "r*tau must be an integer"
LAG_TOO_LARGE_MSG = "|tau| must not exceed N/2"
GRID_TOO_WIDE_MSG = "delay grid does not fit in the frame"


def direct_correlation(x: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """2Re{Σ_f x[f] exp(j2πfτ/N)} for every τ."""
    n = 2 * (x.size - 1)
    f = np.arange(x.size)
    return 2 * np.real(np.exp(2j * np.pi * np.outer(taus, f) / n) @ x)


def random_phat(rng: np.random.Generator, bins: int) -> np.ndarray:
    return np.exp(1j * rng.uniform(-np.pi, np.pi, size=bins))


class TestMakeGrid(unittest.TestCase):

    def test_minimum_speed_of_sound(self) -> None:
        grid = make_grid(0.15, 16000, 335)
        self.assertEqual(grid.tau_max_int, 8)
        self.assertEqual(grid.size, 33)
        self.assertEqual(grid.fs, 16000)

    def test_nominal_speed_of_sound(self) -> None:
        grid = make_grid(0.15, 16000, 343)
        self.assertEqual(grid.tau_max_int, 7)
        self.assertEqual(grid.size, 29)

    def test_integer_spacing(self) -> None:
        grid = make_grid(0.15, 16000, 335, delta=1.0)
        self.assertEqual(grid.size, 17)
        self.assertEqual(grid.taus.tolist(), list(range(-8, 9)))

    def test_quarter_sample_spacing(self) -> None:
        grid = make_grid(0.15, 16000, 335, delta=0.25)
        self.assertEqual(grid.size, 65)

    def test_candidates_are_symmetric(self) -> None:
        taus = make_grid(0.15, 16000).taus
        self.assertEqual(taus[0], -8)
        self.assertEqual(taus[-1], 8)
        self.assertTrue(np.array_equal(taus, -taus[::-1]))
        self.assertTrue(np.allclose(np.diff(taus), 0.5))

    def test_nonpositive_inputs(self) -> None:
        for args in [(0.0, 16000, 335), (0.15, -1, 335), (0.15, 16000, 0)]:
            with self.subTest(args=args):
                with self.assertRaises(ValueError) as cm:
                    make_grid(*args)
                self.assertEqual(str(cm.exception), NONPOSITIVE_GEOMETRY_MSG)

    def test_invalid_delta(self) -> None:
        for delta in [0.0, 0.3, 1.5]:
            with self.subTest(delta=delta):
                with self.assertRaises(ValueError) as cm:
                    make_grid(0.15, 16000, delta=delta)
                self.assertEqual(str(cm.exception), DELTA_MSG)

    def test_invalid_tau_max(self) -> None:
        with self.assertRaises(ValueError) as cm:
            DelayGrid(0)
        self.assertEqual(str(cm.exception), TAU_MAX_MSG)


class TestLagToIndex(unittest.TestCase):

    def test_examples(self) -> None:
        self.assertEqual(lag_to_index(0, 2, 512), 0)
        self.assertEqual(lag_to_index(-1, 2, 512), 1022)
        self.assertEqual(lag_to_index(8, 2, 512), 16)
        self.assertEqual(lag_to_index(-0.5, 2, 512), 1023)

    def test_non_integral_lag(self) -> None:
        with self.assertRaises(ValueError) as cm:
            lag_to_index(0.25, 2, 512)
        self.assertEqual(str(cm.exception), LAG_NOT_INTEGRAL_MSG)

    def test_too_large_lag(self) -> None:
        with self.assertRaises(ValueError) as cm:
            lag_to_index(9, 1, 16)
        self.assertEqual(str(cm.exception), LAG_TOO_LARGE_MSG)


class TestGccCorrelate(unittest.TestCase):

    def test_zero_phase_peaks_at_zero(self) -> None:
        grid = make_grid(0.15, 16000)
        y = gcc_correlate(np.ones(257, dtype=complex), grid)
        self.assertEqual(grid.taus[np.argmax(y)], 0.0)

    def test_pure_delay(self) -> None:
        n = 512
        f = np.arange(n // 2 + 1)
        x = np.exp(-2j * np.pi * f * 3 / n)
        for r in [1, 2]:
            with self.subTest(r=r):
                grid = make_grid(0.15, 16000, delta=1.0 / r)
                y = gcc_correlate(x, grid, r)
                self.assertEqual(grid.taus[np.argmax(y)], 3.0)

    def test_matches_direct_sum(self) -> None:
        rng = np.random.default_rng(0)
        grid = make_grid(0.15, 16000)
        correlator = GccCorrelator(grid, 64, 2)
        for _ in range(100):
            x = random_phat(rng, 33)
            expected = direct_correlation(x, grid.taus)
            actual = correlator(x)
            self.assertLess(np.max(np.abs(actual - expected)), 1e-9 * np.max(np.abs(expected)))

    def test_matches_direct_sum_for_every_factor(self) -> None:
        rng = np.random.default_rng(1)
        x = random_phat(rng, 33)
        for r in [1, 2, 4]:
            with self.subTest(r=r):
                grid = make_grid(0.15, 16000, delta=1.0 / r)
                actual = gcc_correlate(x, grid, r)
                self.assertTrue(np.allclose(actual, direct_correlation(x, grid.taus), atol=1e-9))

    def test_swapping_channels_mirrors_correlation(self) -> None:
        rng = np.random.default_rng(2)
        grid = make_grid(0.15, 16000)
        x = random_phat(rng, 257)
        y = gcc_correlate(x, grid)
        y_swap = gcc_correlate(np.conj(x), grid)
        self.assertTrue(np.allclose(y_swap, y[::-1], atol=1e-9))

    def test_stack_of_frames(self) -> None:
        rng = np.random.default_rng(3)
        grid = make_grid(0.15, 16000)
        stack = random_phat(rng, 5 * 257).reshape(5, 257)
        correlator = GccCorrelator(grid, 512)
        batch = correlator(stack)
        self.assertEqual(batch.shape, (5, 33))
        for row in range(5):
            self.assertTrue(np.allclose(batch[row], correlator(stack[row])))

    def test_invalid_factor(self) -> None:
        grid = make_grid(0.15, 16000, delta=1.0 / 3)
        with self.assertRaises(ValueError) as cm:
            GccCorrelator(grid, 512, 3)
        self.assertEqual(str(cm.exception), INTERPOLATION_MSG)

    def test_spacing_must_match_factor(self) -> None:
        grid = make_grid(0.15, 16000, delta=0.5)
        with self.assertRaises(ValueError) as cm:
            GccCorrelator(grid, 512, 4)
        self.assertEqual(str(cm.exception), GRID_SPACING_MSG)

    def test_grid_wider_than_frame(self) -> None:
        with self.assertRaises(ValueError) as cm:
            GccCorrelator(DelayGrid(8), 8, 2)
        self.assertEqual(str(cm.exception), GRID_TOO_WIDE_MSG)

    def test_wrong_spectrum_length(self) -> None:
        grid = make_grid(0.15, 16000)
        with self.assertRaises(ValueError) as cm:
            GccCorrelator(grid, 512)(np.ones(100, dtype=complex))
        self.assertEqual(str(cm.exception), SPECTRUM_LENGTH_MSG)
        with self.assertRaises(ValueError) as cm:
            gcc_correlate(np.ones(100, dtype=complex), grid)
        self.assertEqual(str(cm.exception), SPECTRUM_LENGTH_MSG)
