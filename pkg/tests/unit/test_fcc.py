# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Tests for the steering matrix decomposition and the folded correlation."""

import numpy as np
import unittest
from fastcc import DelayGrid, FccBases, FccCorrelator, FoldedInput, RankError,\
    attainable_rank, build_w, decompose, dense_correlate, fcc_correlate, fold_input,\
    gcc_correlate, make_grid, parity_residual, relative_residual, unfold_projection

FRAME_SIZE_MSG = "frame size must be a power of two and at least 4"
RANK_POSITIVE_MSG = "K must be at least one"
FOLD_LENGTH_MSG = "input length must be N/2+1 for a power-of-two N of at least 4"
DIMENSION_MSG = "folded input does not match the bases"
SPECTRUM_LENGTH_MSG = "PHAT vector length does not match the bases"
PARITY_FLAG_MSG = "parity flags must be 0 (even) or 1 (odd)"
ODD_MIDDLE_MSG = "odd bases must have a zero middle coefficient"
SINGULAR_ORDER_MSG = "singular values must be non-negative and descending"
SHAPE_MSG = "basis arrays have inconsistent shapes"


def random_phat(rng: np.random.Generator, bins: int) -> np.ndarray:
    return np.exp(1j * rng.uniform(-np.pi, np.pi, size=bins))


def unfolded_dictionary(bases: FccBases) -> np.ndarray:
    return bases.dictionary * np.where(bases.parity == 1, -1j, 1.0)[None, :]


class TestBuildW(unittest.TestCase):

    def test_zero_delay_row_and_dc_column(self) -> None:
        steering = build_w(make_grid(0.15, 16000), 64)
        self.assertEqual(steering.w.shape, (33, 33))
        self.assertTrue(np.allclose(steering.w[16], 1.0))
        self.assertTrue(np.allclose(steering.w[:, 0], 1.0))

    def test_quarter_frame_delay(self) -> None:
        steering = build_w(DelayGrid(8), 32)
        row = int(np.flatnonzero(steering.grid.taus == 8)[0])
        self.assertAlmostEqual(steering.w[row, 1], 1j, delta=1e-15)

    def test_negative_delay_is_conjugate(self) -> None:
        w = build_w(make_grid(0.15, 16000), 512).w
        self.assertTrue(np.allclose(w[::-1], np.conj(w), atol=1e-12))
        self.assertTrue(np.allclose(np.abs(w), 1.0))


class TestDecompose(unittest.TestCase):

    def setUp(self) -> None:
        self.steering = build_w(make_grid(0.15, 16000), 512)
        self.bases = decompose(self.steering, 8)

    def test_shapes(self) -> None:
        self.assertEqual(self.bases.k, 8)
        self.assertEqual(self.bases.coeffs.shape, (8, 129))
        self.assertEqual(self.bases.dictionary.shape, (33, 8))
        self.assertEqual(self.bases.parity.shape, (8,))

    def test_parity_alternates(self) -> None:
        self.assertEqual(self.bases.parity.tolist(), [0, 1, 0, 1, 0, 1, 0, 1])

    def test_parity_is_exact(self) -> None:
        self.assertLessEqual(parity_residual(self.bases), 1e-10)

        p = unfold_projection(self.bases)
        for k in range(8):
            with self.subTest(k=k):
                if self.bases.parity[k] == 0:
                    self.assertTrue(np.array_equal(p[k], p[k, ::-1]))
                    self.assertTrue(np.all(p[k].imag == 0))
                else:
                    self.assertTrue(np.array_equal(p[k], -p[k, ::-1]))
                    self.assertTrue(np.all(p[k].real == 0))
                    self.assertEqual(p[k, 128], 0)
                    self.assertEqual(self.bases.coeffs[k, 128], 0)

    def test_singular_values_descend(self) -> None:
        s = self.bases.singulars
        self.assertTrue(np.all(np.diff(s) <= 0))
        self.assertTrue(np.all(s > 0))

    def test_largest_coefficient_is_positive(self) -> None:
        for row in self.bases.coeffs:
            self.assertGreater(row[np.argmax(np.abs(row))], 0)

    def test_residual_decreases_with_rank(self) -> None:
        residuals = [relative_residual(self.steering, decompose(self.steering, k))
            for k in range(1, 9)]
        self.assertTrue(np.all(np.diff(residuals) <= 1e-12))
        self.assertLess(residuals[-1], residuals[0])

    def test_residual_matches_discarded_singular_values(self) -> None:
        # The decomposition is a truncated SVD, so the residual is given
        # by the discarded singular values
        s = np.linalg.svd(self.steering.w, compute_uv=False)
        expected = np.sqrt(np.sum(s[8:]**2) / np.sum(s**2))
        self.assertAlmostEqual(relative_residual(self.steering, self.bases), expected, delta=1e-9)

    def test_full_rank_reconstruction(self) -> None:
        # Integer delays on a short grid give a full-rank W
        steering = build_w(DelayGrid(2, 1.0), 64)
        rank = attainable_rank(steering)
        self.assertEqual(rank, 5)

        bases = decompose(steering, rank)
        approx = unfolded_dictionary(bases) @ unfold_projection(bases)
        self.assertLessEqual(np.max(np.abs(steering.w - approx)), 1e-9)

    def test_deterministic(self) -> None:
        self.assertEqual(decompose(self.steering, 8), self.bases)

    def test_logs_residual(self) -> None:
        with self.assertLogs("fastcc._fcc", level="INFO") as logs:
            decompose(self.steering, 4)
        self.assertIn("relative Frobenius residual", logs.output[0])

    def test_rank_too_large(self) -> None:
        rank = attainable_rank(self.steering)
        self.assertLess(rank, 33)
        with self.assertRaises(RankError) as cm:
            decompose(self.steering, 64)
        self.assertEqual(str(cm.exception), f"K=64 exceeds the attainable rank {rank}")
        self.assertEqual(cm.exception.attainable, rank)
        self.assertEqual(cm.exception.requested, 64)

    def test_rank_must_be_positive(self) -> None:
        with self.assertRaises(ValueError) as cm:
            decompose(self.steering, 0)
        self.assertEqual(str(cm.exception), RANK_POSITIVE_MSG)

    def test_rank_must_be_int(self) -> None:
        with self.assertRaises(TypeError):
            decompose(self.steering, 2.0) # type: ignore

    def test_frame_too_small(self) -> None:
        with self.assertRaises(ValueError) as cm:
            decompose(build_w(DelayGrid(1, 1.0), 2), 1)
        self.assertEqual(str(cm.exception), FRAME_SIZE_MSG)


class TestFccBasesValidation(unittest.TestCase):

    def setUp(self) -> None:
        self.bases = decompose(build_w(make_grid(0.15, 16000), 64), 4)

    def replace(self, **changes: np.ndarray) -> FccBases:
        fields = {
            "coeffs": self.bases.coeffs.copy(),
            "parity": self.bases.parity.copy(),
            "dictionary": self.bases.dictionary.copy(),
            "singulars": self.bases.singulars.copy(),
        }
        fields.update(changes)
        return FccBases(self.bases.n, self.bases.grid, fields["coeffs"], fields["parity"],
            fields["dictionary"], fields["singulars"])

    def test_copy_is_equal(self) -> None:
        self.assertEqual(self.replace(), self.bases)

    def test_empty_bases(self) -> None:
        with self.assertRaises(ValueError) as cm:
            self.replace(coeffs=np.zeros((0, 17)), parity=np.zeros(0, dtype=np.uint8),
                dictionary=np.zeros((33, 0), dtype=complex), singulars=np.zeros(0))
        self.assertEqual(str(cm.exception), RANK_POSITIVE_MSG)

    def test_bad_parity_flag(self) -> None:
        parity = self.bases.parity.copy()
        parity[0] = 2
        with self.assertRaises(ValueError) as cm:
            self.replace(parity=parity)
        self.assertEqual(str(cm.exception), PARITY_FLAG_MSG)

    def test_odd_middle_coefficient(self) -> None:
        coeffs = self.bases.coeffs.copy()
        coeffs[1, -1] = 0.5
        with self.assertRaises(ValueError) as cm:
            self.replace(coeffs=coeffs)
        self.assertEqual(str(cm.exception), ODD_MIDDLE_MSG)

    def test_singular_order(self) -> None:
        with self.assertRaises(ValueError) as cm:
            self.replace(singulars=self.bases.singulars[::-1].copy())
        self.assertEqual(str(cm.exception), SINGULAR_ORDER_MSG)

    def test_shape_mismatch(self) -> None:
        with self.assertRaises(ValueError) as cm:
            self.replace(dictionary=self.bases.dictionary[:-1])
        self.assertEqual(str(cm.exception), SHAPE_MSG)


class TestFoldInput(unittest.TestCase):

    def test_all_ones(self) -> None:
        folded = fold_input(np.ones(9, dtype=complex))
        self.assertEqual(folded.add.tolist(), [2, 2, 2, 2, 1])
        self.assertEqual(folded.sub.tolist(), [0, 0, 0, 0, 1])

    def test_even_input_has_zero_difference(self) -> None:
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0], dtype=complex)
        folded = fold_input(x)
        self.assertEqual(folded.sub.tolist(), [0, 0, 0, 0, 5])

    def test_matches_direct_sums(self) -> None:
        x = random_phat(np.random.default_rng(0), 9)
        folded = fold_input(x)
        for m in range(4):
            self.assertEqual(folded.add[m], x[m] + x[8 - m])
            self.assertEqual(folded.sub[m], x[m] - x[8 - m])
        self.assertEqual(folded.add[4], x[4])
        self.assertEqual(folded.sub[4], x[4])

    def test_invalid_length(self) -> None:
        for bins in [2, 4, 6]:
            with self.subTest(bins=bins):
                with self.assertRaises(ValueError) as cm:
                    fold_input(np.ones(bins, dtype=complex))
                self.assertEqual(str(cm.exception), FOLD_LENGTH_MSG)


class TestFccCorrelate(unittest.TestCase):

    def test_full_rank_matches_dense(self) -> None:
        rng = np.random.default_rng(1)
        for n in [64, 512]:
            with self.subTest(n=n):
                steering = build_w(make_grid(0.15, 16000), n)
                bases = decompose(steering, attainable_rank(steering))
                correlator = FccCorrelator(bases)
                for _ in range(100):
                    x = random_phat(rng, n // 2 + 1)
                    error = np.max(np.abs(correlator(x) - dense_correlate(steering, x)))
                    self.assertLessEqual(error, 1e-9 * 33)

    def test_exact_full_rank_matches_dense(self) -> None:
        rng = np.random.default_rng(2)
        steering = build_w(DelayGrid(2, 1.0), 64)
        bases = decompose(steering, 5)
        for _ in range(100):
            x = random_phat(rng, 33)
            y = fcc_correlate(bases, fold_input(x))
            self.assertLessEqual(np.max(np.abs(y - dense_correlate(steering, x))), 1e-9)

    def test_folded_equals_unfolded_product(self) -> None:
        rng = np.random.default_rng(3)
        steering = build_w(make_grid(0.15, 16000), 512)
        x = random_phat(rng, 257)
        for k in range(1, 9):
            with self.subTest(k=k):
                bases = decompose(steering, k)
                expected = 2 * np.real(unfolded_dictionary(bases) @ (unfold_projection(bases) @ x))
                actual = fcc_correlate(bases, fold_input(x))
                self.assertLessEqual(np.max(np.abs(actual - expected)), 1e-9)

    def test_pure_delay(self) -> None:
        grid = make_grid(0.15, 16000)
        bases = decompose(build_w(grid, 512), 8)
        f = np.arange(257)
        x = np.exp(-2j * np.pi * f * 3 / 512)

        y = fcc_correlate(bases, fold_input(x))
        self.assertEqual(grid.taus[np.argmax(y)], 3.0)
        self.assertEqual(np.argmax(y), np.argmax(gcc_correlate(x, grid)))

    def test_zero_delay(self) -> None:
        grid = make_grid(0.15, 16000)
        bases = decompose(build_w(grid, 512), 8)
        y = FccCorrelator(bases)(np.ones(257, dtype=complex))
        self.assertEqual(grid.taus[np.argmax(y)], 0.0)

    def test_full_rank_argmax_matches_gcc(self) -> None:
        rng = np.random.default_rng(4)
        grid = make_grid(0.15, 16000)
        steering = build_w(grid, 512)
        correlator = FccCorrelator(decompose(steering, attainable_rank(steering)))
        for _ in range(50):
            # A delayed phase ramp with some phase noise
            tau = rng.uniform(-7.5, 7.5)
            x = np.exp(-2j * np.pi * np.arange(257) * tau / 512 + 0.5j * rng.normal(size=257))
            self.assertEqual(np.argmax(correlator(x)), np.argmax(gcc_correlate(x, grid)))

    def test_stack_of_frames(self) -> None:
        rng = np.random.default_rng(5)
        correlator = FccCorrelator(decompose(build_w(make_grid(0.15, 16000), 512), 8))
        stack = random_phat(rng, 4 * 257).reshape(4, 257)
        batch = correlator(stack)
        self.assertEqual(batch.shape, (4, 33))
        for row in range(4):
            self.assertTrue(np.allclose(batch[row], correlator(stack[row]), atol=1e-12))

    def test_direct_call_matches_folded_path(self) -> None:
        rng = np.random.default_rng(6)
        steering = build_w(make_grid(0.15, 16000), 512)
        stack = random_phat(rng, 3 * 257).reshape(3, 257)
        for k in [1, 2, 5, 8]:
            with self.subTest(k=k):
                bases = decompose(steering, k)
                correlator = FccCorrelator(bases)
                for x in [stack[0], stack[:, ::-1][1], stack]:
                    expected = correlator.correlate_folded(fold_input(x))
                    self.assertLessEqual(np.max(np.abs(correlator(x) - expected)), 1e-10)

    def test_small_frame_middle_bin(self) -> None:
        steering = build_w(DelayGrid(1, 1.0), 4)
        correlator = FccCorrelator(decompose(steering, attainable_rank(steering)))
        x = np.array([1.0, 0.5 - 0.25j, -0.75])
        self.assertLessEqual(np.max(np.abs(correlator(x) - dense_correlate(steering, x))), 1e-12)

    def test_wrong_spectrum_length(self) -> None:
        correlator = FccCorrelator(decompose(build_w(make_grid(0.15, 16000), 512), 8))
        for length in [129, 256, 258]:
            with self.subTest(length=length):
                with self.assertRaises(ValueError) as cm:
                    correlator(np.ones(length, dtype=complex))
                self.assertEqual(str(cm.exception), SPECTRUM_LENGTH_MSG)

    def test_dimension_mismatch(self) -> None:
        bases = decompose(build_w(make_grid(0.15, 16000), 512), 8)
        folded = fold_input(np.ones(33, dtype=complex))
        with self.assertRaises(ValueError) as cm:
            fcc_correlate(bases, folded)
        self.assertEqual(str(cm.exception), DIMENSION_MSG)
        with self.assertRaises(ValueError) as cm:
            fcc_correlate(bases, FoldedInput(np.ones(129), np.ones(17)))
        self.assertEqual(str(cm.exception), DIMENSION_MSG)
