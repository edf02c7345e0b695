# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Peak picking, quadratic refinement and the delay-to-angle mapping."""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union
import numpy as np
from ._gcc import DelayGrid

DENOMINATOR_GUARD = 1e-12

EMPTY_CORRELATION_MSG = "correlation vector must not be empty"
GRID_MISMATCH_MSG = "correlation vector length must match the grid"
INDEX_RANGE_MSG = "index is outside the correlation vector"
GEOMETRY_MSG = "distance, speed of sound and sample rate must be positive"
MAE_LENGTH_MSG = "angle lists must have the same nonzero length"

FloatOrArray = Union[float, np.ndarray]


@dataclass(frozen=True)
class TdoaEstimate:
    """One frame's result.

    `boundary` is set when the argmax lies on the grid edge and
    `degenerate` when the three samples around it are flat; in both
    cases tau_hat equals tau_star.
    """

    tau_star: float
    tau_hat: float
    theta_hat: float
    peak: float
    boundary: bool
    degenerate: bool = False


@dataclass(frozen=True)
class TdoaTrack:
    """Per-frame estimates of one microphone pair, as arrays over frames."""

    t: np.ndarray
    tau_star: np.ndarray
    tau_hat: np.ndarray
    theta_hat: np.ndarray
    peak: np.ndarray
    boundary: np.ndarray
    degenerate: np.ndarray

    def __len__(self) -> int:
        return int(self.t.size)

    def __getitem__(self, frame: int) -> TdoaEstimate:
        return TdoaEstimate(float(self.tau_star[frame]), float(self.tau_hat[frame]),
            float(self.theta_hat[frame]), float(self.peak[frame]),
            bool(self.boundary[frame]), bool(self.degenerate[frame]))

    def after(self, convergence: int) -> "TdoaTrack":
        """The frames with index t > convergence."""
        keep = self.t > convergence
        return TdoaTrack(self.t[keep], self.tau_star[keep], self.tau_hat[keep],
            self.theta_hat[keep], self.peak[keep], self.boundary[keep], self.degenerate[keep])


def _check_correlation(y: np.ndarray, grid: DelayGrid) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0 or y.shape[-1] == 0:
        raise ValueError(EMPTY_CORRELATION_MSG)
    if y.shape[-1] != grid.size:
        raise ValueError(GRID_MISMATCH_MSG)
    return y


def argmax_delay(y: np.ndarray, grid: DelayGrid) -> Tuple[float, int, float]:
    """Return (tau_star, index, peak). Ties go to the lowest index."""
    y = _check_correlation(y, grid)
    index = int(np.argmax(y))
    return float(grid.taus[index]), index, float(y[index])


def _refine(y: np.ndarray, index: np.ndarray,
        grid: DelayGrid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized refinement over rows of y. Returns (tau_hat, boundary, degenerate)."""
    rows = np.arange(y.shape[0])
    tau_star = grid.taus[index]
    boundary = (index == 0) | (index == y.shape[1] - 1)

    # A grid always has at least three candidates
    inner = np.clip(index, 1, y.shape[1] - 2)
    y_minus = y[rows, inner - 1]
    y_zero = y[rows, inner]
    y_plus = y[rows, inner + 1]
    denominator = y_minus - 2 * y_zero + y_plus
    degenerate = ~boundary & (np.abs(denominator) < DENOMINATOR_GUARD)

    usable = ~boundary & ~degenerate
    offset = np.zeros(y.shape[0])
    offset[usable] = (grid.delta / 2) * (y_minus[usable] - y_plus[usable]) / denominator[usable]
    return tau_star + offset, boundary, degenerate


def refine_quadratic(y: np.ndarray, index: int, grid: DelayGrid) -> Tuple[float, bool]:
    """Three-point parabolic refinement of the peak at `index`.

    Returns (tau_hat, flagged). The flag is set, and tau_hat equals the
    grid delay, when the peak is on the grid edge or the samples are flat.
    """
    y = _check_correlation(y, grid)
    if not 0 <= index < y.size:
        raise ValueError(INDEX_RANGE_MSG)

    tau_hat, boundary, degenerate = _refine(y[None, :], np.array([index]), grid)
    return float(tau_hat[0]), bool(boundary[0] or degenerate[0])


def delay_to_angle(tau: FloatOrArray, distance: float, c: float, fs: float) -> FloatOrArray:
    """θ = arccos(τc / (d fs)), with the argument clamped to [-1, 1]."""
    if not (distance > 0 and c > 0 and fs > 0):
        raise ValueError(GEOMETRY_MSG)
    theta = np.arccos(np.clip(np.asarray(tau) * c / (distance * fs), -1.0, 1.0))
    if np.ndim(theta) == 0:
        return float(theta)
    return theta


def mae(theta_true: Union[Sequence[float], np.ndarray],
        theta_est: Union[Sequence[float], np.ndarray]) -> float:
    """Mean absolute angle error in degrees."""
    true_arr = np.asarray(theta_true, dtype=np.float64)
    est_arr = np.asarray(theta_est, dtype=np.float64)
    if true_arr.shape != est_arr.shape or true_arr.size == 0:
        raise ValueError(MAE_LENGTH_MSG)
    return float(np.degrees(np.mean(np.abs(true_arr - est_arr))))


def estimate_peak(y: np.ndarray, grid: DelayGrid, distance: float, c: float,
        fs: float) -> TdoaEstimate:
    """Argmax, refinement and angle for one correlation vector."""
    tau_star, index, peak = argmax_delay(y, grid)
    tau_hat, boundary, degenerate = _refine(np.asarray(y, dtype=np.float64)[None, :],
        np.array([index]), grid)
    theta = float(delay_to_angle(float(tau_hat[0]), distance, c, fs))
    return TdoaEstimate(tau_star, float(tau_hat[0]), theta, peak,
        bool(boundary[0]), bool(degenerate[0]))


def track_peaks(y: np.ndarray, grid: DelayGrid, distance: float, c: float,
        fs: float, first_frame: int = 1) -> TdoaTrack:
    """Estimates for a (T, I) stack of correlation vectors."""
    y = _check_correlation(np.atleast_2d(y), grid)
    index = np.argmax(y, axis=1)
    peak = y[np.arange(y.shape[0]), index]
    tau_hat, boundary, degenerate = _refine(y, index, grid)
    theta = np.asarray(delay_to_angle(tau_hat, distance, c, fs))

    t = np.arange(first_frame, first_frame + y.shape[0])
    return TdoaTrack(t, grid.taus[index], tau_hat, theta, peak, boundary, degenerate)
