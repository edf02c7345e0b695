# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Delay candidate grid and the baseline generalized cross-correlation."""

from dataclasses import dataclass
import math
import numpy as np
import scipy.fft
from ._frontend import _is_power_of_two

DEFAULT_INTERPOLATION = 2
DEFAULT_DELTA = 0.5
DEFAULT_DISTANCE = 0.15
MIN_SPEED_OF_SOUND = 335.0
DEFAULT_SPEED_OF_SOUND = 343.0

NONPOSITIVE_GEOMETRY_MSG = "distance, sample rate and speed of sound must be positive"
DELTA_MSG = "delta must divide one sample"
TAU_MAX_MSG = "tau_max_int must be a positive integer"
INTERPOLATION_MSG = "r must be 1, 2 or 4"
GRID_SPACING_MSG = "grid spacing must equal 1/r"
SPECTRUM_LENGTH_MSG = "spectrum length must be N/2+1 for a power-of-two N"
LAG_NOT_INTEGRAL_MSG = "r*tau must be an integer"
LAG_TOO_LARGE_MSG = "|tau| must not exceed N/2"
GRID_TOO_WIDE_MSG = "delay grid does not fit in the frame"


@dataclass(frozen=True)
class DelayGrid:
    """Symmetric TDoA candidates -tau_max_int, ..., +tau_max_int with spacing `delta`.

    `fs` records the sample rate the grid was designed for (0 if unknown).
    """

    tau_max_int: int
    delta: float = DEFAULT_DELTA
    fs: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.tau_max_int, (int, np.integer)) or self.tau_max_int < 1:
            raise ValueError(TAU_MAX_MSG)
        _validate_delta(self.delta)

    @property
    def steps_per_sample(self) -> int:
        return int(round(1.0 / self.delta))

    @property
    def size(self) -> int:
        """The number of candidates I."""
        return 2 * self.tau_max_int * self.steps_per_sample + 1

    @property
    def taus(self) -> np.ndarray:
        half = self.tau_max_int * self.steps_per_sample
        return np.arange(-half, half + 1) / self.steps_per_sample


def _validate_delta(delta: float) -> None:
    if not delta > 0 or delta > 1:
        raise ValueError(DELTA_MSG)
    steps = 1.0 / delta
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError(DELTA_MSG)


def make_grid(distance: float, fs: float, c_min: float = MIN_SPEED_OF_SOUND,
        delta: float = DEFAULT_DELTA) -> DelayGrid:
    """Build the candidate grid covering the largest physical delay.

    tau_max_int = ceil(distance * fs / c_min). The default half-sample
    spacing gives I = 4 tau_max_int + 1 candidates.
    """
    if not (distance > 0 and fs > 0 and c_min > 0):
        raise ValueError(NONPOSITIVE_GEOMETRY_MSG)
    _validate_delta(delta)

    # Rounding first keeps exact integers (e.g. 8.000000000001) from jumping up
    tau_max = round(distance * fs / c_min, 9)
    return DelayGrid(int(math.ceil(tau_max)), delta, float(fs))


def lag_to_index(tau: float, r: int, n: int) -> int:
    """Index of delay `tau` in the output of an inverse FFT of size rN."""
    lag = r * tau
    if abs(lag - round(lag)) > 1e-9:
        raise ValueError(LAG_NOT_INTEGRAL_MSG)
    if abs(tau) > n / 2:
        raise ValueError(LAG_TOO_LARGE_MSG)
    return int(round(lag)) % (r * n)


def _frame_size_from_bins(bins: int) -> int:
    n = 2 * (bins - 1)
    if n < 2 or not _is_power_of_two(n):
        raise ValueError(SPECTRUM_LENGTH_MSG)
    return n


class GccCorrelator:
    """GCC workspace for a fixed grid, frame size and interpolation factor.

    Calling the object with a PHAT vector (or a stack of them along the
    first axes) returns y(τ) for every grid candidate. The values equal
    2Re{Σ_f x[f] exp(j2πfτ/N)} exactly; the inverse FFT is left unscaled.
    """

    def __init__(self, grid: DelayGrid, n: int, r: int = DEFAULT_INTERPOLATION) -> None:
        if r not in (1, 2, 4):
            raise ValueError(INTERPOLATION_MSG)
        if abs(grid.delta * r - 1.0) > 1e-12:
            raise ValueError(GRID_SPACING_MSG)
        _frame_size_from_bins(n // 2 + 1)
        if grid.tau_max_int > n // 2:
            raise ValueError(GRID_TOO_WIDE_MSG)

        self.grid = grid
        self.n = n
        self.r = r
        self._indices = np.array([lag_to_index(tau, r, n) for tau in grid.taus])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        bins = self.n // 2 + 1
        if x.shape[-1] != bins:
            raise ValueError(SPECTRUM_LENGTH_MSG)

        # Zero-pad to rN/2+1 bins. The sum above counts every bin twice but
        # the real inverse transform counts DC (and Nyquist when r = 1) once.
        padded = np.zeros(x.shape[:-1] + (self.r * self.n // 2 + 1,), dtype=np.complex128)
        padded[..., :bins] = x
        padded[..., 0] = 2 * x[..., 0].real
        if self.r == 1:
            padded[..., -1] = 2 * x[..., -1].real

        full = scipy.fft.irfft(padded, n=self.r * self.n, axis=-1, norm="forward")
        return full[..., self._indices]


def gcc_correlate(x: np.ndarray, grid: DelayGrid, r: int = DEFAULT_INTERPOLATION) -> np.ndarray:
    """Cross-correlation of one PHAT vector on the candidate grid via an rN-point IFFT."""
    x = np.asarray(x)
    n = _frame_size_from_bins(x.shape[-1])
    return GccCorrelator(grid, n, r)(x)
