# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Short-time Fourier transform and the real-input FFT primitives.

Do not import this module directly.
Use the names exported from the main fastcc module instead.
"""

from dataclasses import dataclass
from typing import List
import numpy as np
import scipy.fft
from scipy.signal.windows import hann

DEFAULT_FRAME_SIZE = 512
DEFAULT_SAMPLE_RATE = 16000.0

FRAME_SIZE_MSG = "frame size must be a power of two and at least 2"
SAMPLE_RATE_MSG = "sample rate must be positive"
FFT_LENGTH_MSG = "input length must be a power of two and at least 2"
IFFT_LENGTH_MSG = "spectrum length must be L/2+1 for a power-of-two L"
NOT_FINITE_MSG = "samples must be finite"
NOT_1D_MSG = "samples must be one-dimensional"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _validate_frame_size(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError("frame size must be int")
    if n < 2 or not _is_power_of_two(int(n)):
        raise ValueError(FRAME_SIZE_MSG)


@dataclass(frozen=True)
class FrameConfig:
    """STFT framing: frame size `n` (power of two), sample rate `fs`.

    The hop is always half a frame (50% overlap).
    """

    n: int = DEFAULT_FRAME_SIZE
    fs: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self) -> None:
        _validate_frame_size(self.n)
        if not self.fs > 0:
            raise ValueError(SAMPLE_RATE_MSG)

    @property
    def hop(self) -> int:
        return self.n // 2

    @property
    def bins(self) -> int:
        return self.n // 2 + 1


@dataclass(frozen=True)
class SpectrumFrame:
    """One STFT frame of N/2+1 complex bins; `t` counts frames from 1."""

    bins: np.ndarray
    t: int


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window, w[n] = 0.5(1 - cos(2πn/N))."""
    _validate_frame_size(n)
    return np.asarray(hann(n, sym=False), dtype=np.float64)


def rfft(x: np.ndarray) -> np.ndarray:
    """Forward FFT of a real vector whose length is a power of two.

    Returns the L/2+1 non-negative frequency bins without scaling.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(NOT_1D_MSG)
    if x.size < 2 or not _is_power_of_two(x.size):
        raise ValueError(FFT_LENGTH_MSG)
    return scipy.fft.rfft(x)


def irfft(bins: np.ndarray) -> np.ndarray:
    """Inverse of `rfft`, scaled by 1/L.

    The imaginary parts of the DC and Nyquist bins are discarded.
    """
    spectrum = np.array(bins, dtype=np.complex128)
    if spectrum.ndim != 1:
        raise ValueError(NOT_1D_MSG)
    length = 2 * (spectrum.size - 1)
    if length < 2 or not _is_power_of_two(length):
        raise ValueError(IFFT_LENGTH_MSG)

    spectrum[0] = spectrum[0].real
    spectrum[-1] = spectrum[-1].real
    return scipy.fft.irfft(spectrum, n=length)


def _frame_spectra(samples: np.ndarray, window: np.ndarray, hop: int) -> np.ndarray:
    """Windowed spectra of every complete frame in `samples`, shape (T, N/2+1)."""
    n = window.size
    if samples.size < n:
        return np.empty((0, n // 2 + 1), dtype=np.complex128)

    frames = np.lib.stride_tricks.sliding_window_view(samples, n)[::hop]
    return scipy.fft.rfft(frames * window, axis=-1)


class StftStream:
    """Per-channel streaming STFT state.

    Samples are pushed in chunks of any size. The first frame is emitted
    once N samples have arrived and then one frame per hop, so a stream of
    S >= N samples yields floor((S - N) / hop) + 1 frames in total.
    """

    def __init__(self, config: FrameConfig) -> None:
        self.config = config
        self._window = hann_window(config.n)
        self._pending = np.zeros(0)
        self._t = 0

    @property
    def frames_emitted(self) -> int:
        return self._t

    def push(self, samples: np.ndarray) -> List[SpectrumFrame]:
        """Buffer `samples` and return the frames completed by them."""
        chunk = np.asarray(samples, dtype=np.float64)
        if chunk.ndim != 1:
            raise ValueError(NOT_1D_MSG)
        if not np.all(np.isfinite(chunk)):
            raise ValueError(NOT_FINITE_MSG)

        data = np.concatenate((self._pending, chunk))
        spectra = _frame_spectra(data, self._window, self.config.hop)

        # Keep the overlap of the last emitted frame plus anything after it
        consumed = spectra.shape[0] * self.config.hop
        self._pending = data[consumed:]

        frames = []
        for row in spectra:
            self._t += 1
            frames.append(SpectrumFrame(row, self._t))
        return frames


def stft(signal: np.ndarray, config: FrameConfig) -> np.ndarray:
    """All complete STFT frames of `signal` as a (T, N/2+1) array.

    Row t-1 equals the frame with index t emitted by a fresh `StftStream`.
    """
    samples = np.asarray(signal, dtype=np.float64)
    if samples.ndim != 1:
        raise ValueError(NOT_1D_MSG)
    if not np.all(np.isfinite(samples)):
        raise ValueError(NOT_FINITE_MSG)
    return _frame_spectra(samples, hann_window(config.n), config.hop)
