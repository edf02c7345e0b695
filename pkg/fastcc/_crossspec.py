# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Recursively smoothed cross-spectrum and the phase transform."""

import numpy as np
from scipy.signal import lfilter
from ._frontend import SpectrumFrame

DEFAULT_ALPHA = 0.1
PHAT_EPSILON = 1e-12

ALPHA_RANGE_MSG = "alpha must be between 0 and 1"
FRAME_LENGTH_MSG = "frames must have the same number of bins as the cross-spectrum"
FRAME_INDEX_MSG = "frames must have the same frame index"
SHAPE_MISMATCH_MSG = "spectra must have the same shape"


def _validate_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(ALPHA_RANGE_MSG)


class CrossSpectrum:
    """Cross-spectrum R(t,f) of one microphone pair.

    R starts at zero (t = 0) and follows
    R(t,f) = (1-α) R(t-1,f) + α X1(t,f) X2(t,f)*.
    """

    def __init__(self, bins: int, alpha: float = DEFAULT_ALPHA) -> None:
        _validate_alpha(alpha)
        self.alpha = alpha
        self.r = np.zeros(bins, dtype=np.complex128)
        self.t = 0

    def update(self, x1: SpectrumFrame, x2: SpectrumFrame) -> None:
        if x1.t != x2.t:
            raise ValueError(FRAME_INDEX_MSG)
        if x1.bins.shape != self.r.shape or x2.bins.shape != self.r.shape:
            raise ValueError(FRAME_LENGTH_MSG)

        self.r *= (1.0 - self.alpha)
        self.r += self.alpha * x1.bins * np.conj(x2.bins)
        self.t += 1

    def phat(self) -> np.ndarray:
        return phat(self.r)


def phat(r: np.ndarray) -> np.ndarray:
    """Divide each element by its magnitude; elements with |R| <= 1e-12 become 0.

    Works elementwise on arrays of any shape.
    """
    r = np.asarray(r, dtype=np.complex128)
    magnitude = np.abs(r)
    result = np.zeros_like(r)
    np.divide(r, magnitude, out=result, where=magnitude > PHAT_EPSILON)
    return result


def smooth_cross_spectrum(x1: np.ndarray, x2: np.ndarray,
        alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Run the cross-spectrum recursion over a (T, bins) stack of frames.

    Row t-1 of the result equals `CrossSpectrum.r` after the t'th update.
    """
    _validate_alpha(alpha)
    x1 = np.asarray(x1)
    x2 = np.asarray(x2)
    if x1.shape != x2.shape:
        raise ValueError(SHAPE_MISMATCH_MSG)

    # R(t) - (1-α) R(t-1) = α P(t) is a first-order IIR filter along time
    product = x1 * np.conj(x2)
    if product.shape[0] == 0:
        return product
    return lfilter([alpha], [1.0, alpha - 1.0], product, axis=0)
