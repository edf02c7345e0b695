# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Multichannel WAV input."""

from dataclasses import dataclass
import os
from typing import Union
import numpy as np
from scipy.io import wavfile

PathLike = Union[str, "os.PathLike[str]"]

PCM16_SCALE = 1.0 / 32768.0


class WavFormatError(ValueError):
    """The file cannot be read as a 16-bit PCM or 32-bit float WAV file."""


@dataclass(frozen=True)
class WavClip:
    """Samples as a (length, channels) array scaled to [-1, 1]."""

    fs: int
    samples: np.ndarray

    @property
    def channels(self) -> int:
        return int(self.samples.shape[1])


def read_wav(path: PathLike) -> WavClip:
    """Read a 16-bit PCM or 32-bit float WAV file, mono or multichannel.

    PCM samples are divided by 32768. Raises OSError if the file cannot
    be opened and WavFormatError if it is not a supported WAV file.
    """
    try:
        fs, data = wavfile.read(path)
    except ValueError as e:
        raise WavFormatError(str(e)) from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) * PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(f"unsupported WAV sample format {data.dtype}" +
            " (need 16-bit PCM or 32-bit float)")

    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    return WavClip(int(fs), samples)
