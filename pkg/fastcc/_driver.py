# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""The one-call interface to this library.

Do not import this module directly, but rather import the main fastcc module.
"""

import concurrent.futures
from functools import lru_cache
import logging
import os
import sys
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union,\
    TYPE_CHECKING
import numpy as np
from ._crossspec import DEFAULT_ALPHA, _validate_alpha, phat, smooth_cross_spectrum
from ._fcc import DEFAULT_RANK, FccBases, FccCorrelator, build_w, decompose
from ._frontend import DEFAULT_FRAME_SIZE, DEFAULT_SAMPLE_RATE, FrameConfig, stft
from ._gcc import DEFAULT_DISTANCE, DEFAULT_INTERPOLATION, DEFAULT_SPEED_OF_SOUND,\
    MIN_SPEED_OF_SOUND, GccCorrelator, make_grid
from ._peak import TdoaTrack, track_peaks

if TYPE_CHECKING:
    import pandas

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[Sequence[float]], np.ndarray]
Pair = Tuple[int, int]
Correlator = Union[GccCorrelator, FccCorrelator]
T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "FCC_THREADS"
TDOA_COLUMNS = ["t", "pair", "tau_star", "tau_hat", "theta_hat_deg", "peak", "boundary"]

METHOD_MSG = "method must be 'gcc', 'gcc:<r>', 'fcc' or 'fcc:<K>'"
CHANNELS_MSG = "need at least 2 channels"
SIGNAL_SHAPE_MSG = "signals must be a two-dimensional (samples x channels) array"
TOO_SHORT_MSG = "signals are shorter than one frame"
PAIR_MSG = "pairs must be distinct channel indices"
BASES_FRAME_MSG = "bases were built for a different frame size"
BASES_RATE_MSG = "bases were built for a different sample rate"
THREADS_MSG = f"{THREADS_ENV} must be a positive integer"


def parse_method(spec: str) -> Tuple[str, Optional[int]]:
    """Split "gcc:2" or "fcc:8" into the method name and its parameter.

    The parameter is None when only the name is given.
    """
    name, _, parameter = spec.strip().lower().partition(":")
    if name not in ("gcc", "fcc"):
        raise ValueError(METHOD_MSG)
    if not parameter:
        return name, None
    try:
        value = int(parameter)
    except ValueError:
        raise ValueError(METHOD_MSG) from None
    if value < 1:
        raise ValueError(METHOD_MSG)
    return name, value


@lru_cache(maxsize=16)
def cached_bases(n: int, distance: float, fs: float, c_min: float, k: int) -> FccBases:
    """Bases for one array geometry, built once per process."""
    grid = make_grid(distance, fs, c_min)
    return decompose(build_w(grid, n), k)


def make_correlator(method: str, *, n: int = DEFAULT_FRAME_SIZE,
        fs: float = DEFAULT_SAMPLE_RATE, distance: float = DEFAULT_DISTANCE,
        c_min: float = MIN_SPEED_OF_SOUND, r: int = DEFAULT_INTERPOLATION,
        k: int = DEFAULT_RANK, bases: Optional[FccBases] = None) -> Correlator:
    """Build the GCC or FCC workspace for a method string such as "gcc:2" or "fcc:8".

    A parameter in the method string overrides `r` or `k`.
    Given `bases` are used as-is for FCC and must match `n` and `fs`.
    """
    name, parameter = parse_method(method)
    if name == "gcc":
        factor = parameter or r
        grid = make_grid(distance, fs, c_min, delta=1.0 / factor)
        return GccCorrelator(grid, n, factor)

    if bases is None:
        bases = cached_bases(n, distance, fs, c_min, parameter or k)
    elif bases.n != n:
        raise ValueError(BASES_FRAME_MSG)
    elif bases.grid.fs and bases.grid.fs != fs:
        raise ValueError(BASES_RATE_MSG)
    return FccCorrelator(bases)


def _phat_frames(x1: np.ndarray, x2: np.ndarray, config: FrameConfig,
        alpha: float) -> np.ndarray:
    """stft, smoothed cross-spectrum and PHAT for every frame, shape (T, N/2+1)."""
    cross = smooth_cross_spectrum(stft(x1, config), stft(x2, config), alpha)
    return phat(cross)


def _pair_track(param_tuple: Tuple[np.ndarray, np.ndarray, FrameConfig, float,
        Correlator, float, float]) -> TdoaTrack:
    x1, x2, config, alpha, correlator, distance, c = param_tuple
    y = correlator(_phat_frames(x1, x2, config, alpha))
    return track_peaks(y, correlator.grid, distance, c, config.fs)


def estimate_tdoa(signals: ArrayLike,
        *, fs: float = DEFAULT_SAMPLE_RATE,
        distance: float = DEFAULT_DISTANCE,
        method: str = "gcc",
        r: int = DEFAULT_INTERPOLATION,
        k: int = DEFAULT_RANK,
        bases: Optional[FccBases] = None,
        n: int = DEFAULT_FRAME_SIZE,
        alpha: float = DEFAULT_ALPHA,
        c: float = DEFAULT_SPEED_OF_SOUND,
        c_min: float = MIN_SPEED_OF_SOUND,
        pairs: Optional[Iterable[Pair]] = None,
        max_threads: Optional[int] = None,
        callback: Optional[Callable[[int, int], None]] = None) -> Dict[Pair, TdoaTrack]:
    """Estimate the time difference of arrival for microphone pairs, frame by frame.

    Each pair (i, j) runs the whole pipeline: short-time Fourier transform,
    recursively smoothed cross-spectrum, phase transform, cross-correlation
    on the delay grid (GCC or FCC), argmax and quadratic refinement.
    A positive delay means that the sound reaches channel j first.

    Returns a dict from (i, j) to a `TdoaTrack`. If `signals` is a pandas
    `DataFrame`, the result is a long-format `DataFrame` instead, with the
    columns t, pair, tau_star, tau_hat, theta_hat_deg, peak and boundary;
    the pair is named after the data frame columns.

    Positional or keyword parameters:
    ---
    signals : array_like
        A 2D array where the columns are microphone channels and the rows
        are samples.

    Optional keyword parameters:
    ---
    fs : float, default 16000
        Sample rate in samples per second.
    distance : float, default 0.15
        Microphone spacing in meters. Determines the delay grid and the
        delay-to-angle mapping.
    method : str, default "gcc"
        "gcc" or "fcc", optionally followed by the interpolation factor or
        the rank, e.g. "gcc:4" or "fcc:6".
    r : int, default 2
        Interpolation factor of GCC when not given in `method`.
    k : int, default 8
        Rank of FCC when not given in `method`.
    bases : FccBases or None
        Precomputed FCC bases. By default the bases are built (and cached)
        for the array geometry.
    n : int, default 512
        Frame size in samples, a power of two. Frames overlap by half.
    alpha : float, default 0.1
        Smoothing factor of the cross-spectrum.
    c : float, default 343
        Speed of sound used for the angle, in m/s.
    c_min : float, default 335
        Smallest expected speed of sound, bounding the delay grid.
    pairs : iterable of (int, int) or None
        The channel pairs to process. By default all pairs i < j.
    max_threads : int or None
        The maximum number of threads to use. By default the value of
        the FCC_THREADS environment variable or the number of CPU cores.
    callback : method or None
        A method to call when each pair is completed, with the two channel
        indices as parameters.
    """

    data = np.asarray(signals, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(SIGNAL_SHAPE_MSG)
    if data.shape[1] < 2:
        raise ValueError(CHANNELS_MSG)
    _validate_alpha(alpha)

    config = FrameConfig(n, fs)
    if data.shape[0] < config.n:
        raise ValueError(TOO_SHORT_MSG)

    pair_list = _validate_pairs(pairs, data.shape[1])
    correlator = make_correlator(method, n=n, fs=fs, distance=distance, c_min=c_min,
        r=r, k=k, bases=bases)
    tracks = _estimate_tdoa(data, pair_list, config, alpha, correlator, distance, c,
        max_threads, callback)

    # If the input was a pandas data frame, name the pairs after the columns
    if "pandas" in sys.modules:
        import pandas
        if isinstance(signals, pandas.DataFrame):
            names = [str(col) for col in signals.columns]
            return tracks_to_frame(tracks, names)
    return tracks


def _validate_pairs(pairs: Optional[Iterable[Pair]], channels: int) -> List[Pair]:
    if pairs is None:
        return [(i, j) for i in range(channels) for j in range(i + 1, channels)]

    result = []
    for pair in pairs:
        i, j = pair
        if i == j or not (0 <= i < channels and 0 <= j < channels):
            raise ValueError(PAIR_MSG)
        result.append((int(i), int(j)))
    if not result:
        raise ValueError(PAIR_MSG)
    return result


def _estimate_tdoa(data: np.ndarray, pairs: List[Pair], config: FrameConfig,
        alpha: float, correlator: Correlator, distance: float, c: float,
        max_threads: Optional[int],
        callback: Optional[Callable[[int, int], None]]) -> Dict[Pair, TdoaTrack]:
    """Strongly typed estimate_tdoa(); the pairs are already validated."""

    params = [(data[:, i], data[:, j], config, alpha, correlator, distance, c)
        for (i, j) in pairs]

    def wrapped_callback(index: int) -> None:
        if callback is not None:
            callback(*pairs[index])

    time_estimate = _get_tdoa_time_estimate(data.shape[0], config.n)
    results = _map_maybe_parallel(_pair_track, params, max_threads, time_estimate,
        wrapped_callback)
    return dict(zip(pairs, results))


def _get_tdoa_time_estimate(samples: int, n: int) -> float:
    # Seconds per pair, roughly: two STFTs and one correlation per hop
    frames = max(1, 2 * samples // n)
    return frames * n * 1e-8


def _thread_limit(max_threads: Optional[int]) -> Optional[int]:
    if max_threads is not None:
        return max_threads

    value = os.environ.get(THREADS_ENV)
    if value is None or not value.strip():
        return None
    try:
        limit = int(value)
    except ValueError:
        raise ValueError(THREADS_MSG) from None
    if limit < 1:
        raise ValueError(THREADS_MSG)
    return limit


def _map_maybe_parallel(func: Callable[[T], R], params: Sequence[T],
    max_threads: Optional[int], time_estimate: float,
    callback: Callable[[int], None]) -> List[R]:
    # If there is benefit in doing so, and the user has not overridden the
    # heuristic, run the tasks in multiple parallel threads.
    # Multithreading is fine, because NumPy and SciPy release the
    # Global Interpreter Lock in the FFT and matrix kernels. Because the
    # threads are CPU bound, we should use at most as many threads as there are cores.

    # If the total execution time is very small, do not bother with threading
    if len(params) * time_estimate < 0.2:
        num_threads = 1
    else:
        num_threads = os.cpu_count() or 1

    limit = _thread_limit(max_threads)
    if limit is not None:
        num_threads = min(num_threads, limit)

    if num_threads > 1:
        logger.debug("running %d tasks on %d threads", len(params), num_threads)
        results = {} # type: Dict[int, R]
        with concurrent.futures.ThreadPoolExecutor(num_threads, "fastcc-work") as executor:
            tasks = []

            # Do some work that would be done by executor.map() so that we can
            # implement callbacks. The result list must be in the same order
            # as the params list.
            def get_callback(i): # type: (int) -> Callable[[concurrent.futures.Future[R]], None]
                def done(future): # type: (concurrent.futures.Future[R]) -> None
                    results[i] = future.result()
                    callback(i)
                return done

            for (i, p) in enumerate(params):
                task = executor.submit(func, p)
                task.add_done_callback(get_callback(i))
                tasks.append(task)

            concurrent.futures.wait(tasks)
            # Re-raise the first failure in submission order
            for task in tasks:
                task.result()
        return [results[i] for i in range(len(params))]
    else:
        # Run the tasks sequentially
        # To support callbacks, we reimplement map() here too
        result = []
        for (i, p) in enumerate(params):
            result.append(func(p))
            callback(i)
        return result


def tracks_to_frame(tracks: Dict[Pair, TdoaTrack],
        names: Optional[Sequence[str]] = None) -> "pandas.DataFrame":
    """Flatten per-pair tracks into one row per (frame, pair).

    Pairs are labeled "i-j" with channel indices, or with `names` if given.
    Rows are ordered by frame and, within a frame, by the order of `tracks`.
    """
    import pandas

    parts = []
    for (i, j), track in tracks.items():
        label = f"{names[i]}-{names[j]}" if names is not None else f"{i}-{j}"
        parts.append(pandas.DataFrame({
            "t": track.t,
            "pair": label,
            "tau_star": track.tau_star,
            "tau_hat": track.tau_hat,
            "theta_hat_deg": np.degrees(track.theta_hat),
            "peak": track.peak,
            "boundary": track.boundary | track.degenerate,
        }))
    if not parts:
        return pandas.DataFrame(columns=TDOA_COLUMNS)

    frame = pandas.concat(parts, ignore_index=True)
    return frame.sort_values("t", kind="mergesort").reset_index(drop=True)


