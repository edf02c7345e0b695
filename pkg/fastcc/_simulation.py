# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Synthetic two-microphone scenes with a known delay, and accuracy sweeps.

Do not import this module directly.
Use the names exported from the main fastcc module instead.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TYPE_CHECKING, Union
import numpy as np
import scipy.fft
from scipy.signal import fftconvolve
from ._crossspec import DEFAULT_ALPHA
from ._driver import Correlator, _map_maybe_parallel, _phat_frames, make_correlator,\
    parse_method
from ._fcc import DEFAULT_RANK, FccBases
from ._frontend import DEFAULT_FRAME_SIZE, DEFAULT_SAMPLE_RATE, FrameConfig
from ._gcc import DEFAULT_DISTANCE, DEFAULT_INTERPOLATION, DEFAULT_SPEED_OF_SOUND,\
    MIN_SPEED_OF_SOUND
from ._peak import TdoaTrack, mae, track_peaks

if TYPE_CHECKING:
    import pandas

logger = logging.getLogger(__name__)

DEFAULT_CONVERGENCE = 20
DEFAULT_METHODS = ("gcc:2", "fcc:8")
DEFAULT_DISTANCES = (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10,
    0.11, 0.12, 0.13, 0.14, 0.15)
SPEED_OF_SOUND_RANGE = (335.0, 350.0)
SPACING_TOLERANCE = 0.001

# Extra samples on both sides of the delayed source; the circular
# wrap of the frequency-domain delay falls into them and is cut away
DELAY_PADDING = 64

MAE_COLUMNS = ["d", "method", "parameter", "mae_degrees", "trials", "boundary_rate"]

GEOMETRY_MSG = "distance, speed of sound, sample rate and duration must be positive"
ANGLE_MSG = "theta must be between 0 and pi"
SNR_MSG = "snr_db must not be NaN"
RT60_MSG = "rt60 must be positive"
DRR_MSG = "direct_to_reverb_db must be finite"
TRIALS_MSG = "trials must be a positive integer"
CONVERGENCE_MSG = "convergence must be a non-negative integer"
NO_FRAMES_MSG = "the signal has no frames after the convergence index"
SPEED_RANGE_MSG = "speed of sound range must be positive and ascending"


@dataclass(frozen=True)
class ReverbConfig:
    """Synthetic reverberant tail: exponentially decaying noise after a unit impulse.

    The tail decays by 60 dB in `rt60` seconds and carries
    `direct_to_reverb_db` less energy than the direct path.
    """

    rt60: float = 0.6
    direct_to_reverb_db: float = 0.0

    def __post_init__(self) -> None:
        if not self.rt60 > 0:
            raise ValueError(RT60_MSG)
        if not math.isfinite(self.direct_to_reverb_db):
            raise ValueError(DRR_MSG)


@dataclass(frozen=True)
class SimConfig:
    """One synthetic scene. Angles are in radians, `theta = 0` is endfire."""

    d: float = 0.05
    theta: float = math.pi / 2
    c: float = DEFAULT_SPEED_OF_SOUND
    fs: float = DEFAULT_SAMPLE_RATE
    duration: float = 1.0
    snr_db: float = math.inf
    reverb: Optional[ReverbConfig] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.d > 0 and self.c > 0 and self.fs > 0 and self.duration > 0):
            raise ValueError(GEOMETRY_MSG)
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(ANGLE_MSG)
        if math.isnan(self.snr_db):
            raise ValueError(SNR_MSG)


def true_delay(cfg: SimConfig) -> float:
    """The delay in samples between the two channels, fs (d/c) cos θ."""
    return cfg.fs * cfg.d / cfg.c * math.cos(cfg.theta)


def _fractional_delay(spectrum: np.ndarray, size: int, delay: float) -> np.ndarray:
    f = np.arange(spectrum.size)
    shifted = spectrum * np.exp(-2j * np.pi * f * delay / size)
    return scipy.fft.irfft(shifted, n=size)


def _reverb_tail(rng: np.random.Generator, reverb: ReverbConfig, fs: float) -> np.ndarray:
    length = max(1, int(round(reverb.rt60 * fs)))
    n = np.arange(1, length + 1)
    envelope = np.exp(-3.0 * math.log(10.0) * n / (reverb.rt60 * fs))
    tail = rng.standard_normal(length) * envelope
    tail *= math.sqrt(10.0 ** (-reverb.direct_to_reverb_db / 10.0) / np.sum(tail ** 2))
    return np.concatenate(([1.0], tail))


def synth_pair(cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Generate the two microphone signals of a scene.

    The source is unit-variance white noise. Channel 1 is delayed by +τ/2
    and channel 2 by -τ/2 with an exact frequency-domain phase ramp, so the
    channels differ by τ = `true_delay(cfg)` samples. If the scene has
    reverberation, each channel is convolved with its own synthetic tail.
    Independent white sensor noise is added last, `snr_db` below the
    channel power.
    """
    rng = np.random.default_rng(cfg.seed)
    length = int(round(cfg.duration * cfg.fs))
    tau = true_delay(cfg)

    pad = int(math.ceil(abs(tau))) + DELAY_PADDING
    size = length + 2 * pad
    size += size % 2
    spectrum = scipy.fft.rfft(rng.standard_normal(size))
    # A phase ramp on the Nyquist bin cannot stay real
    spectrum[-1] = 0.0

    channels = []
    for delay in (tau / 2, -tau / 2):
        channels.append(_fractional_delay(spectrum, size, delay)[pad:pad + length])

    if cfg.reverb is not None:
        channels = [fftconvolve(ch, _reverb_tail(rng, cfg.reverb, cfg.fs))[:length]
            for ch in channels]

    if math.isfinite(cfg.snr_db):
        for ch in channels:
            power = np.mean(ch ** 2)
            ch += rng.normal(0.0, math.sqrt(power * 10.0 ** (-cfg.snr_db / 10.0)), length)

    return channels[0], channels[1]


def _method_label(spec: str) -> Tuple[str, int]:
    name, parameter = parse_method(spec)
    if parameter is None:
        parameter = DEFAULT_INTERPOLATION if name == "gcc" else DEFAULT_RANK
    return name, parameter


@dataclass(frozen=True)
class TrialResult:
    """The per-frame estimates of every method on one scene.

    `tracks` hold all frames; `estimates()` drops the frames up to
    the convergence index.
    """

    config: SimConfig
    tau_true: float
    theta_true: float
    convergence: int
    tracks: Dict[str, TdoaTrack] = field(default_factory=dict)

    def estimates(self, method: str) -> TdoaTrack:
        return self.tracks[method].after(self.convergence)

    def errors(self, method: str) -> np.ndarray:
        """Absolute angle errors in radians after convergence."""
        return np.abs(self.estimates(method).theta_hat - self.theta_true)

    def mae(self, method: str) -> float:
        theta = self.estimates(method).theta_hat
        return mae(np.full(theta.shape, self.theta_true), theta)

    def boundary_count(self, method: str) -> int:
        track = self.estimates(method)
        return int(np.count_nonzero(track.boundary | track.degenerate))


def _validate_convergence(convergence: int) -> None:
    if not isinstance(convergence, (int, np.integer)) or convergence < 0:
        raise ValueError(CONVERGENCE_MSG)


def _run_trial(cfg: SimConfig, correlators: Dict[str, Correlator], n: int,
        alpha: float, convergence: int) -> TrialResult:
    x1, x2 = synth_pair(cfg)
    config = FrameConfig(n, cfg.fs)
    x = _phat_frames(x1, x2, config, alpha)
    if x.shape[0] <= convergence:
        raise ValueError(NO_FRAMES_MSG)

    # Every method sees the same PHAT frames
    tracks = {}
    for label, correlator in correlators.items():
        tracks[label] = track_peaks(correlator(x), correlator.grid, cfg.d, cfg.c, cfg.fs)
    return TrialResult(cfg, true_delay(cfg), cfg.theta, convergence, tracks)


def run_trial(cfg: SimConfig, methods: Union[str, Sequence[str]] = DEFAULT_METHODS,
        *, n: int = DEFAULT_FRAME_SIZE,
        alpha: float = DEFAULT_ALPHA,
        design_distance: float = DEFAULT_DISTANCE,
        c_min: float = MIN_SPEED_OF_SOUND,
        convergence: int = DEFAULT_CONVERGENCE,
        bases: Optional[FccBases] = None) -> TrialResult:
    """Synthesize one scene and run it through each method.

    The delay grids (and FCC bases, unless given) are designed for
    `design_distance` and `c_min`, independent of the scene geometry;
    the angle is computed with the scene's own spacing and speed of sound.

    Parameters:
    ---
    cfg : SimConfig
        The scene.
    methods : str or sequence of str
        Method strings such as "gcc:2" or "fcc:8". The result is keyed by
        these strings as given.
    n : int, default 512
        Frame size.
    alpha : float, default 0.1
        Cross-spectrum smoothing factor.
    design_distance : float, default 0.15
        Largest microphone spacing the delay grid must cover.
    c_min : float, default 335
        Smallest speed of sound the delay grid must cover.
    convergence : int, default 20
        Frames up to and including this index are left out of the errors.
    bases : FccBases or None
        Precomputed bases for the FCC methods.
    """
    _validate_convergence(convergence)
    if isinstance(methods, str):
        methods = [methods]
    correlators = {
        method: make_correlator(method, n=n, fs=cfg.fs, distance=design_distance,
            c_min=c_min, bases=bases)
        for method in methods
    }
    return _run_trial(cfg, correlators, n, alpha, convergence)


def _random_scene(seed: np.random.SeedSequence, distance: float, fs: float,
        duration: float, snr_db: float, reverb: Optional[ReverbConfig],
        speed_range: Tuple[float, float]) -> SimConfig:
    # Uniform in cos θ gives a uniform delay
    rng = np.random.default_rng(seed)
    theta = math.acos(rng.uniform(-1.0, 1.0))
    c = rng.uniform(*speed_range)
    d = distance + rng.uniform(-SPACING_TOLERANCE, SPACING_TOLERANCE)
    return SimConfig(d, theta, c, fs, duration, snr_db, reverb,
        int(rng.integers(2**32)))


def sweep(distances: Sequence[float] = DEFAULT_DISTANCES,
        methods: Sequence[str] = DEFAULT_METHODS,
        *, trials: int = 50,
        snr_db: float = 20.0,
        reverb: Optional[ReverbConfig] = None,
        duration: float = 1.0,
        fs: float = DEFAULT_SAMPLE_RATE,
        n: int = DEFAULT_FRAME_SIZE,
        alpha: float = DEFAULT_ALPHA,
        design_distance: float = DEFAULT_DISTANCE,
        c_min: float = MIN_SPEED_OF_SOUND,
        speed_range: Tuple[float, float] = SPEED_OF_SOUND_RANGE,
        convergence: int = DEFAULT_CONVERGENCE,
        seed: int = 0,
        max_threads: Optional[int] = None,
        callback: Optional[Callable[[float, int], None]] = None) -> "pandas.DataFrame":
    """Angle error of each method over random scenes, for each microphone spacing.

    For every spacing, `trials` scenes are drawn with a random source
    angle (uniform in cos θ), speed of sound (uniform in `speed_range`)
    and spacing (within ±1 mm). All methods process the same scenes.

    Returns a data frame with the columns d, method, parameter,
    mae_degrees, trials and boundary_rate, one row per spacing and
    method. The MAE pools every frame after the convergence index.
    The same `seed` always gives the same table.

    The callback, if given, is called with the spacing and trial index
    after each trial.
    """
    import pandas

    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValueError(TRIALS_MSG)
    _validate_convergence(convergence)
    if not 0 < speed_range[0] <= speed_range[1]:
        raise ValueError(SPEED_RANGE_MSG)

    labels = [_method_label(m) for m in methods]
    correlators = {
        f"{name}:{parameter}": make_correlator(f"{name}:{parameter}", n=n, fs=fs,
            distance=design_distance, c_min=c_min)
        for (name, parameter) in labels
    }

    seeds = np.random.SeedSequence(seed).spawn(len(distances) * trials)
    rows = [] # type: List[Tuple[float, str, int, float, int, float]]
    for d_index, distance in enumerate(distances):
        logger.info("sweep: d = %.3f m, %d trials", distance, trials)
        scenes = [_random_scene(seeds[d_index * trials + t], distance, fs, duration,
            snr_db, reverb, speed_range) for t in range(trials)]
        params = [(scene, correlators, n, alpha, convergence) for scene in scenes]

        def wrapped_callback(i: int, distance: float = distance) -> None:
            logger.debug("sweep: d = %.3f m, trial %d done", distance, i)
            if callback is not None:
                callback(distance, i)

        time_estimate = duration * fs * len(correlators) * 2e-7
        results = _map_maybe_parallel(_trial_task, params, max_threads, time_estimate,
            wrapped_callback)

        for (name, parameter) in labels:
            label = f"{name}:{parameter}"
            errors = np.concatenate([res.errors(label) for res in results])
            boundary = sum(res.boundary_count(label) for res in results)
            rows.append((distance, name, parameter, float(np.degrees(np.mean(errors))),
                trials, boundary / errors.size))

    return pandas.DataFrame(rows, columns=MAE_COLUMNS)


def _trial_task(param_tuple: Tuple[SimConfig, Dict[str, Correlator], int, float, int]) -> TrialResult:
    return _run_trial(*param_tuple)


def mae_pivot(table: "pandas.DataFrame") -> "pandas.DataFrame":
    """Reshape a `sweep` table to one row per method and parameter, one column per spacing."""
    return table.pivot_table(index=["method", "parameter"], columns="d",
        values="mae_degrees", sort=False)
