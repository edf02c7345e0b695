# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Wall-clock cost of each pipeline step per frame."""

from dataclasses import dataclass, field
import logging
import timeit
from typing import Callable, Dict, TYPE_CHECKING
import numpy as np
import scipy.fft
from threadpoolctl import threadpool_limits
from ._crossspec import DEFAULT_ALPHA, phat
from ._driver import make_correlator
from ._fcc import DEFAULT_RANK
from ._frontend import DEFAULT_FRAME_SIZE, DEFAULT_SAMPLE_RATE, hann_window
from ._gcc import DEFAULT_DISTANCE, DEFAULT_INTERPOLATION, DEFAULT_SPEED_OF_SOUND
from ._peak import track_peaks

if TYPE_CHECKING:
    import pandas

logger = logging.getLogger(__name__)

STEP_STFT = "stft"
STEP_XSPEC = "xspec+phat"
STEP_GCC = "gcc"
STEP_FCC = "fcc"
STEP_INTERPOLATION = "interpolation"
STEPS = (STEP_STFT, STEP_XSPEC, STEP_GCC, STEP_FCC, STEP_INTERPOLATION)

TOTAL_GCC = "Total with GCC"
TOTAL_FCC = "Total with FCC"

MIN_REPETITIONS = 100
MIN_WARMUP = 10
BENCH_THREADS = 1

MICS_MSG = "at least 2 microphones are needed"
REPETITIONS_MSG = f"at least {MIN_REPETITIONS} repetitions and {MIN_WARMUP} warm-up rounds are needed"


@dataclass(frozen=True)
class BenchReport:
    """Mean microseconds per frame for each step, summed over all pairs.

    The STFT step covers every microphone once; the other steps cover
    every pair.
    """

    mics: int
    n: int
    r: int
    k: int
    repetitions: int
    warmup: int
    steps: Dict[str, float] = field(default_factory=dict)
    threads: int = 1

    @property
    def pairs(self) -> int:
        return self.mics * (self.mics - 1) // 2

    @property
    def total_gcc(self) -> float:
        return sum(self.steps[s] for s in (STEP_STFT, STEP_XSPEC, STEP_GCC, STEP_INTERPOLATION))

    @property
    def total_fcc(self) -> float:
        return sum(self.steps[s] for s in (STEP_STFT, STEP_XSPEC, STEP_FCC, STEP_INTERPOLATION))

    @property
    def speedup(self) -> float:
        """GCC step time divided by FCC step time."""
        return self.steps[STEP_GCC] / self.steps[STEP_FCC]

    def to_frame(self) -> "pandas.DataFrame":
        """Step rows followed by the two totals, in a `microseconds` column."""
        import pandas

        names = list(STEPS) + [TOTAL_GCC, TOTAL_FCC]
        values = [self.steps[s] for s in STEPS] + [self.total_gcc, self.total_fcc]
        return pandas.DataFrame({"microseconds": values}, index=pandas.Index(names, name="step"))

    def to_text(self) -> str:
        header = (f"M = {self.mics} microphones, {self.pairs} pairs, N = {self.n}, "
            f"r = {self.r}, K = {self.k}, {self.repetitions} repetitions, "
            f"{self.threads} thread" + ("" if self.threads == 1 else "s"))
        table = self.to_frame().to_string(float_format=lambda v: f"{v:10.2f}")
        return f"{header}\n{table}\nspeedup (gcc / fcc): {self.speedup:.2f}\n"


def _mean_microseconds(step: Callable[[], object], repetitions: int, warmup: int) -> float:
    timer = timeit.Timer(step)
    timer.timeit(number=warmup)
    return timer.timeit(number=repetitions) / repetitions * 1e6


def bench_pipeline(mics: int = 2, *, n: int = DEFAULT_FRAME_SIZE,
        r: int = DEFAULT_INTERPOLATION, k: int = DEFAULT_RANK,
        repetitions: int = 1000, warmup: int = 10,
        fs: float = DEFAULT_SAMPLE_RATE, distance: float = DEFAULT_DISTANCE,
        seed: int = 0) -> BenchReport:
    """Time one frame of each pipeline step for `mics` microphones.

    Every pair is processed on its own, one frame at a time, so the
    correlation steps scale with the pair count M(M-1)/2. Runs in the
    calling thread with BLAS and the FFT backend held to one thread; do
    not run two benchmarks at the same time.
    """
    if not isinstance(mics, (int, np.integer)) or mics < 2:
        raise ValueError(MICS_MSG)
    if repetitions < MIN_REPETITIONS or warmup < MIN_WARMUP:
        raise ValueError(REPETITIONS_MSG)

    gcc = make_correlator(f"gcc:{r}", n=n, fs=fs, distance=distance)
    fcc = make_correlator(f"fcc:{k}", n=n, fs=fs, distance=distance)
    logger.info("benchmark: M=%d, N=%d, r=%d, K=%d, %d repetitions",
        mics, n, r, k, repetitions)

    rng = np.random.default_rng(seed)
    window = hann_window(n)
    samples = rng.standard_normal((mics, n))
    spectra = scipy.fft.rfft(samples * window, axis=-1)
    pairs = [(i, j) for i in range(mics) for j in range(i + 1, mics)]
    cross = np.zeros((len(pairs), n // 2 + 1), dtype=np.complex128)
    x = phat(np.array([spectra[i] * np.conj(spectra[j]) for (i, j) in pairs]))
    y_gcc = gcc(x)

    def stft_step() -> None:
        for channel in samples:
            scipy.fft.rfft(channel * window)

    def xspec_step() -> None:
        for p, (i, j) in enumerate(pairs):
            cross[p] *= 1.0 - DEFAULT_ALPHA
            cross[p] += DEFAULT_ALPHA * spectra[i] * np.conj(spectra[j])
            phat(cross[p])

    def gcc_step() -> None:
        for row in x:
            gcc(row)

    def fcc_step() -> None:
        for row in x:
            fcc(row)

    def interpolation_step() -> None:
        for row in y_gcc:
            track_peaks(row, gcc.grid, distance, DEFAULT_SPEED_OF_SOUND, fs)

    steps = {
        STEP_STFT: stft_step,
        STEP_XSPEC: xspec_step,
        STEP_GCC: gcc_step,
        STEP_FCC: fcc_step,
        STEP_INTERPOLATION: interpolation_step,
    } # type: Dict[str, Callable[[], None]]
    # One BLAS and FFT thread so that the steps are timed alike
    with threadpool_limits(limits=BENCH_THREADS), scipy.fft.set_workers(BENCH_THREADS):
        timings = {name: _mean_microseconds(step, repetitions, warmup)
            for name, step in steps.items()}
    return BenchReport(mics, n, r, k, repetitions, warmup, timings, BENCH_THREADS)

