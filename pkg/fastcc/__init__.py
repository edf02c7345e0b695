# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Time difference of arrival estimation with GCC-PHAT and fast cross-correlation."""

from ._basis_file import BasisFileError, NotABasisFileError, BasisVersionError,\
    TruncatedBasisFileError, BasisChecksumError, BasisParityError, load_bases, save_bases
from ._benchmark import BenchReport, bench_pipeline
from ._crossspec import CrossSpectrum, phat, smooth_cross_spectrum
from ._driver import estimate_tdoa, make_correlator, parse_method, tracks_to_frame
from ._fcc import FccBases, FccCorrelator, FoldedInput, RankError, SteeringMatrix,\
    attainable_rank, build_w, decompose, dense_correlate, fcc_correlate, fold_input,\
    parity_residual, relative_residual, unfold_projection
from ._flops import FlopReport, flop_ratio, flop_table, flops_dense, flops_fcc,\
    flops_gcc, flops_svdphat
from ._frontend import FrameConfig, SpectrumFrame, StftStream, hann_window, irfft, rfft, stft
from ._gcc import DelayGrid, GccCorrelator, gcc_correlate, lag_to_index, make_grid
from ._peak import TdoaEstimate, TdoaTrack, argmax_delay, delay_to_angle, estimate_peak,\
    mae, refine_quadratic, track_peaks
from ._simulation import ReverbConfig, SimConfig, TrialResult, mae_pivot, run_trial,\
    sweep, synth_pair, true_delay
from ._wav import WavClip, WavFormatError, read_wav

__all__ = [
    "BasisChecksumError", "BasisFileError", "BasisParityError", "BasisVersionError",
    "BenchReport", "CrossSpectrum", "DelayGrid", "FccBases", "FccCorrelator",
    "FlopReport", "FoldedInput", "FrameConfig", "GccCorrelator", "NotABasisFileError",
    "RankError", "ReverbConfig", "SimConfig", "SpectrumFrame", "SteeringMatrix",
    "StftStream", "TdoaEstimate", "TdoaTrack", "TrialResult", "TruncatedBasisFileError",
    "WavClip", "WavFormatError",
    "argmax_delay", "attainable_rank", "bench_pipeline", "build_w", "decompose",
    "delay_to_angle", "dense_correlate", "estimate_peak", "estimate_tdoa",
    "fcc_correlate", "flop_ratio", "flop_table", "flops_dense", "flops_fcc",
    "flops_gcc", "flops_svdphat", "fold_input", "gcc_correlate", "hann_window",
    "irfft", "lag_to_index", "load_bases", "mae", "mae_pivot", "make_correlator",
    "make_grid", "parity_residual", "parse_method", "phat", "read_wav",
    "refine_quadratic", "relative_residual", "rfft", "run_trial", "save_bases",
    "smooth_cross_spectrum", "stft", "sweep", "synth_pair", "track_peaks",
    "tracks_to_frame", "true_delay", "unfold_projection",
]
