# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Command-line interface: `fastcc bases|tdoa|simulate|flops|bench`.

Exit codes: 0 success, 1 usage, 2 input/output, 3 numeric or validation error.
"""

import argparse
import logging
import sys
from typing import Callable, List, NoReturn, Optional, Sequence, TextIO, Tuple, TYPE_CHECKING
from ._basis_file import BasisFileError, load_bases, save_bases
from ._benchmark import MIN_REPETITIONS, MIN_WARMUP, bench_pipeline
from ._crossspec import DEFAULT_ALPHA
from ._driver import estimate_tdoa, parse_method, tracks_to_frame
from ._fcc import DEFAULT_RANK, FccBases, build_w, decompose, relative_residual
from ._flops import flop_ratio, flop_table, flops_fcc, flops_gcc
from ._frontend import DEFAULT_FRAME_SIZE, DEFAULT_SAMPLE_RATE
from ._gcc import DEFAULT_DISTANCE, DEFAULT_INTERPOLATION, DEFAULT_SPEED_OF_SOUND,\
    MIN_SPEED_OF_SOUND, make_grid
from ._simulation import DEFAULT_CONVERGENCE, DEFAULT_DISTANCES, DEFAULT_METHODS,\
    ReverbConfig, mae_pivot, sweep
from ._wav import WavFormatError, read_wav

if TYPE_CHECKING:
    import pandas

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

TDOA_SCHEMA = "# fastcc-tdoa v1"
MAE_SCHEMA = "# fastcc-mae v1"
BENCH_SCHEMA = "# fastcc-bench v1"

PAIRS_MSG = "pairs must look like 0-1,0-2"
METHODS_MSG = "methods must look like gcc:2,fcc:8"
DISTANCE_RANGE_MSG = "every --d must be positive and at most --design-distance"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _int_at_least(minimum: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}: {text}")
        return value
    return parse


_positive_int = _int_at_least(1)


def _unit_float(text: str) -> float:
    value = _positive_float(text)
    if value > 1:
        raise argparse.ArgumentTypeError(f"must be at most 1: {text}")
    return value


def _pair_list(text: str) -> List[Tuple[int, int]]:
    pairs = []
    try:
        for item in text.split(","):
            left, right = item.split("-")
            pairs.append((int(left), int(right)))
    except ValueError:
        raise argparse.ArgumentTypeError(PAIRS_MSG) from None
    return pairs


def _method_list(text: str) -> List[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    try:
        for m in methods:
            parse_method(m)
    except ValueError:
        raise argparse.ArgumentTypeError(METHODS_MSG) from None
    if not methods:
        raise argparse.ArgumentTypeError(METHODS_MSG)
    return methods


def _write_csv(frame: "pandas.DataFrame", path: str, schema: str) -> None:
    with open(path, "w", newline="") as f:
        f.write(schema + "\n")
        frame.to_csv(f, index=False)


def _add_geometry(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=_positive_int, default=DEFAULT_FRAME_SIZE,
        help="frame size in samples (default: %(default)s)")
    parser.add_argument("--dist", type=_positive_float, default=DEFAULT_DISTANCE,
        help="microphone spacing in meters (default: %(default)s)")
    parser.add_argument("--cmin", type=_positive_float, default=MIN_SPEED_OF_SOUND,
        help="smallest speed of sound for the delay grid (default: %(default)s)")


def cmd_bases(args: argparse.Namespace, out: TextIO) -> int:
    grid = make_grid(args.dist, args.fs, args.cmin)
    steering = build_w(grid, args.n)
    bases = decompose(steering, args.k)
    save_bases(bases, args.out)

    print(f"I = {grid.size}", file=out)
    print(f"tau_max = {grid.tau_max_int}", file=out)
    print(f"K = {bases.k}", file=out)
    print(f"relative residual = {relative_residual(steering, bases):.6e}", file=out)
    print("singular values = " + " ".join(f"{s:.6g}" for s in bases.singulars), file=out)
    return EXIT_OK


def cmd_tdoa(args: argparse.Namespace, out: TextIO) -> int:
    clip = read_wav(args.input)

    method = args.method
    bases = None # type: Optional[FccBases]
    name, _, parameter = method.partition(":")
    if name.lower() == "fcc" and parameter and not parameter.isdigit():
        bases = load_bases(parameter)
        method = "fcc"

    tracks = estimate_tdoa(clip.samples, fs=clip.fs, distance=args.dist, method=method,
        bases=bases, n=args.n, alpha=args.alpha, c=args.c, c_min=args.cmin,
        pairs=args.pairs)
    frame = tracks_to_frame(tracks)
    _write_csv(frame, args.out, TDOA_SCHEMA)
    print(f"{len(frame)} rows written to {args.out}", file=out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    if any(d > args.design_distance for d in args.d):
        raise _UsageError(DISTANCE_RANGE_MSG)
    reverb = None
    if args.rt60 is not None:
        reverb = ReverbConfig(args.rt60, args.drr)

    table = sweep(args.d, args.methods, trials=args.trials, snr_db=args.snr,
        reverb=reverb, duration=args.duration, fs=args.fs, n=args.n, alpha=args.alpha,
        design_distance=args.design_distance, c_min=args.cmin, seed=args.seed,
        convergence=args.convergence)
    _write_csv(table, args.out, MAE_SCHEMA)

    print("MAE (degrees)", file=out)
    print(mae_pivot(table).to_string(float_format=lambda v: f"{v:.2f}"), file=out)
    return EXIT_OK


def cmd_flops(args: argparse.Namespace, out: TextIO) -> int:
    if args.table:
        table = flop_table(args.n, args.i, include_dense=True)
        print(table.to_string(index=False), file=out)
        return EXIT_OK

    print(f"gcc:{args.r} {flops_gcc(args.n, args.r)}", file=out)
    if args.k is not None:
        print(f"fcc:{args.k} {flops_fcc(args.n, args.k, args.i)}", file=out)
        print(f"ratio {flop_ratio(args.n, args.r, args.k, args.i):.2f}", file=out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    report = bench_pipeline(args.mics, n=args.n, r=args.r, k=args.k,
        repetitions=args.reps, warmup=args.warmup)
    print(report.to_text(), file=out, end="")
    if args.out is not None:
        _write_csv(report.to_frame().reset_index(), args.out, BENCH_SCHEMA)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fastcc",
        description="TDoA estimation with GCC-PHAT and fast cross-correlation (FCC).")
    parser.add_argument("-v", "--verbose", action="count", default=0,
        help="log progress (-v) or details (-vv)")
    commands = parser.add_subparsers(dest="command", required=True)

    bases = commands.add_parser("bases", help="build and save FCC bases")
    _add_geometry(bases)
    bases.add_argument("--fs", type=_positive_float, default=DEFAULT_SAMPLE_RATE)
    bases.add_argument("--k", type=_positive_int, default=DEFAULT_RANK)
    bases.add_argument("--out", required=True, help="basis file to write")
    bases.set_defaults(func=cmd_bases)

    tdoa = commands.add_parser("tdoa", help="estimate TDoA from a WAV file")
    tdoa.add_argument("--in", dest="input", required=True, help="WAV file, 2 or more channels")
    tdoa.add_argument("--pairs", type=_pair_list, default=None,
        help="channel pairs such as 0-1,0-2 (default: all)")
    tdoa.add_argument("--method", default=f"gcc:{DEFAULT_INTERPOLATION}",
        help="gcc:<r>, fcc:<K> or fcc:<basis file> (default: %(default)s)")
    tdoa.add_argument("--alpha", type=_unit_float, default=DEFAULT_ALPHA)
    tdoa.add_argument("--c", type=_positive_float, default=DEFAULT_SPEED_OF_SOUND,
        help="speed of sound for the angle (default: %(default)s)")
    _add_geometry(tdoa)
    tdoa.add_argument("--out", required=True, help="CSV file to write")
    tdoa.set_defaults(func=cmd_tdoa)

    simulate = commands.add_parser("simulate", help="accuracy sweep on synthetic scenes")
    simulate.add_argument("--d", type=_positive_float, nargs="+", default=list(DEFAULT_DISTANCES),
        help="microphone spacings in meters")
    simulate.add_argument("--methods", type=_method_list, default=list(DEFAULT_METHODS),
        help="comma-separated methods (default: gcc:2,fcc:8)")
    simulate.add_argument("--trials", type=_positive_int, default=50)
    simulate.add_argument("--snr", type=float, default=20.0, help="sensor SNR in dB")
    room = simulate.add_mutually_exclusive_group()
    room.add_argument("--anechoic", action="store_true", help="no reverberation (default)")
    room.add_argument("--rt60", type=_positive_float, default=None,
        help="add a synthetic reverberant tail with this RT60 in seconds")
    simulate.add_argument("--drr", type=float, default=0.0,
        help="direct-to-reverberant ratio in dB (default: %(default)s)")
    simulate.add_argument("--duration", type=_positive_float, default=1.0,
        help="scene length in seconds (default: %(default)s)")
    simulate.add_argument("--fs", type=_positive_float, default=DEFAULT_SAMPLE_RATE)
    simulate.add_argument("--n", type=_positive_int, default=DEFAULT_FRAME_SIZE)
    simulate.add_argument("--alpha", type=_unit_float, default=DEFAULT_ALPHA)
    simulate.add_argument("--design-distance", type=_positive_float, default=DEFAULT_DISTANCE,
        help="largest spacing the delay grid covers (default: %(default)s)")
    simulate.add_argument("--cmin", type=_positive_float, default=MIN_SPEED_OF_SOUND)
    simulate.add_argument("--convergence", type=_int_at_least(0), default=DEFAULT_CONVERGENCE)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", required=True, help="CSV file to write")
    simulate.set_defaults(func=cmd_simulate)

    flops = commands.add_parser("flops", help="print modeled flop counts")
    flops.add_argument("--n", type=_positive_int, default=DEFAULT_FRAME_SIZE)
    flops.add_argument("--r", type=_positive_int, default=DEFAULT_INTERPOLATION)
    flops.add_argument("--k", type=_positive_int, default=None)
    flops.add_argument("--i", type=_positive_int, default=33)
    flops.add_argument("--table", action="store_true", help="print the whole flop table")
    flops.set_defaults(func=cmd_flops)

    bench = commands.add_parser("bench", help="time the pipeline steps")
    bench.add_argument("--mics", type=_int_at_least(2), default=2)
    bench.add_argument("--reps", type=_int_at_least(MIN_REPETITIONS), default=1000)
    bench.add_argument("--warmup", type=_int_at_least(MIN_WARMUP), default=10)
    bench.add_argument("--n", type=_positive_int, default=DEFAULT_FRAME_SIZE)
    bench.add_argument("--r", type=_positive_int, default=DEFAULT_INTERPOLATION)
    bench.add_argument("--k", type=_positive_int, default=DEFAULT_RANK)
    bench.add_argument("--out", default=None, help="also write the table as CSV")
    bench.set_defaults(func=cmd_bench)

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """Run the command line; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.verbose)
    stream = out if out is not None else sys.stdout
    try:
        code = args.func(args, stream) # type: int
        return code
    except _UsageError as e:
        print(f"fastcc: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, BasisFileError, WavFormatError) as e:
        print(f"fastcc: error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as e:
        print(f"fastcc: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
