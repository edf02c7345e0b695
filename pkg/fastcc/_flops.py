# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Closed-form floating point operation counts per frame and microphone pair."""

from dataclasses import dataclass
from typing import Iterable, List, Optional, TYPE_CHECKING
import numpy as np
from ._frontend import _is_power_of_two

if TYPE_CHECKING:
    import pandas

POWER_OF_TWO_MSG = "N and rN must be powers of two"
POSITIVE_COUNT_MSG = "K and I must be positive integers"

METHOD_GCC = "gcc"
METHOD_FCC = "fcc"
METHOD_DENSE = "dense"
METHOD_SVDPHAT = "svdphat"


def _validate_count(value: int) -> None:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValueError(POSITIVE_COUNT_MSG)


def _validate_frame_size(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 2 or not _is_power_of_two(int(n)):
        raise ValueError(POWER_OF_TWO_MSG)


def flops_gcc(n: int, r: int) -> int:
    """Inverse FFT of size rN: (5rN/2) log2(rN)."""
    _validate_frame_size(n)
    if not isinstance(r, (int, np.integer)) or r < 1 or not _is_power_of_two(int(r)):
        raise ValueError(POWER_OF_TWO_MSG)
    size = int(r) * int(n)
    return 5 * size * (size.bit_length() - 1) // 2


def flops_fcc(n: int, k: int, i: int) -> int:
    """Folding, projection and reconstruction: K(N+2) + N + I(4K-1)."""
    _validate_frame_size(n)
    _validate_count(k)
    _validate_count(i)
    return int(k * (n + 2) + n + i * (4 * k - 1))


def flops_dense(n: int, i: int) -> int:
    """Direct evaluation of 2Re{Wx}: I(4N+6)."""
    _validate_frame_size(n)
    _validate_count(i)
    return int(i * (4 * n + 6))


def flops_svdphat(n: int, k: int, i: int) -> int:
    """Low-rank product without folding: K(4N+6) + I(4K-1)."""
    _validate_frame_size(n)
    _validate_count(k)
    _validate_count(i)
    return int(k * (4 * n + 6) + i * (4 * k - 1))


def flop_ratio(n: int, r: int, k: int, i: int) -> float:
    """How many times fewer flops FCC with rank K needs than GCC with factor r."""
    return flops_gcc(n, r) / flops_fcc(n, k, i)


@dataclass(frozen=True)
class FlopReport:
    """One row of the flop table. `parameter` is r for GCC, K for the low-rank methods."""

    method: str
    parameter: Optional[int]
    flops: int

    @property
    def label(self) -> str:
        if self.parameter is None:
            return self.method
        return f"{self.method}:{self.parameter}"


def flop_reports(n: int = 512, i: int = 33, rs: Iterable[int] = (1, 2, 4),
        ks: Iterable[int] = range(1, 9), *, include_dense: bool = False) -> List[FlopReport]:
    ks = list(ks)
    reports = [FlopReport(METHOD_GCC, r, flops_gcc(n, r)) for r in rs]
    reports += [FlopReport(METHOD_FCC, k, flops_fcc(n, k, i)) for k in ks]
    if include_dense:
        reports.append(FlopReport(METHOD_DENSE, None, flops_dense(n, i)))
        reports += [FlopReport(METHOD_SVDPHAT, k, flops_svdphat(n, k, i)) for k in ks]
    return reports


def flop_table(n: int = 512, i: int = 33, rs: Iterable[int] = (1, 2, 4),
        ks: Iterable[int] = range(1, 9), *, include_dense: bool = False) -> "pandas.DataFrame":
    """The flop counts as a data frame with columns method, parameter and flops.

    Parameters:
    ---
    n : int, default 512
        Frame size.
    i : int, default 33
        Number of delay candidates.
    rs : iterable of int
        Interpolation factors for the GCC rows.
    ks : iterable of int
        Ranks for the FCC (and SVD-PHAT) rows.
    include_dense : bool, default False
        Also list the direct matrix product and the unfolded low-rank product.
    """
    import pandas

    reports = flop_reports(n, i, rs, ks, include_dense=include_dense)
    return pandas.DataFrame({
        "method": [rep.method for rep in reports],
        "parameter": pandas.array([rep.parameter for rep in reports], dtype="Int64"),
        "flops": [rep.flops for rep in reports],
    })
