# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Fast cross-correlation: low-rank, symmetry-folded steering decomposition.

Offline, the steering matrix W (one row exp(j2πfτ/N) per candidate delay)
is factored as W ≈ D P with K bases. Every basis p(k) is either even and
real or odd and purely imaginary about bin N/4, so only its first N/4+1
coefficients are stored. Online, the PHAT vector is folded into sums and
differences of mirrored bins, projected on the stored coefficients and
mapped back to the delay grid with y = 2Re{Dz}.
"""

from dataclasses import dataclass
import logging
from typing import List, Tuple
from warnings import warn
import numpy as np
import scipy.linalg
from ._gcc import DelayGrid, _frame_size_from_bins

logger = logging.getLogger(__name__)

DEFAULT_RANK = 8
EVEN = 0
ODD = 1

RANK_TOLERANCE = 1e-10
PARITY_TOLERANCE = 1e-10
DEGENERATE_RTOL = 1e-12

FRAME_SIZE_MSG = "frame size must be a power of two and at least 4"
RANK_POSITIVE_MSG = "K must be at least one"
FOLD_LENGTH_MSG = "input length must be N/2+1 for a power-of-two N of at least 4"
DIMENSION_MSG = "folded input does not match the bases"
SPECTRUM_LENGTH_MSG = "PHAT vector length does not match the bases"
PARITY_FLAG_MSG = "parity flags must be 0 (even) or 1 (odd)"
ODD_MIDDLE_MSG = "odd bases must have a zero middle coefficient"
SINGULAR_ORDER_MSG = "singular values must be non-negative and descending"
SHAPE_MSG = "basis arrays have inconsistent shapes"


class RankError(ValueError):
    """The requested rank exceeds what the steering matrix supports."""

    def __init__(self, requested: int, attainable: int) -> None:
        super().__init__(f"K={requested} exceeds the attainable rank {attainable}")
        self.requested = requested
        self.attainable = attainable


@dataclass(frozen=True)
class SteeringMatrix:
    """W[i, f] = exp(j2πf τ_i / N) for f = 0..N/2."""

    w: np.ndarray
    grid: DelayGrid
    n: int


@dataclass(frozen=True, eq=False)
class FccBases:
    """The stored decomposition.

    coeffs:     (K, N/4+1) real, the first half of each basis row of P
    parity:     (K,) uint8, 0 = even and real, 1 = odd and imaginary
    dictionary: (I, K) complex; the factor j of odd bases is folded in
    singulars:  (K,) descending
    """

    n: int
    grid: DelayGrid
    coeffs: np.ndarray
    parity: np.ndarray
    dictionary: np.ndarray
    singulars: np.ndarray

    def __post_init__(self) -> None:
        _validate_fcc_frame_size(self.n)
        k = self.singulars.shape[0] if self.singulars.ndim == 1 else -1
        if k < 1:
            raise ValueError(RANK_POSITIVE_MSG)
        if (self.coeffs.shape != (k, self.n // 4 + 1)
                or self.parity.shape != (k,)
                or self.dictionary.shape != (self.grid.size, k)):
            raise ValueError(SHAPE_MSG)
        if not np.all((self.parity == EVEN) | (self.parity == ODD)):
            raise ValueError(PARITY_FLAG_MSG)
        if np.any(self.coeffs[self.parity == ODD, -1] != 0):
            raise ValueError(ODD_MIDDLE_MSG)
        if np.any(self.singulars < 0) or np.any(np.diff(self.singulars) > 0):
            raise ValueError(SINGULAR_ORDER_MSG)

    @property
    def k(self) -> int:
        return int(self.singulars.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FccBases):
            return NotImplemented
        return (self.n == other.n and self.grid == other.grid
            and np.array_equal(self.coeffs, other.coeffs)
            and np.array_equal(self.parity, other.parity)
            and np.array_equal(self.dictionary, other.dictionary)
            and np.array_equal(self.singulars, other.singulars))


@dataclass(frozen=True)
class FoldedInput:
    """x_add[m] = x[m] + x[N/2-m], x_sub[m] = x[m] - x[N/2-m]; the middle bin stands alone."""

    add: np.ndarray
    sub: np.ndarray


def _validate_fcc_frame_size(n: int) -> None:
    # Folding needs the middle bin N/4 to exist
    if n < 4:
        raise ValueError(FRAME_SIZE_MSG)
    _frame_size_from_bins(n // 2 + 1)


def build_w(grid: DelayGrid, n: int) -> SteeringMatrix:
    _frame_size_from_bins(n // 2 + 1)
    f = np.arange(n // 2 + 1)
    w = np.exp(2j * np.pi * np.outer(grid.taus, f) / n)
    return SteeringMatrix(w, grid, n)


def dense_correlate(steering: SteeringMatrix, x: np.ndarray) -> np.ndarray:
    """Evaluate y = 2Re{Wx} directly, I(4N+6) flops per frame."""
    return 2 * np.real(np.asarray(x) @ steering.w.T)


def _half_weights(q: int) -> np.ndarray:
    # Bins 0..N/4-1 appear twice in the full row, the middle bin once
    weights = np.full(q + 1, 2.0)
    weights[q] = 1.0
    return weights


def _symmetric_blocks(steering: SteeringMatrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split W into its even-real and odd-imaginary halves.

    With c_i = W[i, N/4], the rows of conj(c_i) W[i, :] are
    cos(2π(f - N/4)τ_i/N) + j sin(2π(f - N/4)τ_i/N): an even real part and
    an odd imaginary part about bin N/4. Returns the weighted half-length
    even block (I, N/4+1), the weighted odd block (I, N/4), and c.
    """
    q = steering.n // 4
    centre = steering.w[:, q]
    rotated = steering.w * np.conj(centre)[:, None]

    even_block = rotated.real[:, :q + 1] * np.sqrt(_half_weights(q))
    odd_block = rotated.imag[:, :q] * np.sqrt(2.0)
    return even_block, odd_block, centre


def _block_svd(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    u, s, vt = scipy.linalg.svd(block, full_matrices=False, lapack_driver="gesvd")
    return u, s, vt


def _merged_order(even_s: np.ndarray, odd_s: np.ndarray) -> List[Tuple[float, int, int]]:
    """(singular value, parity, index within block), descending; ties put even first."""
    entries = [(float(s), EVEN, i) for i, s in enumerate(even_s)]
    entries += [(float(s), ODD, i) for i, s in enumerate(odd_s)]
    entries.sort(key=lambda e: (-e[0], e[1], e[2]))
    return entries


def _attainable(entries: List[Tuple[float, int, int]]) -> int:
    if not entries:
        return 0
    largest = entries[0][0]
    return sum(1 for e in entries if e[0] > RANK_TOLERANCE * largest)


def attainable_rank(steering: SteeringMatrix) -> int:
    """Numerical rank of W: singular values above 1e-10 times the largest."""
    _validate_fcc_frame_size(steering.n)
    even_block, odd_block, _ = _symmetric_blocks(steering)
    even_s = scipy.linalg.svdvals(even_block)
    odd_s = scipy.linalg.svdvals(odd_block)
    return _attainable(_merged_order(even_s, odd_s))


def decompose(steering: SteeringMatrix, k: int = DEFAULT_RANK) -> FccBases:
    """Factor W into K folded bases and a dictionary.

    The even and odd halves of W are decomposed separately. Their left
    singular vectors are even and odd functions of τ on the symmetric
    grid, so the two decompositions together form the SVD of W, and
    keeping the K largest singular values of the merged list is the best
    rank-K approximation of W.

    Each basis is scaled so that its largest-magnitude coefficient is
    positive (real for even bases, imaginary for odd ones).

    Raises RankError if K exceeds the attainable rank.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise TypeError("K must be int")
    if k < 1:
        raise ValueError(RANK_POSITIVE_MSG)
    _validate_fcc_frame_size(steering.n)

    q = steering.n // 4
    even_block, odd_block, centre = _symmetric_blocks(steering)
    blocks = {
        EVEN: _block_svd(even_block),
        ODD: _block_svd(odd_block),
    }
    entries = _merged_order(blocks[EVEN][1], blocks[ODD][1])
    rank = _attainable(entries)
    if k > rank:
        raise RankError(k, rank)

    _warn_if_degenerate([e[0] for e in entries[:k]])

    half_scale = {EVEN: 1.0 / np.sqrt(_half_weights(q)), ODD: np.full(q, 1.0 / np.sqrt(2.0))}
    coeffs = np.zeros((k, q + 1))
    parity = np.zeros(k, dtype=np.uint8)
    dictionary = np.zeros((steering.grid.size, k), dtype=np.complex128)
    singulars = np.zeros(k)

    for row, (s, kind, index) in enumerate(entries[:k]):
        u, _, vt = blocks[kind]
        half = vt[index] * half_scale[kind]
        left = u[:, index]

        peak = int(np.argmax(np.abs(half)))
        if half[peak] < 0:
            half = -half
            left = -left

        coeffs[row, :half.size] = s * half
        parity[row] = kind
        dictionary[:, row] = centre * left * (1j if kind == ODD else 1.0)
        singulars[row] = s

    bases = FccBases(steering.n, steering.grid, coeffs, parity, dictionary, singulars)

    residual = parity_residual(bases)
    if residual > PARITY_TOLERANCE:
        raise ArithmeticError(f"basis parity residual {residual:.3g} exceeds tolerance")
    logger.info("decomposed W (I=%d, N=%d): K=%d of attainable rank %d, "
        "relative Frobenius residual %.3e",
        steering.grid.size, steering.n, k, rank, relative_residual(steering, bases))
    return bases


def _warn_if_degenerate(singulars: List[float]) -> None:
    for a, b in zip(singulars, singulars[1:]):
        if abs(a - b) <= DEGENERATE_RTOL * max(a, b):
            warn("The steering matrix has repeated singular values;" +
                " bases with equal energy are ordered even before odd.", UserWarning)
            return


def unfold_projection(bases: FccBases) -> np.ndarray:
    """The full complex projection matrix P, shape (K, N/2+1)."""
    q = bases.n // 4
    p = np.zeros((bases.k, 2 * q + 1), dtype=np.complex128)
    for row in range(bases.k):
        half = bases.coeffs[row]
        if bases.parity[row] == EVEN:
            p[row, :q + 1] = half
            p[row, q:] = half[::-1]
        else:
            p[row, :q + 1] = 1j * half
            p[row, q + 1:] = -1j * half[:q][::-1]
    return p


def _unfolded_dictionary(bases: FccBases) -> np.ndarray:
    # The stored dictionary carries j for odd bases; take it back out
    # so that D P matches W
    factors = np.where(bases.parity == ODD, -1j, 1.0)
    return bases.dictionary * factors[None, :]


def relative_residual(steering: SteeringMatrix, bases: FccBases) -> float:
    """‖W - DP‖_F / ‖W‖_F."""
    approx = _unfolded_dictionary(bases) @ unfold_projection(bases)
    return float(np.linalg.norm(steering.w - approx) / np.linalg.norm(steering.w))


def parity_residual(bases: FccBases) -> float:
    """Largest deviation of the unfolded P from exact even-real/odd-imaginary symmetry."""
    p = unfold_projection(bases)
    mirrored = p[:, ::-1]
    even = bases.parity == EVEN
    residuals = [
        np.abs(p[even] - mirrored[even]),
        np.abs(p[even].imag),
        np.abs(p[~even] + mirrored[~even]),
        np.abs(p[~even].real),
    ]
    return float(max((np.max(r) if r.size else 0.0) for r in residuals))


def fold_input(x: np.ndarray) -> FoldedInput:
    """Fold a PHAT vector (or a stack of them) into x_add and x_sub, N real flops."""
    x = np.asarray(x, dtype=np.complex128)
    n = 2 * (x.shape[-1] - 1)
    if n < 4:
        raise ValueError(FOLD_LENGTH_MSG)
    try:
        _validate_fcc_frame_size(n)
    except ValueError:
        raise ValueError(FOLD_LENGTH_MSG) from None

    q = n // 4
    head = x[..., :q + 1]
    mirror = x[..., ::-1][..., :q + 1]
    add = head + mirror
    sub = head - mirror
    add[..., q] = x[..., q]
    sub[..., q] = x[..., q]
    return FoldedInput(add, sub)


def _as_pairs(x: np.ndarray) -> np.ndarray:
    """View complex (..., m) as real (..., 2, m) holding real and imaginary rows."""
    pairs = np.ascontiguousarray(x, dtype=np.complex128).view(np.float64)
    return np.swapaxes(pairs.reshape(x.shape + (2,)), -1, -2)


class FccCorrelator:
    """Online FCC path for one set of bases.

    Calling the object with a PHAT vector folds it on a real view of the
    input and projects the sums and differences of mirrored bins with
    precomputed real matrices. One frame costs two real products for z
    and two for y = 2Re{Dz}; the input is checked for length only.
    """

    def __init__(self, bases: FccBases) -> None:
        self.bases = bases
        self.grid = bases.grid
        self.n = bases.n

        q = bases.n // 4
        self._bins = 2 * q + 1
        self._head = np.s_[..., :q + 1, :]
        self._mirror = np.s_[..., :q - 1:-1, :]

        even = np.flatnonzero(bases.parity == EVEN)
        odd = np.flatnonzero(bases.parity == ODD)
        self._even_t = np.ascontiguousarray(bases.coeffs[even].T)
        self._odd_t = np.ascontiguousarray(bases.coeffs[odd].T)

        # Folding the raw spectrum adds the middle bin to itself
        self._even_mirrored_t = self._even_t.copy()
        self._even_mirrored_t[q] *= 0.5

        # z is laid out as [Re z; Im z] for each parity block
        d_even = bases.dictionary[:, even]
        d_odd = bases.dictionary[:, odd]
        self._mix_even = np.concatenate((2 * d_even.real.T, -2 * d_even.imag.T))
        self._mix_odd = np.concatenate((2 * d_odd.real.T, -2 * d_odd.imag.T))

    def _project(self, add: np.ndarray, sub: np.ndarray, even_t: np.ndarray) -> np.ndarray:
        # add and sub are real (..., 2, N/4+1) with real and imaginary rows.
        # Real scalar times complex sample accumulation, K(N+2) flops
        z_even = add @ even_t
        z_odd = sub @ self._odd_t

        # y = 2Re{Dz}, I(4K-1) flops
        lead = z_even.shape[:-2]
        return (z_even.reshape(lead + (self._mix_even.shape[0],)) @ self._mix_even
            + z_odd.reshape(lead + (self._mix_odd.shape[0],)) @ self._mix_odd)

    def correlate_folded(self, folded: FoldedInput) -> np.ndarray:
        q = self.n // 4
        if folded.add.shape[-1] != q + 1 or folded.sub.shape[-1] != q + 1:
            raise ValueError(DIMENSION_MSG)
        return self._project(_as_pairs(folded.add), _as_pairs(folded.sub), self._even_t)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.complex128)
        if x.shape[-1] != self._bins:
            raise ValueError(SPECTRUM_LENGTH_MSG)

        pairs = x.view(np.float64).reshape(x.shape + (2,))
        head = pairs[self._head]
        mirror = pairs[self._mirror]
        add = np.swapaxes(head + mirror, -1, -2)
        sub = np.swapaxes(head - mirror, -1, -2)
        return self._project(add, sub, self._even_mirrored_t)


def fcc_correlate(bases: FccBases, folded: FoldedInput) -> np.ndarray:
    """Cross-correlation on the bases' grid from a folded PHAT vector."""
    return FccCorrelator(bases).correlate_folded(folded)
