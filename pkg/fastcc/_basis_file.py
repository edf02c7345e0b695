# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Binary persistence of FCC bases.

Layout (little-endian):
    magic "FCCB", version u32, N u32, K u32, I u32, tau_max_int u32,
    delta f64, fs f64,
    singulars K x f64, parity K x u8, coeffs K x (N/4+1) x f64,
    dictionary I x K x (re f64, im f64),
    CRC32 u32 of every preceding byte.
"""

import os
import struct
from typing import Union
import zlib
import numpy as np
from ._fcc import FccBases, EVEN, ODD
from ._gcc import DelayGrid

PathLike = Union[str, "os.PathLike[str]"]

MAGIC = b"FCCB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdd")
_CRC = struct.Struct("<I")


class BasisFileError(ValueError):
    """The file cannot be read as FCC bases."""


class NotABasisFileError(BasisFileError):
    def __init__(self) -> None:
        super().__init__("not a basis file")


class BasisVersionError(BasisFileError):
    def __init__(self, version: int) -> None:
        super().__init__(f"unsupported basis file version {version} (expected {FORMAT_VERSION})")
        self.version = version


class TruncatedBasisFileError(BasisFileError):
    def __init__(self, expected: int, actual: int) -> None:
        super().__init__(f"basis file is truncated: expected {expected} bytes, found {actual}")


class BasisChecksumError(BasisFileError):
    def __init__(self) -> None:
        super().__init__("basis file checksum does not match its contents")


class BasisParityError(BasisFileError):
    def __init__(self, flag: int) -> None:
        super().__init__(f"parity flag {flag} is out of range (0 = even, 1 = odd)")


def _body_size(n: int, k: int, i: int) -> int:
    return 8 * k + k + 8 * k * (n // 4 + 1) + 16 * i * k


def encode_bases(bases: FccBases) -> bytes:
    grid = bases.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, bases.n, bases.k, grid.size,
        grid.tau_max_int, grid.delta, grid.fs)
    body = b"".join((
        bases.singulars.astype("<f8").tobytes(),
        bases.parity.astype("u1").tobytes(),
        np.ascontiguousarray(bases.coeffs, dtype="<f8").tobytes(),
        np.ascontiguousarray(bases.dictionary, dtype="<c16").tobytes(),
    ))
    payload = header + body
    return payload + _CRC.pack(zlib.crc32(payload))


def decode_bases(data: bytes) -> FccBases:
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise NotABasisFileError()
    if len(data) < _HEADER.size:
        raise TruncatedBasisFileError(_HEADER.size + _CRC.size, len(data))

    _, version, n, k, i, tau_max_int, delta, fs = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise BasisVersionError(version)

    expected = _HEADER.size + _body_size(n, k, i) + _CRC.size
    if len(data) < expected:
        raise TruncatedBasisFileError(expected, len(data))
    if len(data) > expected:
        raise BasisFileError(f"basis file has {len(data) - expected} bytes after the checksum")

    payload = data[:expected - _CRC.size]
    (checksum,) = _CRC.unpack_from(data, expected - _CRC.size)
    if zlib.crc32(payload) != checksum:
        raise BasisChecksumError()

    offset = _HEADER.size
    def take(dtype: str, count: int) -> np.ndarray:
        nonlocal offset
        array = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += array.nbytes
        return array.astype(dtype.replace("<", "="))

    singulars = take("<f8", k)
    parity = take("u1", k)
    for flag in parity:
        if flag not in (EVEN, ODD):
            raise BasisParityError(int(flag))
    coeffs = take("<f8", k * (n // 4 + 1)).reshape(k, n // 4 + 1)
    dictionary = take("<c16", i * k).reshape(i, k)

    # Header fields are only checked here, after the CRC matched
    try:
        grid = DelayGrid(tau_max_int, delta, fs)
        if grid.size != i:
            raise ValueError(f"header lists {i} candidates but the grid has {grid.size}")
        return FccBases(n, grid, coeffs, parity, dictionary, singulars)
    except ValueError as e:
        raise BasisFileError(str(e)) from e


def save_bases(bases: FccBases, path: PathLike) -> None:
    """Write `bases` to `path`; `load_bases` restores them bit for bit."""
    with open(path, "wb") as f:
        f.write(encode_bases(bases))


def load_bases(path: PathLike) -> FccBases:
    """Read bases written by `save_bases`.

    Raises a `BasisFileError` (or a subclass) for a wrong magic, version,
    size, checksum or parity flag, and for header fields or arrays that do
    not form valid bases.
    """
    with open(path, "rb") as f:
        return decode_bases(f.read())
