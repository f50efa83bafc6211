"""Bit-packed GF(2) vectors and matrices.

This is the exact reference every analog simulation in the package is
checked against. Bits are packed LSB-first into little-endian 64-bit words;
padding bits past ``length`` are always zero.
"""

from __future__ import annotations

import os
from typing import Iterable, Union

import numpy as np

WORD_BITS = 64
_WORD = np.dtype("<u8")

FILE_MAGIC = "BMV1"


class DimensionError(ValueError):
    """Operand shapes do not agree."""


class BitFormatError(ValueError):
    """A BMV1 file could not be parsed."""


def _n_words(nbits: int) -> int:
    return (nbits + WORD_BITS - 1) // WORD_BITS


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., n) 0/1 array into (..., n_words) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    nw = _n_words(n)
    pad = nw * WORD_BITS - n
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    packed = np.ascontiguousarray(packed)
    return packed.view(_WORD).reshape(bits.shape[:-1] + (nw,))


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=_WORD)
    raw = words.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    return np.unpackbits(raw, axis=-1, bitorder="little")[..., :n]


def _as_bit_array(bits, ndim: int) -> np.ndarray:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    arr = np.asarray(bits)
    if arr.size == 0:
        if ndim == 2 and arr.ndim == 2:
            return np.zeros(arr.shape, np.uint8)
        return np.zeros((0,) * ndim, np.uint8)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-D bit array, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit arrays may only contain 0 and 1")
    return arr.astype(np.uint8)


class BitVector:
    """Immutable packed vector over GF(2)."""

    __slots__ = ("_length", "_words")

    def __init__(self, bits: Union[Iterable[int], str, np.ndarray] = ()):
        arr = _as_bit_array(bits, 1)
        self._length = int(arr.shape[0])
        self._words = _pack(arr)
        self._words.flags.writeable = False

    @classmethod
    def _from_words(cls, words: np.ndarray, length: int) -> "BitVector":
        obj = cls.__new__(cls)
        words = np.array(words, dtype=_WORD)
        rem = length % WORD_BITS
        if rem and words.size:
            words[-1] &= np.uint64((1 << rem) - 1)
        words.flags.writeable = False
        obj._length = length
        obj._words = words
        return obj

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(np.zeros(length, np.uint8))

    @classmethod
    def ones(cls, length: int) -> "BitVector":
        return cls(np.ones(length, np.uint8))

    @classmethod
    def random(cls, length: int, rng: np.random.Generator, density: float = 0.5) -> "BitVector":
        return cls((rng.random(length) < density).astype(np.uint8))

    @property
    def length(self) -> int:
        return self._length

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, j: int) -> int:
        if j < 0:
            j += self._length
        if not 0 <= j < self._length:
            raise IndexError(j)
        return int((int(self._words[j // WORD_BITS]) >> (j % WORD_BITS)) & 1)

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self._length)

    def __iter__(self):
        return iter(self.to_array().tolist())

    def popcount(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self._length != other._length:
            raise DimensionError(f"length {self._length} != {other._length}")
        return BitVector._from_words(self._words ^ other._words, self._length)

    def __and__(self, other: "BitVector") -> "BitVector":
        if self._length != other._length:
            raise DimensionError(f"length {self._length} != {other._length}")
        return BitVector._from_words(self._words & other._words, self._length)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._length == other._length and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 40:
            s = s[:37] + "..."
        return f"BitVector({self._length}, '{s}')"


class BitMatrix:
    """Immutable row-major packed matrix over GF(2)."""

    __slots__ = ("_rows", "_cols", "_words")

    def __init__(self, bits: Union[np.ndarray, Iterable[Iterable[int]]] = ()):
        arr = _as_bit_array(bits, 2)
        self._rows, self._cols = (int(s) for s in arr.shape)
        self._words = _pack(arr) if self._rows else np.zeros((0, _n_words(self._cols)), _WORD)
        self._words.flags.writeable = False

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator, density: float = 0.5) -> "BitMatrix":
        return cls((rng.random((rows, cols)) < density).astype(np.uint8))

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self._cols).reshape(self._rows, self._cols)

    def row(self, i: int) -> BitVector:
        return BitVector._from_words(self._words[i], self._cols)

    def column_slice(self, start: int, stop: int) -> "BitMatrix":
        return BitMatrix(self.to_array()[:, start:stop])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(ij)
        return int((int(self._words[i, j // WORD_BITS]) >> (j % WORD_BITS)) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols})"


def bmvm_exact(a: BitMatrix, x: BitVector) -> BitVector:
    """Exact y = A x over GF(2): AND for multiply, XOR for accumulate."""
    if x.length != a.cols:
        raise DimensionError(f"matrix has {a.cols} columns but vector has {x.length} bits")
    if a.rows == 0:
        return BitVector()
    counts = np.bitwise_count(a.words & x.words[np.newaxis, :]).sum(axis=1)
    return BitVector((counts & 1).astype(np.uint8))


def parity(x: BitVector) -> int:
    """Hamming weight of ``x`` modulo 2."""
    if x.length == 0:
        return 0
    folded = np.bitwise_xor.reduce(x.words)
    return int(np.bitwise_count(folded)) & 1


# -- BMV1 text files -------------------------------------------------------

def format_matrix(m: BitMatrix) -> str:
    lines = [f"{FILE_MAGIC} {m.rows} {m.cols}"]
    arr = m.to_array()
    lines.extend("".join("1" if b else "0" for b in row) for row in arr)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise BitFormatError("empty input, missing BMV1 header")
    header = lines[0].split()
    if len(header) != 3 or header[0] != FILE_MAGIC:
        raise BitFormatError(f"malformed header {lines[0]!r}")
    try:
        rows, cols = int(header[1]), int(header[2])
    except ValueError:
        raise BitFormatError(f"non-integer dimensions in header {lines[0]!r}") from None
    if rows < 0 or cols < 0:
        raise BitFormatError("negative dimensions")
    body = [ln.rstrip("\r") for ln in lines[1:]]
    if len(body) != rows:
        raise BitFormatError(f"header declares {rows} rows, found {len(body)}")
    nbits = sum(len(ln) for ln in body)
    if nbits != rows * cols:
        raise BitFormatError(f"header declares {rows}x{cols} = {rows * cols} bits, found {nbits}")
    arr = np.zeros((rows, cols), np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols:
            raise BitFormatError(f"row {i} has {len(ln)} bits, expected {cols}")
        if ln.strip("01"):
            raise BitFormatError(f"row {i} contains characters other than 0/1")
        if cols:
            arr[i] = np.frombuffer(ln.encode("ascii"), np.uint8) - ord("0")
    return BitMatrix(arr)


def store_matrix(m: BitMatrix, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix(m))


def load_matrix(path: Union[str, os.PathLike]) -> BitMatrix:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return parse_matrix(fh.read())


def store_vector(v: BitVector, path: Union[str, os.PathLike]) -> None:
    store_matrix(BitMatrix(v.to_array()[np.newaxis, :]), path)


def load_vector(path: Union[str, os.PathLike]) -> BitVector:
    m = load_matrix(path)
    if m.rows != 1:
        raise BitFormatError(f"vector files must declare 1 row, got {m.rows}")
    return m.row(0)
