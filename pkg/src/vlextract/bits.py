"""Bit sequences and MSB-first bit streams over bytes.

Every module in the package exchanges data as :class:`BitSequence`. Bytes are
always read and written most-significant-bit first; a trailing partial byte is
zero-padded on the right and the true bit count travels separately.
"""

from __future__ import annotations

import io
from typing import BinaryIO, Iterable


class EndOfStream(EOFError):
    """Raised when a consumer needs more bits than the stream holds."""


class BitSequence(tuple):
    """Immutable sequence of 0/1 ints.

    Accepts an iterable of ints/bools or a string of ``'0'``/``'1'`` characters
    (whitespace and underscores are ignored).
    """

    __slots__ = ()

    def __new__(cls, bits: Iterable[int] | str = ()):
        if isinstance(bits, BitSequence):
            return bits
        if isinstance(bits, str):
            chars = [c for c in bits if c not in " _\t\n"]
            if any(c not in "01" for c in chars):
                raise ValueError(f"not a bit string: {bits!r}")
            return super().__new__(cls, (1 if c == "1" else 0 for c in chars))
        seq = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in seq):
            raise ValueError("bits must be 0 or 1")
        return super().__new__(cls, seq)

    @property
    def length(self) -> int:
        return len(self)

    def ones(self) -> int:
        return sum(self)

    def zeros(self) -> int:
        return len(self) - sum(self)

    def to_int(self) -> int:
        """Value of the sequence read as an MSB-first binary number."""
        v = 0
        for b in self:
            v = (v << 1) | b
        return v

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitSequence":
        if value < 0 or value >> width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls((value >> (width - 1 - i)) & 1 for i in range(width))

    def complement(self) -> "BitSequence":
        return BitSequence(1 - b for b in self)

    def __getitem__(self, item):
        r = super().__getitem__(item)
        return BitSequence(r) if isinstance(item, slice) else r

    def __add__(self, other) -> "BitSequence":
        return BitSequence(tuple(self) + tuple(BitSequence(other)))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def __repr__(self) -> str:
        return f"BitSequence('{self}')"


def pack(bits: Iterable[int] | str) -> tuple[bytes, int]:
    """Pack bits MSB-first into bytes; returns ``(data, bit_count)``."""
    bits = BitSequence(bits)
    out = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b:
            out[i >> 3] |= 0x80 >> (i & 7)
    return bytes(out), len(bits)


def unpack(data: bytes, bit_count: int | None = None) -> BitSequence:
    """Inverse of :func:`pack`. ``bit_count`` defaults to ``8 * len(data)``."""
    if bit_count is None:
        bit_count = 8 * len(data)
    if bit_count > 8 * len(data) or bit_count < 0:
        raise ValueError(f"bit_count {bit_count} out of range for {len(data)} bytes")
    return BitSequence((data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(bit_count))


def hex_to_bits(text: str, bit_count: int) -> BitSequence:
    """Parse MSB-first hex text into exactly ``bit_count`` bits.

    The text must have exactly ``ceil(bit_count / 4)`` digits and any padding
    bits past ``bit_count`` must be zero.
    """
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    need = (bit_count + 3) // 4
    if len(text) != need:
        raise ValueError(f"seed length: expected {need} hex digits for {bit_count} bits, got {len(text)}")
    value = int(text, 16) if text else 0
    pad = 4 * need - bit_count
    if value & ((1 << pad) - 1):
        raise ValueError("seed length: nonzero padding bits after the last seed bit")
    return BitSequence.from_int(value >> pad, bit_count)


def bits_to_hex(bits: Iterable[int]) -> str:
    bits = BitSequence(bits)
    pad = (-len(bits)) % 4
    width = (len(bits) + pad) // 4
    if width == 0:
        return ""
    return format((bits + "0" * pad).to_int(), f"0{width}x")


class BitReader:
    """Single-consumer MSB-first bit cursor over a binary stream.

    ``bit_limit`` caps the number of readable bits, so a packed buffer with a
    zero-padded tail can be replayed exactly.
    """

    def __init__(self, stream: BinaryIO, bit_limit: int | None = None):
        self._stream = stream
        self._byte = 0
        self._left = 0
        self.position = 0
        self.bit_limit = bit_limit

    @classmethod
    def from_bytes(cls, data: bytes, bit_limit: int | None = None) -> "BitReader":
        return cls(io.BytesIO(data), bit_limit)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | str) -> "BitReader":
        data, n = pack(bits)
        return cls(io.BytesIO(data), n)

    def read_bit(self) -> int | None:
        """Next bit, or ``None`` at end of stream."""
        if self.bit_limit is not None and self.position >= self.bit_limit:
            return None
        if self._left == 0:
            chunk = self._stream.read(1)
            if not chunk:
                return None
            self._byte = chunk[0]
            self._left = 8
        self._left -= 1
        self.position += 1
        return (self._byte >> self._left) & 1

    def read_bits(self, count: int) -> BitSequence:
        """Exactly ``count`` bits; raises :class:`EndOfStream` if fewer remain."""
        out = []
        for _ in range(count):
            b = self.read_bit()
            if b is None:
                raise EndOfStream(f"stream ended after {self.position} bits, needed {count - len(out)} more")
            out.append(b)
        return BitSequence(out)

    def require_bit(self) -> int:
        b = self.read_bit()
        if b is None:
            raise EndOfStream(f"stream ended after {self.position} bits")
        return b


class BitWriter:
    """Accumulates bits and flushes whole bytes MSB-first to a binary stream."""

    def __init__(self, stream: BinaryIO):
        self._stream = stream
        self._acc = 0
        self._filled = 0
        self.count = 0

    def write_bits(self, bits: Iterable[int] | str) -> None:
        for b in BitSequence(bits):
            self._acc = (self._acc << 1) | b
            self._filled += 1
            self.count += 1
            if self._filled == 8:
                self._stream.write(bytes((self._acc,)))
                self._acc = 0
                self._filled = 0

    def flush(self) -> None:
        if self._filled:
            self._stream.write(bytes((self._acc << (8 - self._filled),)))
            self._acc = 0
            self._filled = 0
        self._stream.flush()
