"""Exact permutation ranking for binary strings and the LZ78 phrase table."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator

from .bits import BitReader, BitSequence, EndOfStream


@lru_cache(maxsize=1 << 16)
def binom(n: int, k: int) -> int:
    if k < 0 or k > n or n < 0:
        return 0
    return comb(n, k)


@dataclass(frozen=True)
class RankValue:
    value: int
    width: int

    def __post_init__(self):
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"rank {self.value} does not fit in {self.width} bits")

    def bits(self) -> BitSequence:
        return BitSequence.from_int(self.value, self.width)


def rank(x: Iterable[int] | str) -> int:
    """Lexicographic rank (0 < 1) of ``x`` among strings with its length and weight."""
    x = BitSequence(x)
    n = len(x)
    ones = x.ones()
    r = 0
    for i, b in enumerate(x):
        if b:
            # every string with a 0 here and the same prefix sorts first
            r += binom(n - i - 1, ones)
            ones -= 1
    return r


def unrank(length: int, ones: int, r: int) -> BitSequence:
    total = binom(length, ones)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} out of range [0, {total}) for C({length},{ones})")
    out = []
    for i in range(length):
        below = binom(length - i - 1, ones)
        if ones and r >= below:
            out.append(1)
            r -= below
            ones -= 1
        else:
            out.append(0)
    return BitSequence(out)


@dataclass
class PhraseTable:
    """LZ78 dictionary. Index 0 is the empty phrase; real phrases count from 1."""

    phrases: list = field(default_factory=list)
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {(): 0}
        for i, p in enumerate(self.phrases, start=1):
            self.index[tuple(p)] = i
        self.phrases = [BitSequence(p) for p in self.phrases]

    def __len__(self) -> int:
        return len(self.phrases)

    def __contains__(self, phrase) -> bool:
        return tuple(BitSequence(phrase)) in self.index

    def add(self, phrase: BitSequence) -> int:
        key = tuple(phrase)
        if key in self.index:
            raise ValueError(f"phrase {phrase} already present")
        if key[:-1] not in self.index:
            raise ValueError(f"prefix of {phrase} is not a phrase")
        self.phrases.append(BitSequence(phrase))
        self.index[key] = len(self.phrases)
        return len(self.phrases)

    def copy(self) -> "PhraseTable":
        return PhraseTable(list(self.phrases))


def lz_insert(table: PhraseTable, reader: BitReader) -> tuple[int, int]:
    """Consume the shortest unseen phrase from ``reader`` and register it.

    Returns ``(index of the phrase minus its last bit, last bit)``.
    """
    cur: tuple = ()
    while True:
        b = reader.read_bit()
        if b is None:
            raise EndOfStream(f"stream ended mid-phrase after {reader.position} bits")
        nxt = cur + (b,)
        if nxt not in table.index:
            prefix_index = table.index[cur]
            table.add(BitSequence(nxt))
            return prefix_index, b
        cur = nxt


def lz_decode(codes: Iterable[tuple[int, int]]) -> Iterator[BitSequence]:
    """Replay ``(prefix index, last bit)`` codes back into phrases."""
    phrases = [BitSequence()]
    for idx, bit in codes:
        if not 0 <= idx < len(phrases):
            raise ValueError(f"code refers to unknown phrase {idx}")
        p = phrases[idx] + (bit,)
        phrases.append(p)
        yield p
