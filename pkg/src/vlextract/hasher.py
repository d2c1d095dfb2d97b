"""Seeded (k, eps) extractor back-end: Toeplitz hashing over GF(2).

Toeplitz matrices form a universal family, so by the leftover hash lemma
hashing a min-entropy-k source to ``k - 2 log2(1/eps)`` bits is eps-close to
uniform even given the seed. The seed is ``n + m - 1`` bits.
"""

from __future__ import annotations

import math
import secrets
from dataclasses import dataclass

import numpy as np

from .bits import BitSequence


@dataclass(frozen=True)
class ExtractorSpec:
    n: int
    m: int
    k: int
    eps: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("n and m must be positive")
        if self.m > self.n:
            raise ValueError(f"output length m={self.m} exceeds input length n={self.n}")

    @property
    def seed_length(self) -> int:
        return self.n + self.m - 1

    def lhl_ok(self) -> bool:
        """Whether m <= k - 2 log2(1/eps), the leftover-hash sufficiency condition."""
        slack = 0.0 if self.eps >= 1 else 2 * math.log2(1 / self.eps)
        return self.m <= self.k - slack + 1e-12


def plan_params(m: int, eps: float) -> tuple[int, float]:
    """Intermediate min-entropy ``k = m + 2 ceil(log2(1/eps))`` and ``alpha = (k - m)/m``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps >= 1:
        return m, 0.0
    k = m + 2 * math.ceil(math.log2(1 / eps) - 1e-12)
    return k, (k - m) / m


def toeplitz_matrix(seed, n: int, m: int) -> np.ndarray:
    seed = np.asarray(BitSequence(seed), dtype=np.uint8)
    if len(seed) != n + m - 1:
        raise ValueError(f"seed length {len(seed)} != n + m - 1 = {n + m - 1}")
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    return seed[i - j + n - 1]


def toeplitz_extract(z, seed) -> BitSequence:
    """``y_i = XOR_j seed[i - j + n - 1] * z_j`` for ``i < m``, ``j < n``."""
    z = BitSequence(z)
    seed = BitSequence(seed)
    n = len(z)
    m = len(seed) - n + 1
    if n < 1 or m < 1:
        raise ValueError(f"length mismatch: |z|={n}, |seed|={len(seed)}")
    A = toeplitz_matrix(seed, n, m)
    y = (A.astype(np.int64) @ np.asarray(z, dtype=np.int64)) & 1
    return BitSequence(y)


def draw_seed(spec: ExtractorSpec, rng: np.random.Generator | None = None, bits=None) -> BitSequence:
    """Explicit ``bits`` pass through (length-checked); else draw from ``rng`` or the OS."""
    if bits is not None:
        bits = BitSequence(bits)
        if len(bits) != spec.seed_length:
            raise ValueError(f"seed length: expected {spec.seed_length} bits, got {len(bits)}")
        return bits
    if rng is not None:
        return BitSequence(rng.integers(0, 2, size=spec.seed_length))
    v = secrets.randbits(spec.seed_length)
    return BitSequence.from_int(v, spec.seed_length)
