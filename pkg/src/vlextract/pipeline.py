"""Seeded variable-length extractor (stopping rule then Toeplitz hash) and the
seedless cascade that first extracts its own seed from independent blocks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .bits import BitReader, BitSequence
from .frontends import EncodedBlock, Frontend, ThresholdPlan
from .hasher import ExtractorSpec, draw_seed, toeplitz_extract
from .models import SourceModel

log = logging.getLogger(__name__)


@dataclass
class SeededVLX:
    frontend: Frontend
    spec: ExtractorSpec
    seed: BitSequence | None = None

    def __post_init__(self):
        if self.frontend.n != self.spec.n:
            raise ValueError(f"frontend block length {self.frontend.n} != extractor input length {self.spec.n}")
        if self.frontend.plan.k != self.spec.k:
            raise ValueError("frontend min-entropy claim differs from extractor k")
        if self.seed is not None:
            self.seed = draw_seed(self.spec, bits=self.seed)

    @property
    def plan(self) -> ThresholdPlan:
        return self.frontend.plan

    def with_seed(self, seed) -> "SeededVLX":
        return replace(self, seed=draw_seed(self.spec, bits=seed))


def build_vlx(kind: str, plan: ThresholdPlan, model: SourceModel | None = None, seed=None,
              rng: np.random.Generator | None = None, length_cap: int = 1 << 14) -> SeededVLX:
    """Bind a stopping rule to a Toeplitz extractor sized for its block length.

    ``seed`` may be explicit bits, ``"os"`` for the platform randomness
    service, or ``None`` (drawn from ``rng`` if given, else left unset).
    """
    fe = Frontend(kind, plan, model, length_cap)
    spec = ExtractorSpec(fe.n, plan.m, plan.k, plan.eps)
    if isinstance(seed, str) and seed == "os":
        seed = draw_seed(spec)
    elif seed is None and rng is not None:
        seed = draw_seed(spec, rng)
    return SeededVLX(fe, spec, seed)


@dataclass(frozen=True)
class Extraction:
    output: BitSequence
    consumed: int
    block: EncodedBlock | None = None


def extract_seeded(vlx: SeededVLX, reader: BitReader) -> Extraction:
    if vlx.seed is None:
        raise ValueError("seeded extraction needs a seed")
    outcome = vlx.frontend.stop(reader)
    y = toeplitz_extract(outcome.block.z, vlx.seed)
    return Extraction(y, outcome.consumed, outcome.block)


# -- seedless cascade ---------------------------------------------------------


@dataclass(frozen=True)
class BlockPlan:
    """Seed-generation layout: ``gamma`` blocks of ``a - 1`` bits, paired up."""

    a: int
    gamma: int
    k_d: float = 0.0
    d: int | None = None

    def __post_init__(self):
        if self.a < 2:
            raise ValueError("block length a must be at least 2")
        if self.gamma < 2:
            raise ValueError("gamma must be at least 2")
        if self.d is not None and self.d > self.gamma // 2:
            raise ValueError(f"d = {self.d} exceeds the {self.gamma // 2} available block pairs")

    @property
    def block_bits(self) -> int:
        return self.a - 1

    @property
    def seed_bits(self) -> int:
        return self.gamma // 2 if self.d is None else self.d

    @property
    def overhead(self) -> int:
        return self.gamma * (self.a - 1)


def inner_product(x, y) -> int:
    """GF(2) inner product of equal-length bit strings."""
    x, y = BitSequence(x), BitSequence(y)
    if len(x) != len(y):
        raise ValueError("inner product needs equal lengths")
    return sum(a & b for a, b in zip(x, y)) & 1


def fit_block_plan(plan: BlockPlan, seed_length: int) -> BlockPlan:
    """Grow ``gamma`` so the pairs cover ``seed_length`` seed bits."""
    if plan.seed_bits >= seed_length:
        return replace(plan, d=seed_length)
    gamma = 2 * seed_length
    log.info("seedless: extractor needs %d seed bits; raising gamma from %d to %d", seed_length, plan.gamma, gamma)
    return BlockPlan(plan.a, gamma, plan.k_d, seed_length)


def two_source_seed(blocks: list[BitSequence], d: int) -> BitSequence:
    if 2 * d > len(blocks):
        raise ValueError(f"need {2 * d} blocks for {d} seed bits, have {len(blocks)}")
    return BitSequence(inner_product(blocks[2 * t], blocks[2 * t + 1]) for t in range(d))


def extract_seedless(plan: BlockPlan, vlx: SeededVLX, reader: BitReader) -> Extraction:
    """Read the seed blocks, derive the seed by pairwise inner products, then
    run the seeded extractor on the remainder of the stream."""
    plan = fit_block_plan(plan, vlx.spec.seed_length)
    blocks = [reader.read_bits(plan.block_bits) for _ in range(plan.gamma)]
    seed = two_source_seed(blocks, plan.seed_bits)
    res = extract_seeded(vlx.with_seed(seed), reader)
    return Extraction(res.output, res.consumed + plan.overhead, res.block)
