"""Variable-length stopping rules that turn a bit stream into a fixed-length block.

Three rules are provided:

* ``known`` - stop once the surprisal under a known model reaches the
  threshold, then zero-pad to the longest possible stopping length;
* ``coin`` - stop once the number of arrangements of the observed counts is
  large enough, then emit (majority flag, minority count, index);
* ``lz`` - LZ78-parse a fixed number of phrases and emit the phrase codes.

Each rule reads until its predicate first holds, so its footprint S_p is a
complete prefix-free set; :func:`stopping_set` enumerates it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterator

from .bits import BitReader, BitSequence, EndOfStream
from .codec import PhraseTable, binom, lz_insert, rank, unrank
from .hasher import plan_params
from .models import SourceModel

# slack for comparing accumulated float surprisal against the threshold
TOL = 1e-9

KINDS = ("known", "coin", "lz")


class ThresholdUnreachable(RuntimeError):
    """The model never accumulates enough surprisal within the length cap."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured size budget."""


@dataclass(frozen=True)
class ThresholdPlan:
    m: int
    eps: float
    k: int
    beta: float = 0.0
    eps_p: float = 0.0
    eps_lz: float = 0.1
    threshold: float | None = None
    lz_phrases: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.beta_p < 1.0:
            raise ValueError(f"beta_p = {self.beta_p} must lie in [0, 1)")
        if self.k < self.m:
            raise ValueError(f"k = {self.k} below m = {self.m}")
        if self.T < self.k - TOL:
            raise ValueError(f"threshold below k: T = {self.T} < k = {self.k}")
        if self.eps_lz < 0:
            raise ValueError("eps_lz must be nonnegative")

    @property
    def beta_p(self) -> float:
        return self.beta + self.eps_p

    @property
    def T(self) -> float:
        if self.threshold is not None:
            return float(self.threshold)
        return self.k / (1.0 - self.beta_p)

    @property
    def alpha(self) -> float:
        return (self.k - self.m) / self.m


def make_plan(m: int, eps: float, beta: float = 0.0, eps_p: float | None = None, *,
              eps_lz: float = 0.1, k: int | None = None, threshold: float | None = None,
              lz_phrases: int | None = None) -> ThresholdPlan:
    """Wire output size and uncertainty to the stopping threshold.

    ``eps_p`` defaults to 0.01 when ``beta > 0`` and to 0 for an exactly known
    source.
    """
    if eps_p is None:
        eps_p = 0.01 if beta > 0 else 0.0
    if k is None:
        k, _ = plan_params(m, eps)
    return ThresholdPlan(m, eps, k, beta, eps_p, eps_lz, threshold, lz_phrases)


@dataclass(frozen=True)
class EncodedBlock:
    z: BitSequence
    n: int
    claimed_k: float

    def __post_init__(self):
        if len(self.z) != self.n:
            raise ValueError(f"block has {len(self.z)} bits, expected {self.n}")


@dataclass(frozen=True)
class StopOutcome:
    raw: BitSequence
    block: EncodedBlock

    @property
    def consumed(self) -> int:
        return len(self.raw)


# -- construction 1: known process --------------------------------------------


def known_block_length(M: SourceModel, T: float, cap: int = 1 << 14) -> int:
    """Smallest ``l`` such that every length-``l`` string has surprisal >= T."""
    if M.positional:
        s = 0.0
        for l in range(1, cap + 1):
            p = M.p_at(l - 1)
            s += -math.log2(max(p, 1.0 - p))
            if s >= T - TOL:
                return l
    else:
        for l in range(1, cap + 1):
            if M.min_surprisal(l) >= T - TOL:
                return l
    raise ThresholdUnreachable(f"surprisal threshold {T:.4f} not reached within length cap {cap}")


def stop_known(M: SourceModel, plan: ThresholdPlan, reader: BitReader, cap: int = 1 << 14,
               n: int | None = None) -> StopOutcome:
    T = plan.T
    if n is None:
        n = known_block_length(M, T, cap)
    x: list[int] = []
    s = 0.0
    while s < T - TOL:
        if len(x) >= cap:
            raise ThresholdUnreachable(f"length cap {cap} exceeded before threshold {T:.4f}")
        b = reader.require_bit()
        p1 = M.p_one(x)
        p = p1 if b else 1.0 - p1
        s = math.inf if p <= 0 else s - math.log2(p)
        x.append(b)
    raw = BitSequence(x)
    return StopOutcome(raw, encode_known(raw, n, plan.k))


def encode_known(x: BitSequence, n: int, k: float) -> EncodedBlock:
    if len(x) > n:
        raise ValueError(f"stopping sequence longer ({len(x)}) than block length {n}")
    return EncodedBlock(BitSequence(x) + (0,) * (n - len(x)), n, k)


# -- construction 2: approximate biased coin ----------------------------------


def coin_stops(k0: int, k1: int, T: float) -> bool:
    """``log2 C(k0+k1, max(1, min(k0, k1))) >= T``."""
    c = binom(k0 + k1, max(1, min(k0, k1)))
    return c > 0 and math.log2(c) >= T - TOL


def coin_field_widths(T: float) -> tuple[int, int]:
    """Widths of the minority-count and index fields."""
    return math.ceil(math.log2(T + 1) - TOL), math.ceil(2 * T - TOL)


def coin_block_length(T: float) -> int:
    wc, wr = coin_field_widths(T)
    return 1 + wc + wr


def stop_coin(plan: ThresholdPlan, reader: BitReader) -> StopOutcome:
    T = plan.T
    x: list[int] = []
    k0 = k1 = 0
    while not coin_stops(k0, k1, T):
        b = reader.require_bit()
        x.append(b)
        if b:
            k1 += 1
        else:
            k0 += 1
    raw = BitSequence(x)
    return StopOutcome(raw, encode_coin(raw, T, plan.k))


def _first_true(pred, lo: int) -> int:
    """Smallest ``b >= lo`` with ``pred(b)``, for monotone ``pred``."""
    if pred(lo):
        return lo
    step = 1
    hi = lo + 1
    while not pred(hi):
        lo = hi
        step *= 2
        hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class _CoinClass:
    """Stopping cells sharing (majority flag, minority count).

    In canonical orientation a cell ``(j, b)`` holds ``j`` minority and ``b``
    majority symbols; the class spans ``b`` in ``[first, last]``.
    """

    j: int
    first: int
    last: int
    first_count: int

    @property
    def size(self) -> int:
        extra = binom(self.j + self.last, self.j) - binom(self.j + self.first, self.j) if self.last > self.first else 0
        return self.first_count + extra


def _cell_parents(j: int, b: int, T: float) -> tuple[bool, bool]:
    """Whether the minority- and majority-parents of cell (j, b) are non-stopping."""
    minority = j >= 1 and not coin_stops(j - 1, b, T)
    majority = b >= 1 and not coin_stops(j, b - 1, T)
    return minority, majority


def _coin_class(flag: int, j: int, T: float) -> _CoinClass:
    b_min = j + 1 if flag == 0 else j
    first = _first_true(lambda b: coin_stops(j, b, T), b_min)
    last = first
    if j >= 1:
        last = max(first, _first_true(lambda b: coin_stops(j - 1, b, T), j) - 1)
    mi, ma = _cell_parents(j, first, T)
    count = (binom(j - 1 + first, j - 1) if mi else 0) + (binom(j + first - 1, j) if ma else 0)
    return _CoinClass(j, first, last, count)


def coin_class_size(flag: int, j: int, T: float) -> int:
    """Number of stopping sequences with this majority flag and minority count."""
    return _coin_class(flag, j, T).size


def coin_index(x: BitSequence, T: float) -> tuple[int, int, int]:
    """(flag, minority count, index within the class) for a stopping sequence."""
    x = BitSequence(x)
    k0, k1 = x.zeros(), x.ones()
    flag = 1 if k0 >= k1 else 0
    j, b = min(k0, k1), max(k0, k1)
    cls = _coin_class(flag, j, T)
    if not cls.first <= b <= cls.last:
        raise ValueError(f"{x} is not a stopping sequence for T={T}")
    offset = 0
    if b > cls.first:
        offset = cls.first_count + binom(j + b - 1, j) - binom(j + cls.first, j)
    mi, ma = _cell_parents(j, b, T)
    if mi and ma:
        within = rank(x)
    else:
        within = rank(x[:-1])
    return flag, j, offset + within


def encode_coin(x: BitSequence, T: float, k: float) -> EncodedBlock:
    """Pack (flag, minority count, class index) into the fixed-width block.

    When a class holds a single cell open to both parents, the index is the
    plain lexicographic permutation rank of ``x``.
    """
    flag, j, idx = coin_index(x, T)
    wc, wr = coin_field_widths(T)
    assert j < (1 << wc), f"minority count {j} overflows {wc} bits"
    assert idx < (1 << wr), f"index {idx} overflows {wr} bits"
    z = BitSequence((flag,)) + BitSequence.from_int(j, wc) + BitSequence.from_int(idx, wr)
    return EncodedBlock(z, 1 + wc + wr, k)


def decode_coin(z: BitSequence, T: float) -> BitSequence:
    """Inverse of :func:`encode_coin`."""
    wc, wr = coin_field_widths(T)
    z = BitSequence(z)
    flag = z[0]
    j = z[1:1 + wc].to_int()
    idx = z[1 + wc:].to_int()
    cls = _coin_class(flag, j, T)
    if idx >= cls.size:
        raise ValueError("index outside its class")
    if idx < cls.first_count:
        b, within = cls.first, idx
    else:
        target = idx - cls.first_count + binom(j + cls.first, j)
        # largest b with C(j + b - 1, j) <= target
        b = _first_true(lambda bb: binom(j + bb, j) > target, cls.first + 1)
        within = target - binom(j + b - 1, j)
    minority, majority = (1, 0) if flag else (0, 1)
    k_min, k_maj = j, b
    ones = k_min if minority == 1 else k_maj
    length = j + b
    mi, ma = _cell_parents(j, b, T)
    if mi and ma:
        return unrank(length, ones, within)
    last = minority if mi else majority
    head = unrank(length - 1, ones - last, within)
    return head + (last,)


# -- construction 3: variable-length Lempel-Ziv -------------------------------


def lz_index_width(c: int) -> int:
    return max(1, math.ceil(math.log2(c + 1) - TOL))


def lz_phrase_count(target_bits: float) -> int:
    """Smallest ``c`` with ``c * (w + 1) >= target_bits``, ``w = ceil(log2(c + 1))``."""
    c = 1
    while c * (lz_index_width(c) + 1) < target_bits - TOL:
        c += 1
    return c


def lz_plan_phrases(plan: ThresholdPlan) -> int:
    if plan.lz_phrases is not None:
        return plan.lz_phrases
    return lz_phrase_count(plan.T * (1 + plan.eps_lz))


def lz_min_surprisal(M: SourceModel, c: int, bound: float = math.inf, budget: int = 1 << 20) -> float:
    """Least surprisal under ``M`` of any ``c``-phrase parse, by best-first search.

    Returns ``bound`` when no parse falls below it.
    """
    heap = [(0.0, (), (), frozenset([()]), 0)]
    pops = 0
    while heap:
        s, x, cur, seen, done = heapq.heappop(heap)
        if done == c:
            return s
        pops += 1
        if pops > budget:
            raise BudgetExceeded(f"budget: phrase search exceeds {budget} states")
        p1 = M.p_one(x)
        for b, p in ((0, 1.0 - p1), (1, p1)):
            if p <= 0:
                continue
            t = s - math.log2(p)
            if t >= bound:
                continue
            nxt = cur + (b,)
            if nxt in seen:
                heapq.heappush(heap, (t, x + (b,), nxt, seen, done))
            else:
                heapq.heappush(heap, (t, x + (b,), (), seen | {nxt}, done + 1))
    return bound


def calibrate_lz_phrases(M: SourceModel, plan: ThresholdPlan, cap: int = 4096) -> int:
    """Smallest phrase count (at least the planned one) whose every parse has
    surprisal at least ``T`` under ``M``.

    More phrases only extend parses, so the least surprisal grows with ``c``.
    """
    c = lz_plan_phrases(plan)
    while lz_min_surprisal(M, c, plan.T) < plan.T - TOL:
        c += 1
        if c > cap:
            raise ThresholdUnreachable(f"no phrase count up to {cap} reaches threshold {plan.T:g}")
    return c


def lz_block_length(c: int) -> int:
    return c * (lz_index_width(c) + 1)


def encode_lz_codes(codes, c: int, k: float) -> EncodedBlock:
    w = lz_index_width(c)
    z = BitSequence()
    for idx, bit in codes:
        z = z + BitSequence.from_int(idx, w) + (bit,)
    return EncodedBlock(z, c * (w + 1), k)


def stop_lz(plan: ThresholdPlan, reader: BitReader, phrases: int | None = None) -> StopOutcome:
    c = phrases if phrases is not None else lz_plan_phrases(plan)
    table = PhraseTable()
    start = reader.position
    codes = []
    raw: list[int] = []
    for _ in range(c):
        idx, bit = lz_insert(table, reader)
        codes.append((idx, bit))
        raw.extend(table.phrases[-1])
    assert reader.position - start == len(raw)
    return StopOutcome(BitSequence(raw), encode_lz_codes(codes, c, plan.k))


def lz_parse(x: BitSequence, c: int) -> list[tuple[int, int]]:
    """Codes of the first ``c`` LZ78 phrases of ``x``; ``x`` must hold exactly that."""
    reader = BitReader.from_bits(x)
    table = PhraseTable()
    codes = [lz_insert(table, reader) for _ in range(c)]
    if reader.read_bit() is not None:
        raise ValueError(f"{x} holds more than {c} phrases")
    return codes


# -- frontend object and footprint enumeration --------------------------------


@dataclass
class Frontend:
    """A stopping rule bound to its plan (and model, for ``known``)."""

    kind: str
    plan: ThresholdPlan
    model: SourceModel | None = None
    length_cap: int = 1 << 14
    _n: int | None = field(default=None, repr=False)
    _c: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction {self.kind!r}; choose from {KINDS}")
        if self.kind == "known" and self.model is None:
            raise ValueError("the known-process rule needs a model")

    @property
    def phrases(self) -> int:
        """Planned phrase count; with a bound model it is raised until every
        parse reaches the threshold under that model."""
        if self._c is None:
            if self.model is not None and self.plan.lz_phrases is None:
                self._c = calibrate_lz_phrases(self.model, self.plan)
            else:
                self._c = lz_plan_phrases(self.plan)
        return self._c

    @property
    def n(self) -> int:
        if self._n is None:
            if self.kind == "known":
                self._n = known_block_length(self.model, self.plan.T, self.length_cap)
            elif self.kind == "coin":
                self._n = coin_block_length(self.plan.T)
            else:
                self._n = lz_block_length(self.phrases)
        return self._n

    def stop(self, reader: BitReader) -> StopOutcome:
        if self.kind == "known":
            return stop_known(self.model, self.plan, reader, self.length_cap, self.n)
        if self.kind == "coin":
            return stop_coin(self.plan, reader)
        return stop_lz(self.plan, reader, self.phrases)

    def encode(self, x: BitSequence) -> EncodedBlock:
        if self.kind == "known":
            return encode_known(x, self.n, self.plan.k)
        if self.kind == "coin":
            return encode_coin(x, self.plan.T, self.plan.k)
        return encode_lz_codes(lz_parse(x, self.phrases), self.phrases, self.plan.k)

    def stopping_set(self, limit: int = 1 << 20) -> list[BitSequence]:
        return list(stopping_set(self, limit))


def stopping_set(fe: Frontend, limit: int = 1 << 20) -> Iterator[BitSequence]:
    """Depth-first enumeration of the rule's footprint, in lexicographic order."""
    T = fe.plan.T
    count = 0

    def emit(x):
        nonlocal count
        count += 1
        if count > limit:
            raise BudgetExceeded(f"budget: stopping set exceeds {limit} sequences")
        return BitSequence(x)

    if fe.kind == "known":
        M = fe.model
        stack = [((), 0.0)]
        while stack:
            x, s = stack.pop()
            if s >= T - TOL:
                yield emit(x)
                continue
            if len(x) >= fe.length_cap:
                raise ThresholdUnreachable(f"length cap {fe.length_cap} exceeded")
            p1 = M.p_one(x)
            for b, p in ((1, p1), (0, 1.0 - p1)):
                stack.append((x + (b,), math.inf if p <= 0 else s - math.log2(p)))
    elif fe.kind == "coin":
        stack = [((), 0, 0)]
        while stack:
            x, k0, k1 = stack.pop()
            if coin_stops(k0, k1, T):
                yield emit(x)
                continue
            stack.append((x + (1,), k0, k1 + 1))
            stack.append((x + (0,), k0 + 1, k1))
    else:
        c = fe.phrases
        stack = [((), frozenset([()]), (), 0)]
        while stack:
            x, seen, cur, done = stack.pop()
            if done == c:
                yield emit(x)
                continue
            for b in (1, 0):
                nxt = cur + (b,)
                if nxt in seen:
                    stack.append((x + (b,), seen, nxt, done))
                else:
                    stack.append((x + (b,), seen | {nxt}, (), done + 1))
