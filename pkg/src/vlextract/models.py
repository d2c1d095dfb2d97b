"""Binary source models, the d_p divergence, and adversarial source synthesis.

A model answers one question: the probability that the next bit is 1 given
the bits emitted so far. Sequence probabilities are accumulated in log2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .bits import BitSequence

NEG_INF = float("-inf")


def _log2(p: float) -> float:
    return math.log2(p) if p > 0 else NEG_INF


class SourceModel:
    """Base class. Subclasses implement :meth:`p_one`."""

    #: True when the next-bit probability depends only on the position.
    positional = False

    def p_one(self, prefix: Sequence[int]) -> float:
        raise NotImplementedError

    def log2prob(self, x: Iterable[int]) -> float:
        x = list(BitSequence(x))
        total = 0.0
        for i, b in enumerate(x):
            p1 = self.p_one(x[:i])
            total += _log2(p1 if b else 1.0 - p1)
            if total == NEG_INF:
                break
        return total

    def prob(self, x: Iterable[int]) -> float:
        return 2.0 ** self.log2prob(x)

    def sample(self, rng: np.random.Generator, count: int) -> BitSequence:
        out: list[int] = []
        u = rng.random(count)
        for i in range(count):
            out.append(int(u[i] < self.p_one(out)))
        return BitSequence(out)

    def min_surprisal(self, length: int) -> float:
        """Smallest ``log2(1/P(x))`` over all ``x`` of the given length."""
        best = math.inf
        stack = [((), 0.0)]
        while stack:
            x, s = stack.pop()
            if len(x) == length:
                best = min(best, s)
                continue
            p1 = self.p_one(x)
            for b, p in ((0, 1.0 - p1), (1, p1)):
                if p > 0:
                    stack.append((x + (b,), s - math.log2(p)))
        return best


class PositionalSource(SourceModel):
    """Independent bits whose bias depends only on the absolute position."""

    positional = True

    def p_at(self, i: int) -> float:
        raise NotImplementedError

    def p_one(self, prefix: Sequence[int]) -> float:
        return self.p_at(len(prefix))

    def position_probs(self, start: int, count: int) -> np.ndarray:
        return np.array([self.p_at(start + i) for i in range(count)], dtype=float)

    def log2prob(self, x: Iterable[int]) -> float:
        total = 0.0
        for i, b in enumerate(BitSequence(x)):
            p1 = self.p_at(i)
            total += _log2(p1 if b else 1.0 - p1)
        return total

    def sample(self, rng: np.random.Generator, count: int) -> BitSequence:
        probs = self.position_probs(0, count)
        return BitSequence((rng.random(count) < probs).astype(int))

    def min_surprisal(self, length: int) -> float:
        total = 0.0
        for i in range(length):
            p = self.p_at(i)
            total += -math.log2(max(p, 1.0 - p))
        return total

    def shift(self, offset: int) -> "PositionalSource":
        return _Shifted(self, offset)


class _Shifted(PositionalSource):
    def __init__(self, base: PositionalSource, offset: int):
        self.base, self.offset = base, offset

    def p_at(self, i: int) -> float:
        return self.base.p_at(i + self.offset)

    def __repr__(self):
        return f"{self.base!r}.shift({self.offset})"


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} is not a probability")
    return p


class BiasedCoin(PositionalSource):
    def __init__(self, p: float):
        self.p = _check_prob(p)

    def p_at(self, i: int) -> float:
        return self.p

    def shift(self, offset: int) -> "BiasedCoin":
        return self

    def __repr__(self):
        return f"BiasedCoin({self.p})"


class ProductSource(PositionalSource):
    """Independent bits with biases ``ps`` cycled over positions."""

    def __init__(self, ps: Sequence[float]):
        if not len(ps):
            raise ValueError("empty bias list")
        self.ps = tuple(_check_prob(p) for p in ps)

    def p_at(self, i: int) -> float:
        return self.ps[i % len(self.ps)]

    def __repr__(self):
        return f"ProductSource({list(self.ps)})"


INTERVAL_POLICIES = ("lo", "hi", "alternating", "worst")


class IntervalCoin(PositionalSource):
    """A member of the class of independent coins with ``P[x_i=1] in [lo, hi]``.

    ``policy`` picks the concrete member: ``lo``/``hi`` fix an endpoint,
    ``alternating`` starts at ``lo`` and flips every position, ``worst`` sits
    at the endpoint that inflates the model's likelier symbol (``hi`` when the
    reference bias is at least 1/2, else ``lo``), which maximises the heaviest
    sequence mass and hence the min-entropy loss.
    """

    def __init__(self, lo: float, hi: float, policy: str = "worst", reference: float | None = None):
        self.lo, self.hi = _check_prob(lo, "lo"), _check_prob(hi, "hi")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval: lo={lo} > hi={hi}")
        if policy not in INTERVAL_POLICIES:
            raise ValueError(f"unknown policy {policy!r}; choose from {INTERVAL_POLICIES}")
        self.policy = policy
        self.reference = (self.lo + self.hi) / 2 if reference is None else _check_prob(reference)

    def p_at(self, i: int) -> float:
        if self.policy == "lo":
            return self.lo
        if self.policy == "hi":
            return self.hi
        if self.policy == "alternating":
            return self.lo if i % 2 == 0 else self.hi
        return self.hi if self.reference >= 0.5 else self.lo

    def with_policy(self, policy: str) -> "IntervalCoin":
        return IntervalCoin(self.lo, self.hi, policy, self.reference)

    def __repr__(self):
        return f"IntervalCoin({self.lo}, {self.hi}, policy={self.policy!r})"


class MarkovSource(SourceModel):
    """First-order binary Markov chain. ``trans[a][b] = P(next=b | last=a)``."""

    def __init__(self, init: Sequence[float], trans: Sequence[Sequence[float]]):
        self.init = tuple(_check_prob(v) for v in init)
        self.trans = tuple(tuple(_check_prob(v) for v in row) for row in trans)
        for row in (self.init, *self.trans):
            if len(row) != 2 or abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(f"distribution {row} does not sum to 1")

    def p_one(self, prefix: Sequence[int]) -> float:
        if len(prefix) == 0:
            return self.init[1]
        return self.trans[prefix[-1]][1]

    def min_surprisal(self, length: int) -> float:
        if length == 0:
            return 0.0
        best = [-_log2(self.init[0]), -_log2(self.init[1])]
        for _ in range(length - 1):
            best = [min(best[a] - _log2(self.trans[a][b]) for a in (0, 1)) for b in (0, 1)]
        return min(best)

    def stationary(self) -> tuple[float, float]:
        a, b = self.trans[0][1], self.trans[1][0]
        if a + b == 0:
            return self.init
        return (b / (a + b), a / (a + b))

    def entropy_rate(self) -> float:
        pi = self.stationary()
        return sum(pi[a] * _h(self.trans[a][1]) for a in (0, 1))

    def __repr__(self):
        return f"MarkovSource(init={self.init}, trans={self.trans})"


class ExplicitSource(SourceModel):
    """Distribution given as masses on a complete prefix-free set.

    Past the end of a listed sequence the source continues with fair bits, so
    probabilities stay consistent for every prefix.
    """

    def __init__(self, table: dict, groups: list | None = None):
        self.table = {BitSequence(k): float(v) for k, v in table.items()}
        total = sum(self.table.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"explicit masses sum to {total}, not 1")
        self.groups = groups
        self._prefix_mass: dict = {}
        for x, p in self.table.items():
            for i in range(len(x) + 1):
                key = tuple(x[:i])
                self._prefix_mass[key] = self._prefix_mass.get(key, 0.0) + p
        self._maxlen = max(len(x) for x in self.table)

    def _mass(self, x: tuple) -> float:
        if x in self._prefix_mass:
            return self._prefix_mass[x]
        for i in range(min(len(x), self._maxlen), -1, -1):
            head = BitSequence(x[:i])
            if head in self.table:
                return self.table[head] * 2.0 ** -(len(x) - i)
        return 0.0

    def p_one(self, prefix: Sequence[int]) -> float:
        prefix = tuple(prefix)
        m = self._mass(prefix)
        if m <= 0:
            return 0.5
        return min(1.0, self._mass(prefix + (1,)) / m)

    def log2prob(self, x: Iterable[int]) -> float:
        return _log2(self._mass(tuple(BitSequence(x))))

    def min_surprisal(self, length: int) -> float:
        best = math.inf
        for key, m in self._prefix_mass.items():
            if len(key) == length and m > 0:
                best = min(best, -math.log2(m))
        for x, m in self.table.items():
            if len(x) < length and m > 0:
                best = min(best, -math.log2(m) + (length - len(x)))
        return best

    def __repr__(self):
        return f"ExplicitSource(<{len(self.table)} sequences>)"


def _h(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


binary_entropy = _h


def prob(model: SourceModel, x) -> float:
    return model.prob(x)


def sample(model: SourceModel, rng: np.random.Generator, count: int) -> BitSequence:
    if count < 0:
        raise ValueError("count must be nonnegative")
    return model.sample(rng, count)


# -- divergence ---------------------------------------------------------------


class DivergenceUndefined(ValueError):
    """P_M(x) = 0 while P_R(x) > 0: the ratio is infinite."""


class DegenerateModel(ValueError):
    """P_M(x) = 1: the normalising surprisal is zero."""


@dataclass(frozen=True)
class DivergenceReport:
    d_p: float
    argmax: BitSequence
    size: int


def divergence_dp(R: SourceModel, M: SourceModel, S_p: Iterable) -> DivergenceReport:
    """Max over ``S_p`` of ``log2(P_R/P_M) / log2(1/P_M)``."""
    best, arg, size = NEG_INF, None, 0
    for x in S_p:
        x = BitSequence(x)
        size += 1
        lm = M.log2prob(x)
        lr = R.log2prob(x)
        if lm == NEG_INF:
            if lr > NEG_INF:
                raise DivergenceUndefined(f"P_M({x}) = 0 but P_R({x}) > 0")
            continue
        if lm >= 0.0:
            raise DegenerateModel(f"P_M({x}) = 1; d_p denominator is zero")
        ratio = (lr - lm) / -lm if lr > NEG_INF else NEG_INF
        if ratio > best:
            best, arg = ratio, x
    if size == 0:
        raise ValueError("S_p is empty")
    return DivergenceReport(best, arg, size)


def coin_divergence(lo: float, hi: float, q: float) -> float:
    """Per-symbol d(R, coin q) for the independent class with bias in [lo, hi]."""
    lo_term = math.log2((1 - lo) / (1 - q)) / math.log2(1 / (1 - q))
    hi_term = math.log2(hi / q) / math.log2(1 / q)
    return max(lo_term, hi_term)


def optimal_coin_model(lo: float, hi: float) -> tuple[float, float]:
    """Coin bias minimising the worst-case divergence to the interval class.

    For independent products the sequence ratio is a mediant of per-symbol
    ratios, so the worst case is a single-symbol extreme and the per-symbol
    minimax equals d(R, M).
    """
    if lo > hi:
        raise ValueError(f"invalid interval: lo={lo} > hi={hi}")
    if not 0 < lo <= hi < 1:
        raise ValueError("interval must lie inside (0, 1)")
    if lo == hi:
        return lo, 0.0

    def gap(q):
        a = math.log2((1 - lo) / (1 - q)) / math.log2(1 / (1 - q))
        b = math.log2(hi / q) / math.log2(1 / q)
        return a - b

    q = brentq(gap, lo, hi, xtol=1e-15)
    return q, coin_divergence(lo, hi, q)


# -- adversarial synthesis -----------------------------------------------------


def grouping_source(M: SourceModel, S_p: Iterable, beta: float) -> ExplicitSource:
    """Adversarial source that piles each group's mass onto its leader.

    Sequences are sorted by decreasing ``P_M`` (ties lexicographic) and cut
    greedily into groups whose total stays within ``P_M(leader)`` below
    ``P_M(leader) ** (1 - beta)``.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    items = [(M.prob(x), BitSequence(x)) for x in S_p]
    if not items:
        raise ValueError("S_p is empty")
    items.sort(key=lambda t: (-t[0], str(t[1])))
    groups: list[list[BitSequence]] = []
    table: dict = {}
    i = 0
    while i < len(items):
        lead_p, lead = items[i]
        target = lead_p ** (1.0 - beta)
        mass, members = lead_p, [lead]
        i += 1
        while i < len(items) and mass + items[i][0] <= target * (1 + 1e-12):
            mass += items[i][0]
            members.append(items[i][1])
            i += 1
        groups.append(members)
        table[lead] = mass
        for x in members[1:]:
            table[x] = 0.0
    return ExplicitSource(table, groups=groups)


# -- config files --------------------------------------------------------------


def parse_model_config(text: str) -> SourceModel:
    """Build a model from line-based ``key value...`` text; ``#`` starts a comment line."""
    cfg: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"line {lineno}: expected 'key value', got {raw!r}")
        cfg[parts[0]] = parts[1:]

    def num(key, default=None):
        if key not in cfg:
            if default is None:
                raise ValueError(f"missing key {key!r}")
            return default
        return float(cfg[key][0])

    def nums(key):
        if key not in cfg:
            raise ValueError(f"missing key {key!r}")
        return [float(v) for v in cfg[key]]

    kind = cfg.get("type", [None])[0]
    if kind == "coin":
        return BiasedCoin(num("p"))
    if kind == "product":
        return ProductSource(nums("ps"))
    if kind == "markov":
        return MarkovSource(nums("init"), [nums("row0"), nums("row1")])
    if kind == "interval":
        ref = float(cfg["model"][0]) if "model" in cfg else None
        lo, hi = num("lo"), num("hi")
        if ref is None and 0 < lo <= hi < 1:
            ref = optimal_coin_model(lo, hi)[0]
        return IntervalCoin(lo, hi, cfg.get("policy", ["worst"])[0], ref)
    if kind == "grouping":
        base = BiasedCoin(num("p"))
        length = int(num("length"))
        from itertools import product

        level = [BitSequence(t) for t in product((0, 1), repeat=length)]
        src = grouping_source(base, level, num("beta"))
        src.base, src.beta, src.level_length = base, num("beta"), length
        return src
    raise ValueError(f"unknown or missing model type {kind!r}")


def load_model(path) -> SourceModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model_config(fh.read())
