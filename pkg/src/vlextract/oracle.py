"""Exact desk-scale verification of variable-length extractors.

The oracle enumerates the stopping set under a source, builds the exact
distribution of the encoded block, and measures the hashed output against
uniform. Seed averaging uses the Fourier expansion of the Toeplitz hash:
for a mask ``u`` the parity ``u . (A_s z)`` equals ``parity(s & clmul(u, z))``,
so the per-seed output law is a Walsh-Hadamard transform over seeds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .bits import BitSequence
from .frontends import BudgetExceeded, Frontend
from .hasher import toeplitz_matrix
from .models import PositionalSource, SourceModel, binary_entropy
from .pipeline import BlockPlan, SeededVLX, fit_block_plan

MASS_TOL = 1e-9
EXACT_SEED_BITS = 20
MIN_SAMPLED_SEEDS = 10_000
SAMPLED_CELLS = 1 << 31  # support size x sampled seeds x n


# -- distributions ------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    masses: dict

    def __post_init__(self):
        if any(p < -1e-15 for p in self.masses.values()):
            raise ValueError("negative mass")
        total = math.fsum(self.masses.values())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")

    @classmethod
    def uniform(cls, outcomes: Iterable) -> "Distribution":
        outcomes = list(outcomes)
        return cls({o: 1.0 / len(outcomes) for o in outcomes})

    @classmethod
    def uniform_bits(cls, m: int) -> "Distribution":
        return cls({y: 2.0 ** -m for y in range(1 << m)})

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Distribution":
        acc: dict = {}
        for k, p in pairs:
            acc.setdefault(k, []).append(p)
        return cls({k: math.fsum(v) for k, v in acc.items()})

    @property
    def support(self) -> list:
        return [k for k, p in self.masses.items() if p > 0]

    def __getitem__(self, key) -> float:
        return self.masses.get(key, 0.0)


def stat_distance(P: Distribution, Q: Distribution) -> float:
    """Half the L1 distance."""
    keys = set(P.masses) | set(Q.masses)
    return 0.5 * math.fsum(abs(P[k] - Q[k]) for k in keys)


def max_test_distance(P: Distribution, Q: Distribution) -> float:
    """Largest ``|P(A) - Q(A)|`` over all events ``A``; exhaustive, small supports only."""
    keys = sorted(set(P.masses) | set(Q.masses), key=repr)
    if len(keys) > 16:
        raise BudgetExceeded(f"budget: {len(keys)} outcomes is too many for exhaustive tests")
    best = 0.0
    for r in range(len(keys) + 1):
        for event in combinations(keys, r):
            best = max(best, abs(math.fsum(P[k] for k in event) - math.fsum(Q[k] for k in event)))
    return best


def minentropy(P: Distribution) -> float:
    return -math.log2(max(P.masses.values()))


def entropy(P: Distribution) -> float:
    return math.fsum(-p * math.log2(p) for p in P.masses.values() if p > 0)


def closeness_entropy_floor(m: int, delta: float) -> float:
    """``m - log2(1/(1 - delta))``: the entropy floor claimed for delta-close laws.

    This is not a valid bound for every law (a two-point law on two bits at
    distance 0.6 already falls below it); it is checked only on seed-averaged
    outputs. :func:`continuity_entropy_floor` is the general bound.
    """
    if delta >= 1:
        return -math.inf
    return m - math.log2(1.0 / (1.0 - delta))


def continuity_entropy_floor(m: int, delta: float) -> float:
    """Sharp continuity bound: ``H >= m - delta*log2(2^m - 1) - h(delta)``."""
    if delta >= 1 - 2.0 ** -m:
        return 0.0
    return m - delta * math.log2((1 << m) - 1) - binary_entropy(delta)


# -- stopping-set laws ---------------------------------------------------------


def input_law(fe: Frontend, R: SourceModel, limit: int = 1 << 20) -> list[tuple[BitSequence, float]]:
    """Every stopping sequence with its probability under ``R``."""
    return [(x, R.prob(x)) for x in fe.stopping_set(limit)]


def block_law(fe: Frontend, law) -> Distribution:
    """Law of the encoded block ``Z`` (keyed by its MSB-first integer value)."""
    return Distribution.from_pairs((fe.encode(x).z.to_int(), p) for x, p in law)


# -- seed-averaged output laws -------------------------------------------------


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials given as ints."""
    r = 0
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
    return r


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis."""
    a = np.array(a, dtype=float)
    n = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(*lead, -1, 2, h)
        x, y = a[..., 0, :], a[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2)
        h *= 2
    return a.reshape(*lead, n)


def _y_index(u: int, m: int) -> int:
    # u has bit i for output row i; outcomes are keyed MSB-first (row 0 on top)
    return int(format(u, f"0{m}b")[::-1], 2)


def _sign_matrix(m: int) -> np.ndarray:
    """``H[y, u] = (-1)^(u . y)`` with ``y`` keyed MSB-first, ``u`` bit i = row i."""
    size = 1 << m
    H = np.empty((size, size))
    for y in range(size):
        for u in range(size):
            H[y, u] = -1.0 if (_y_index(u, m) & y).bit_count() & 1 else 1.0
    return H


def per_seed_laws_exact(zlaw: Distribution, n: int, m: int, max_entries: int = 1 << 25) -> np.ndarray:
    """``P[y, s]``: output law for every seed ``s`` (bit ``t`` of ``s`` = seed[t])."""
    L = n + m - 1
    if L > EXACT_SEED_BITS or (1 << (L + m)) > max_entries:
        raise BudgetExceeded(f"budget: exact seed enumeration over 2^{L} seeds x 2^{m} outputs")
    F = np.empty((1 << m, 1 << L))
    F[0] = 1.0
    zs = [(z, p) for z, p in zlaw.masses.items() if p > 0]
    for u in range(1, 1 << m):
        w = np.zeros(1 << L)
        for z, p in zs:
            w[clmul(u, z)] += p
        F[u] = fwht(w)
    return (_sign_matrix(m) @ F) / (1 << m)


def seed_int(seed: BitSequence) -> int:
    return sum(b << t for t, b in enumerate(seed))


def per_seed_laws_sampled(zlaw: Distribution, n: int, m: int, seeds: np.ndarray,
                          batch_cells: int = 1 << 22) -> np.ndarray:
    """Brute-force output law for each seed row of ``seeds`` (0/1 array)."""
    zs = [(z, p) for z, p in zlaw.masses.items() if p > 0]
    Z = np.array([[(z >> (n - 1 - j)) & 1 for j in range(n)] for z, _ in zs], dtype=np.int32)
    w = np.array([p for _, p in zs])
    weights = 1 << np.arange(m - 1, -1, -1)
    idx = np.arange(m)[:, None] - np.arange(n)[None, :] + n - 1
    out = np.zeros((1 << m, len(seeds)))
    step = max(1, batch_cells // max(1, len(zs) * m))
    for lo in range(0, len(seeds), step):
        S = seeds[lo:lo + step]
        A = S[:, idx].astype(np.int32)  # (B, m, n)
        Y = np.einsum("bmn,kn->bkm", A, Z) & 1
        yi = Y @ weights  # (B, K)
        for b in range(len(S)):
            out[:, lo + b] = np.bincount(yi[b], weights=w, minlength=1 << m)
    return out


def marginal_output_law(zlaw: Distribution, n: int, m: int, seed_bias=None) -> Distribution:
    """Output law averaged over a seed with independent bits.

    ``seed_bias[t]`` is ``P(seed[t] = 1)``; ``None`` means uniform.
    """
    L = n + m - 1
    bias = np.full(L, 0.5) if seed_bias is None else np.asarray(seed_bias, dtype=float)
    if len(bias) != L:
        raise ValueError(f"seed bias has {len(bias)} entries, expected {L}")
    factor = 1.0 - 2.0 * bias
    zs = [(z, p) for z, p in zlaw.masses.items() if p > 0]
    f = np.zeros(1 << m)
    f[0] = 1.0
    for u in range(1, 1 << m):
        acc = []
        for z, p in zs:
            c = clmul(u, z)
            prod = p
            t = 0
            while c and prod != 0.0:
                if c & 1:
                    prod *= factor[t]
                c >>= 1
                t += 1
            acc.append(prod)
        f[u] = math.fsum(acc)
    P = (_sign_matrix(m) @ f) / (1 << m)
    P = np.clip(P, 0.0, None)
    return Distribution({y: float(P[y]) for y in range(1 << m)})


def _distances_and_entropies(P: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    P = np.clip(P, 0.0, None)
    dist = 0.5 * np.abs(P - 2.0 ** -m).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(P > 0, P * np.log2(P), 0.0).sum(axis=0)
    return dist, ent


# -- reports ------------------------------------------------------------------


@dataclass
class PipelineReport:
    construction: str
    m: int
    k: int
    eps: float
    T: float
    n: int
    seed_length: int
    support_size: int
    distance_to_uniform: float
    distance_marginal: float
    distance_fixed_seed: float | None
    seeds_exact: bool
    seeds_used: int
    minentropy_Z: float
    entropy_X: float
    expected_input_length: float
    efficiency: float
    efficiency_with_seed: float
    output_entropy: float
    entropy_floor_margin: float
    joint_floor_margin: float
    continuity_margin: float
    max_output_entropy: float

    def to_text(self) -> str:
        lines = []
        for key, val in asdict(self).items():
            if isinstance(val, float):
                val = f"{val:.6g}"
            lines.append(f"{key} {val}")
        return "\n".join(lines) + "\n"


def verify_pipeline(vlx: SeededVLX, R: SourceModel, *, support_limit: int = 1 << 20,
                    sampled_seeds: int = MIN_SAMPLED_SEEDS, rng: np.random.Generator | None = None,
                    max_seed_bits: int | None = None) -> PipelineReport:
    """Exact measurements of ``vlx`` run on source ``R``.

    The distance to uniform is the strong (seed-revealed) one: the mean over
    seeds of each seed's output distance. It is exact when the seed has at
    most 20 bits and estimated from ``sampled_seeds`` uniform seeds otherwise.
    """
    fe, spec = vlx.frontend, vlx.spec
    n, m = spec.n, spec.m
    L = spec.seed_length
    if max_seed_bits is not None and L > max_seed_bits:
        raise BudgetExceeded(f"budget: seed length {L} exceeds cap {max_seed_bits}")
    law = input_law(fe, R, support_limit)
    probs = [p for _, p in law]
    mass = math.fsum(probs)
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"stopping set carries mass {mass!r} under the source, not 1")
    zlaw = block_law(fe, law)
    xdist = Distribution.from_pairs((x, p) for x, p in law)
    H_X = entropy(xdist)
    EL = math.fsum(p * len(x) for x, p in law)

    if L <= EXACT_SEED_BITS and (1 << (L + m)) <= (1 << 25):
        P = per_seed_laws_exact(zlaw, n, m)
        exact, used = True, 1 << L
    else:
        cells = len(zlaw.masses) * sampled_seeds * n
        if cells > SAMPLED_CELLS:
            raise BudgetExceeded(f"budget: {len(zlaw.masses)} blocks x {sampled_seeds} sampled seeds x n={n}"
                                 f" exceeds {SAMPLED_CELLS} cells")
        rng = rng or np.random.default_rng(0)
        seeds = rng.integers(0, 2, size=(sampled_seeds, L), dtype=np.int8)
        P = per_seed_laws_sampled(zlaw, n, m, seeds)
        exact, used = False, sampled_seeds
    dist, ent = _distances_and_entropies(P, m)
    floors = np.array([continuity_entropy_floor(m, d) for d in dist])

    fixed = None
    if vlx.seed is not None:
        Pf = per_seed_laws_sampled(zlaw, n, m, np.array([list(vlx.seed)], dtype=np.int8))
        fixed = float(_distances_and_entropies(Pf, m)[0][0])

    marg = marginal_output_law(zlaw, n, m)
    marg_d = stat_distance(marg, Distribution.uniform_bits(m))
    H_Y = entropy(marg)
    return PipelineReport(
        construction=fe.kind, m=m, k=spec.k, eps=spec.eps, T=fe.plan.T, n=n, seed_length=L,
        support_size=len(law),
        distance_to_uniform=float(dist.mean()),
        distance_marginal=marg_d,
        distance_fixed_seed=fixed,
        seeds_exact=exact, seeds_used=used,
        minentropy_Z=minentropy(zlaw),
        entropy_X=H_X,
        expected_input_length=EL,
        efficiency=m / H_X if H_X > 0 else math.inf,
        efficiency_with_seed=m / (H_X + L),
        output_entropy=H_Y,
        entropy_floor_margin=H_Y - closeness_entropy_floor(m, marg_d),
        # joint law of (output, seed): its distance to (U_m, seed) is the strong distance
        joint_floor_margin=float(ent.mean()) - closeness_entropy_floor(m, float(dist.mean())),
        continuity_margin=float(np.min(ent - floors)),
        max_output_entropy=float(max(ent.max(), H_Y)),
    )


@dataclass
class TrendRow:
    m: int
    consumed_mean: float
    entropy_X: float
    efficiency: float
    efficiency_with_seed: float
    entropy_per_symbol: float


def efficiency_trend(make_vlx: Callable[[int], SeededVLX], ms: Iterable[int], R: SourceModel,
                     support_limit: int = 1 << 20) -> list[TrendRow]:
    """Efficiency ``m / H_R(X_m)`` for each ``m``; also ``H_R(X_m) / E|X_m|``."""
    rows = []
    for m in ms:
        vlx = make_vlx(m)
        law = input_law(vlx.frontend, R, support_limit)
        H = entropy(Distribution.from_pairs(law))
        EL = math.fsum(p * len(x) for x, p in law)
        rows.append(TrendRow(m, EL, H, m / H, m / (H + vlx.spec.seed_length), H / EL))
    return rows


def trend_csv(rows: list[TrendRow], extra: dict | None = None) -> str:
    extra = extra or {}
    head = ["m", "consumed_mean", "H_X", "eta", "eta_with_seed", "H_per_symbol", *extra]
    out = [",".join(head)]
    for r in rows:
        vals = [r.m, r.consumed_mean, r.entropy_X, r.efficiency, r.efficiency_with_seed, r.entropy_per_symbol,
                *extra.values()]
        out.append(",".join(str(v) if isinstance(v, int) else f"{v:.6g}" for v in vals))
    return "\n".join(out) + "\n"


def fixed_length_baseline(lo: float, hi: float) -> tuple[float, float]:
    """Efficiency range of an optimal fixed-length extractor on the interval class.

    It must budget for the worst per-bit min-entropy while the input carries
    between the smallest and largest per-bit Shannon entropy in the interval.
    """
    hmin = -math.log2(max(hi, 1.0 - lo))
    ends = [binary_entropy(lo), binary_entropy(hi)]
    if lo <= 0.5 <= hi:
        ends.append(1.0)
    return hmin / max(ends), hmin / min(ends)


# -- seedless cascade ---------------------------------------------------------


def inner_product_law(p_x: np.ndarray, p_y: np.ndarray) -> float:
    """P[<X, Y> = 1] for independent product blocks, by full enumeration."""
    b = len(p_x)
    if b > 12:
        raise BudgetExceeded(f"budget: 2^{2 * b} block pairs")
    vals = np.arange(1 << b)
    bits = (vals[:, None] >> np.arange(b - 1, -1, -1)[None, :]) & 1
    px = np.prod(np.where(bits == 1, p_x, 1 - p_x), axis=1)
    py = np.prod(np.where(bits == 1, p_y, 1 - p_y), axis=1)
    parity = np.bitwise_count(vals[:, None] & vals[None, :]) & 1
    return float(px @ parity @ py)


def _product_distance(biases: np.ndarray) -> tuple[float, bool]:
    """Distance of independent bits from uniform; exact when biases coincide."""
    d = len(biases)
    if np.allclose(biases, biases[0], atol=0, rtol=1e-14):
        p = float(biases[0])
        if p in (0.0, 1.0):
            return 1.0 - 2.0 ** -d, True
        terms = []
        for w in range(d + 1):
            lp = math.lgamma(d + 1) - math.lgamma(w + 1) - math.lgamma(d - w + 1)
            a = math.exp(lp + w * math.log(p) + (d - w) * math.log(1 - p))
            u = math.exp(lp - d * math.log(2))
            terms.append(abs(a - u))
        return 0.5 * math.fsum(terms), True
    if d <= 20:
        vals = np.arange(1 << d)
        bits = (vals[:, None] >> np.arange(d)[None, :]) & 1
        pr = np.prod(np.where(bits == 1, biases, 1 - biases), axis=1)
        return float(0.5 * np.abs(pr - 2.0 ** -d).sum()), True
    return float(np.abs(biases - 0.5).sum()), False


@dataclass
class SeedlessReport:
    gamma: int
    block_bits: int
    d: int
    eps1_uniform_blocks: float
    eps1_measured: float
    eps1_exact: bool
    eps2_design: float
    eps2_measured: float
    composed_distance: float
    seed_bit_bias: list = field(default_factory=list)


def verify_seedless(plan: BlockPlan, vlx: SeededVLX, R: PositionalSource,
                    support_limit: int = 1 << 20) -> SeedlessReport:
    """Exact composed output law of the seedless cascade on a positional source.

    Disjoint block pairs of an independent-bit source give independent seed
    bits, so the composed output law is the seeded law under a biased seed.
    """
    if not getattr(R, "positional", False):
        raise ValueError("seedless verification needs a source with independent positions")
    plan = fit_block_plan(plan, vlx.spec.seed_length)
    b = plan.block_bits
    cache: dict = {}
    biases = []
    for t in range(plan.seed_bits):
        px = R.position_probs(2 * t * b, b)
        py = R.position_probs((2 * t + 1) * b, b)
        key = (tuple(px), tuple(py))
        if key not in cache:
            cache[key] = inner_product_law(px, py)
        biases.append(cache[key])
    biases = np.array(biases)
    eps1, exact = _product_distance(biases)

    rest = R.shift(plan.overhead)
    law = input_law(vlx.frontend, rest, support_limit)
    zlaw = block_law(vlx.frontend, law)
    n, m = vlx.spec.n, vlx.spec.m
    U = Distribution.uniform_bits(m)
    eps2 = stat_distance(marginal_output_law(zlaw, n, m), U)
    composed = stat_distance(marginal_output_law(zlaw, n, m, biases), U)
    return SeedlessReport(plan.gamma, b, plan.seed_bits, plan.seed_bits * 2.0 ** -(b + 1), eps1, exact,
                          vlx.spec.eps, eps2, composed, biases.tolist())


def brute_force_output_law(zlaw: Distribution, n: int, m: int, seed) -> Distribution:
    """Output law for one seed by direct matrix products; independent of the Fourier path."""
    A = toeplitz_matrix(seed, n, m).astype(np.int64)
    acc: dict = {}
    for z, p in zlaw.masses.items():
        zb = np.array([(z >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.int64)
        y = BitSequence((A @ zb) & 1).to_int()
        acc[y] = acc.get(y, 0.0) + p
    return Distribution({y: acc.get(y, 0.0) for y in range(1 << m)})
