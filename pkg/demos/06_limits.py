# Where the guarantees stop.
# A grouping adversary piles probability onto a few sequences while staying
# within divergence beta of the model; entropy (and so efficiency) drops.
# A concentrated law can also sit below m - log2(1/(1-delta)).
from itertools import product

from vlextract import BiasedCoin, BitSequence
from vlextract.models import grouping_source
from vlextract.oracle import Distribution, closeness_entropy_floor, continuity_entropy_floor, entropy, stat_distance

M = BiasedCoin(0.8)
S = [BitSequence(w) for w in product((0, 1), repeat=6)]
H_M = entropy(Distribution.from_pairs((x, M.prob(x)) for x in S))
for beta in (0.2, 0.5):
    R = grouping_source(M, S, beta)
    H_R = entropy(Distribution.from_pairs((x, R.prob(x)) for x in S))
    print(f"beta={beta}: {len(R.groups)} groups, H_R/H_M={H_R / H_M:.3f}  vs 1-beta={1 - beta}")

P = Distribution({0: 0.85, 1: 0.15, 2: 0.0, 3: 0.0})
d = stat_distance(P, Distribution.uniform_bits(2))
print(f"two-point law: distance {d:.2f}, entropy {entropy(P):.3f}")
print(f"  m - log2(1/(1-d)) = {closeness_entropy_floor(2, d):.3f}  (violated)")
print(f"  continuity floor  = {continuity_entropy_floor(2, d):.3f}")
