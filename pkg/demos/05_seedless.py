# No seed available: carve it out of the source first.
# Pairs of 10-bit blocks give one seed bit each via their GF(2) inner
# product, then the seeded extractor runs on the rest of the stream.
import numpy as np

from vlextract import BiasedCoin, BitReader, BlockPlan, build_vlx, extract_seedless, make_plan
from vlextract.oracle import inner_product_law, verify_pipeline, verify_seedless

p = inner_product_law(np.full(10, 0.5), np.full(10, 0.5))
print(f"fair 10-bit blocks: P[<x,y>=1] = 1/2 - {0.5 - p:.6f}  (2^-11 = {2.0 ** -11:.6f})")

M = BiasedCoin(0.6)
vlx = build_vlx("known", make_plan(4, 0.5), M)
rep = verify_seedless(BlockPlan(11, 2), vlx, M)
eps2 = verify_pipeline(vlx, M).distance_to_uniform
print(f"{rep.d} seed bits from {rep.gamma} blocks; seed distance {rep.eps1_measured:.2e}")
print(f"seeded distance {eps2:.4f}; composed distance {rep.composed_distance:.4f}")

res = extract_seedless(BlockPlan(11, 2), vlx, BitReader.from_bits(M.sample(np.random.default_rng(5), 1000)))
print("one output:", res.output, "after", res.consumed, "input bits")
