# Sources known only up to an interval of biases.
# Pick the coin model that minimises the worst-case divergence, plan with
# that uncertainty, and compare against a fixed-length extractor.
from vlextract import BiasedCoin, IntervalCoin, make_plan, optimal_coin_model
from vlextract.frontends import Frontend
from vlextract.oracle import Distribution, entropy, fixed_length_baseline, input_law

lo, hi = 0.9, 0.91
q, beta = optimal_coin_model(lo, hi)
print(f"model coin q*={q:.5f}, uncertainty beta={beta:.4f}")
print("fixed-length efficiency range: [%.4f, %.4f]" % fixed_length_baseline(lo, hi))

for policy in ("lo", "hi", "alternating", "worst"):
    R = IntervalCoin(lo, hi, policy, q)
    etas = []
    for m in (2, 4, 6, 8):
        fe = Frontend("known", make_plan(m, 1.0, beta), BiasedCoin(q))
        etas.append(m / entropy(Distribution.from_pairs(input_law(fe, R))))
    print(f"{policy:>11}: efficiency over m=2,4,6,8 ->", " ".join(f"{e:.3f}" for e in etas))
