# Extracting bits from a biased coin whose bias is known.
# The stopping rule reads until the model surprisal reaches T, pads the
# prefix to a fixed block, then a Toeplitz hash squeezes it to m bits.
import numpy as np

from vlextract import BiasedCoin, BitReader, build_vlx, extract_seeded, make_plan, verify_pipeline

M = BiasedCoin(0.8)

# small threshold: the whole stopping set fits on one line
fe = build_vlx("known", make_plan(1, 1.0, threshold=2.0), M).frontend
print("stopping set at T=2:", [str(x) for x in sorted(fe.stopping_set(), key=len)])
print("block length n =", fe.n)

# the real thing: 2 output bits within distance 1/4 of uniform
plan = make_plan(2, 0.25)
rng = np.random.default_rng(1)
vlx = build_vlx("known", plan, M, rng=rng)
print(f"k={plan.k}  T={plan.T:g}  n={vlx.spec.n}  seed bits={vlx.spec.seed_length}")

stream = BitReader.from_bits(M.sample(rng, 10_000))
outs = []
while True:
    try:
        outs.append(extract_seeded(vlx, stream).output.to_int())
    except EOFError:
        break
counts = np.bincount(outs, minlength=4)
print(f"{len(outs)} outputs from {stream.position} input bits; frequencies {np.round(counts / counts.sum(), 3)}")

# exact check: enumerate every stopping sequence and every seed
rep = verify_pipeline(vlx, M)
print(f"exact seed-averaged distance {rep.distance_to_uniform:.4f} (target {plan.eps})")
print(f"min-entropy of the block {rep.minentropy_Z:.3f} >= k={plan.k}")
print(f"efficiency m/H(X) = {rep.efficiency:.3f}, mean input length {rep.expected_input_length:.2f}")
