# Approximating an unknown biased coin.
# No model is needed: the rule stops once the observed zero/one counts admit
# at least 2^T arrangements, and encodes (majority flag, minority count, index).
from collections import Counter

import numpy as np

from vlextract import BiasedCoin, BitReader, BitSequence, make_plan
from vlextract.frontends import Frontend, coin_index, decode_coin, encode_coin
from vlextract.oracle import Distribution, block_law, minentropy

T = 3.0
fe = Frontend("coin", make_plan(1, 1.0, threshold=T))
S = fe.stopping_set()
print(f"T={T}: {len(S)} stopping sequences, block length {fe.n}")
print("stopping lengths:", dict(sorted(Counter(len(x) for x in S).items())))

x = BitSequence("1101110")
flag, j, idx = coin_index(x, T)
z = encode_coin(x, T, 3).z
print(f"{x}: flag={flag} minority={j} index={idx} -> block {z} -> decodes to {decode_coin(z, T)}")

# whatever the bias, equal-count arrangements are equally likely, so the
# block min-entropy tracks T until all-same runs become likely
for p in (0.5, 0.7, 0.8, 0.9):
    law = [(s, BiasedCoin(p).prob(s)) for s in S]
    print(f"p={p}: H_min(Z)={minentropy(block_law(fe, law)):.3f}")
