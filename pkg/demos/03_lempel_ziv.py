# Universal extraction with LZ78 phrases.
# The rule parses a fixed number of phrases; each phrase is stored as
# (index of its longest earlier prefix, last bit).
from vlextract import BitReader, MarkovSource, make_plan
from vlextract.frontends import Frontend, lz_min_surprisal, stop_lz
from vlextract.oracle import block_law, input_law, minentropy

out = stop_lz(make_plan(1, 1.0, lz_phrases=4), BitReader.from_bits("1011010100010"))
print("four phrases of 1011010100010 use", out.consumed, "bits; block", out.block.z)

M = MarkovSource([0.5, 0.5], [[0.8, 0.2], [0.3, 0.7]])
plan = make_plan(4, 1.0)
plain = Frontend("lz", plan)
tuned = Frontend("lz", plan, M)
for name, fe in (("length rule", plain), ("calibrated on the model", tuned)):
    hz = minentropy(block_law(fe, input_law(fe, M)))
    print(f"{name}: c={fe.phrases} phrases, n={fe.n}, H_min(Z)={hz:.2f} (need {plan.k})")

# least surprisal over all c-phrase parses grows with c
print([round(lz_min_surprisal(M, c), 2) for c in range(1, 8)])
