from itertools import combinations, product

import pytest
from hypothesis import given, strategies as st

from vlextract.bits import BitReader, BitSequence
from vlextract.codec import PhraseTable, binom, lz_decode, lz_insert, rank, unrank


def test_rank_examples():
    assert rank("0110") == 2
    assert rank("0011") == 0
    assert rank("1100") == 5
    assert unrank(4, 2, 2) == BitSequence("0110")


@pytest.mark.parametrize("length", range(0, 11))
def test_rank_is_lexicographic_position(length):
    for ones in range(length + 1):
        words = sorted(BitSequence(w) for w in product((0, 1), repeat=length) if sum(w) == ones)
        assert [rank(w) for w in words] == list(range(binom(length, ones)))
        assert [unrank(length, ones, r) for r in range(len(words))] == words


def test_unrank_rejects_out_of_range():
    with pytest.raises(ValueError):
        unrank(4, 2, 6)


@st.composite
def same_multiset_pair(draw):
    n = draw(st.integers(1, 40))
    k = draw(st.integers(0, n))
    a = draw(st.permutations([1] * k + [0] * (n - k)))
    b = draw(st.permutations([1] * k + [0] * (n - k)))
    return BitSequence(a), BitSequence(b)


@given(same_multiset_pair())
def test_rank_order_isomorphism(pair):
    a, b = pair
    assert (a < b) == (rank(a) < rank(b))
    assert unrank(len(a), a.ones(), rank(a)) == a


def test_lz_parse_by_insertion():
    table = PhraseTable()
    r = BitReader.from_bits("010111001110000")
    codes = [lz_insert(table, r) for _ in range(7)]
    assert codes == [(0, 0), (0, 1), (1, 1), (2, 1), (1, 0), (4, 1), (5, 0)]
    assert [str(p) for p in lz_decode(codes)] == ["0", "1", "01", "11", "00", "111", "000"]
