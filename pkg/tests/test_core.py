import numpy as np
import pytest

from ribolib.core import (
    Sequence,
    Structure,
    constrained_hamming,
    gc_content,
    parse_dot_bracket,
    render,
    reverse_complement,
    structure_loss,
)
from ribolib.errors import IllegalSymbol, LengthMismatch, UnbalancedStructure


def random_balanced(rng, max_len=40):
    """Random valid dot-bracket string built from a bracket stack."""
    n = int(rng.integers(1, max_len))
    out = []
    depth = 0
    for i in range(n):
        remaining = n - i
        if depth >= remaining:
            out.append(")")
            depth -= 1
            continue
        r = rng.random()
        if r < 0.3 and remaining > depth + 1:
            out.append("(")
            depth += 1
        elif r < 0.6 and depth > 0:
            out.append(")")
            depth -= 1
        else:
            out.append(".")
    out.extend(")" * depth)
    return "".join(out)


class TestParseDotBracket:
    def test_simple_pairs(self):
        s = parse_dot_bracket("((..))")
        assert s.pairs() == [(0, 5), (1, 4)]

    def test_all_unpaired(self):
        assert parse_dot_bracket("....").pairs() == []

    def test_unbalanced_open(self):
        with pytest.raises(UnbalancedStructure):
            parse_dot_bracket("(()")

    def test_unbalanced_close(self):
        with pytest.raises(UnbalancedStructure):
            parse_dot_bracket("())")

    def test_illegal_symbol(self):
        with pytest.raises(IllegalSymbol):
            parse_dot_bracket("..x.")

    def test_empty(self):
        with pytest.raises(IllegalSymbol):
            parse_dot_bracket("")

    def test_round_trip_random(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            text = random_balanced(rng)
            assert render(parse_dot_bracket(text)) == text

    def test_pair_table_symmetry_random(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            s = parse_dot_bracket(random_balanced(rng))
            pt = s.pair_table()
            for i, j in enumerate(pt):
                if j >= 0:
                    assert pt[j] == i
                    assert j != i
            for i, j in s.pairs():
                assert i < j


class TestSequence:
    def test_rejects_dna(self):
        with pytest.raises(IllegalSymbol):
            Sequence("ACGT")

    def test_rejects_empty(self):
        with pytest.raises(IllegalSymbol):
            Sequence("")

    def test_str_len(self):
        s = Sequence("GAUC")
        assert str(s) == "GAUC" and len(s) == 4


class TestGcContent:
    @pytest.mark.parametrize(
        "seq,expected", [("GCGC", 1.0), ("AUAU", 0.0), ("GAUC", 0.5)]
    )
    def test_values(self, seq, expected):
        assert gc_content(Sequence(seq)) == expected

    def test_permutation_invariant(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n = int(rng.integers(1, 50))
            chars = rng.choice(list("ACGU"), n)
            perm = rng.permutation(n)
            assert gc_content("".join(chars)) == gc_content("".join(chars[perm]))


class TestReverseComplement:
    def test_known(self):
        assert reverse_complement("CAGCACUUCA") == "UGAAGUGCUG"

    def test_involution(self):
        assert reverse_complement(reverse_complement("GAUCCGA")) == "GAUCCGA"


class TestConstrainedHamming:
    def test_identity(self):
        assert constrained_hamming("(...)", "(...)") == (0, 5)

    def test_masked_positions_ignored(self):
        assert constrained_hamming("(...)", "??.??") == (0, 1)

    def test_counted_by_hand(self):
        assert constrained_hamming(".....", "(...)") == (2, 5)

    def test_fully_masked_is_zero_zero(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            db = random_balanced(rng)
            assert constrained_hamming(db, "?" * len(db)) == (0, 0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            constrained_hamming("...", "..")

    def test_loss_normalizer(self):
        assert structure_loss(".....", "(...)") == 2 / 5
        assert structure_loss("...", "???") == 0.0
