import itertools
import sys

import numpy as np
import pytest

from ribolib import kernels
from ribolib.errors import ExternalFolderFailure, TooLong
from ribolib.fold import (
    ExternalEngine,
    InternalEngine,
    brute_force_fold,
    cotranscriptional_fold,
    make_engine,
)


@pytest.fixture(scope="module")
def engine():
    return InternalEngine()


def random_seq(rng, n):
    return "".join(rng.choice(list("ACGU"), n))


class TestInternalFold:
    def test_hairpin(self, engine):
        assert engine.fold_db("GGGAAACCC") == "(((...)))"

    def test_no_complementary(self, engine):
        assert engine.fold_db("AAAAA") == "....."

    def test_loop_constraint_blocks_short(self, engine):
        assert engine.fold_db("GC") == ".."

    def test_min_loop_validation(self):
        with pytest.raises(ValueError):
            InternalEngine(min_hairpin_loop=2)

    def test_deterministic(self, engine):
        rng = np.random.default_rng(21)
        for _ in range(50):
            s = random_seq(rng, int(rng.integers(1, 60)))
            assert engine.fold_db(s) == InternalEngine().fold_db(s)

    def test_no_pair_closer_than_min_loop(self, engine):
        rng = np.random.default_rng(22)
        for _ in range(200):
            s = random_seq(rng, int(rng.integers(1, 60)))
            for i, j in engine.fold(s).pairs():
                assert j - i > engine.min_hairpin_loop

    def test_matches_brute_force_exhaustive_small(self, engine):
        for n in range(1, 7):
            for tup in itertools.product("ACGU", repeat=n):
                s = "".join(tup)
                max_pairs, optimal = brute_force_fold(s)
                folded = engine.fold(s)
                assert folded.pair_count == max_pairs, s
                assert folded.symbols in optimal, s

    def test_matches_brute_force_sampled(self, engine):
        rng = np.random.default_rng(23)
        for _ in range(150):
            s = random_seq(rng, int(rng.integers(7, 13)))
            max_pairs, optimal = brute_force_fold(s)
            folded = engine.fold(s)
            assert folded.pair_count == max_pairs, s
            assert folded.symbols in optimal, s


class TestBruteForce:
    def test_hairpin_max(self):
        assert brute_force_fold("GGGAAACCC")[0] == 3

    def test_auau_min_loop(self):
        assert brute_force_fold("AUAU", min_loop=3)[0] == 0

    def test_rejects_empty(self):
        with pytest.raises(Exception):
            brute_force_fold("")

    def test_rejects_long(self):
        with pytest.raises(TooLong):
            brute_force_fold("A" * 21)


class TestKernelPaths:
    def test_numpy_and_loop_tables_agree(self):
        rng = np.random.default_rng(24)
        for _ in range(100):
            codes = rng.integers(0, 4, int(rng.integers(1, 70))).astype(np.int8)
            a = kernels._nussinov_table_loops(codes, kernels.PAIRABLE_MATRIX, 3)
            b = kernels.nussinov_table_numpy(codes, kernels.PAIRABLE_MATRIX, 3)
            assert np.array_equal(a, b)

    def test_active_path_matches_reference(self):
        rng = np.random.default_rng(25)
        for _ in range(50):
            codes = rng.integers(0, 4, int(rng.integers(1, 50))).astype(np.int8)
            a = kernels.nussinov_table(codes, kernels.PAIRABLE_MATRIX, 3)
            b = kernels.nussinov_table_numpy(codes, kernels.PAIRABLE_MATRIX, 3)
            assert np.array_equal(a, b)


class TestCotranscriptional:
    def test_prefix_schedule_17(self, engine):
        rng = np.random.default_rng(26)
        trace = cotranscriptional_fold(engine, random_seq(rng, 17), 5)
        assert trace.prefix_lengths == (5, 10, 15, 17)

    def test_prefix_schedule_exact_multiple(self, engine):
        rng = np.random.default_rng(27)
        trace = cotranscriptional_fold(engine, random_seq(rng, 10), 5)
        assert trace.prefix_lengths == (5, 10)

    def test_prefix_schedule_66(self, engine):
        rng = np.random.default_rng(28)
        trace = cotranscriptional_fold(engine, random_seq(rng, 66), 5)
        assert len(trace.prefix_lengths) == 14
        assert trace.prefix_lengths[:3] == (5, 10, 15)
        assert trace.prefix_lengths[-2:] == (65, 66)

    def test_prefix_structure_lengths(self, engine):
        rng = np.random.default_rng(29)
        seq = random_seq(rng, 23)
        trace = cotranscriptional_fold(engine, seq, 5)
        for k, st in zip(trace.prefix_lengths, trace.prefix_structures):
            assert len(st) == k

    def test_final_equals_full_fold(self, engine):
        rng = np.random.default_rng(30)
        for _ in range(20):
            seq = random_seq(rng, int(rng.integers(6, 40)))
            trace = cotranscriptional_fold(engine, seq, 5)
            assert trace.final().symbols == engine.fold_db(seq)

    def test_bad_speed(self, engine):
        with pytest.raises(ValueError):
            cotranscriptional_fold(engine, "GGGAAACCC", 0)


def _py_folder_command(body: str) -> list[str]:
    return [sys.executable, "-c", body]


class TestExternalEngine:
    def test_reads_first_line(self):
        eng = ExternalEngine(_py_folder_command(
            "import sys; s = sys.stdin.readline().strip(); print('.' * len(s))"
        ))
        assert eng.fold_db("GGGAAACCC") == "........."

    def test_tolerates_echoed_sequence(self):
        eng = ExternalEngine(_py_folder_command(
            "import sys; s = sys.stdin.readline().strip();"
            "print(s); print('.' * len(s), '(-0.00)')"
        ))
        assert eng.fold_db("GAUC") == "...."

    def test_nonzero_exit(self):
        eng = ExternalEngine(_py_folder_command("import sys; sys.exit(3)"))
        with pytest.raises(ExternalFolderFailure):
            eng.fold_db("GAUC")

    def test_wrong_length_output(self):
        eng = ExternalEngine(_py_folder_command("print('..')"))
        with pytest.raises(ExternalFolderFailure):
            eng.fold_db("GAUC")

    def test_unbalanced_output(self):
        eng = ExternalEngine(_py_folder_command(
            "import sys; s = sys.stdin.readline().strip(); print('(' * len(s))"
        ))
        with pytest.raises(ExternalFolderFailure):
            eng.fold_db("GAUC")

    def test_make_engine_specs(self):
        assert isinstance(make_engine("internal"), InternalEngine)
        ext = make_engine("external:rnafold --noPS")
        assert isinstance(ext, ExternalEngine)
        assert ext.command == ["rnafold", "--noPS"]
        with pytest.raises(ValueError):
            make_engine("magic")

    def test_cache_returns_same_object_value(self):
        calls = []

        class Counting(InternalEngine):
            def _fold_impl(self, seq):
                calls.append(seq)
                return super()._fold_impl(seq)

        eng = Counting()
        a = eng.fold_db("GGGAAACCC")
        b = eng.fold_db("GGGAAACCC")
        assert a == b and calls == ["GGGAAACCC"]
