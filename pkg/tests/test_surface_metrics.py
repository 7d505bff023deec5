import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from codescore import (
    DegeneracyError,
    TrivialSet,
    bleu,
    chrf,
    crystal_bleu,
    rouge_l,
    rouge_n,
    tokenize,
    trivial_ngrams,
)
from codescore.surface_metrics import EMPTY_TRIVIAL_SET, ngram_profile
from oracles import (
    oracle_bleu,
    oracle_chrf,
    oracle_rouge_l,
    oracle_rouge_n,
)

tokens_st = st.lists(st.sampled_from(list("abcdexyz") + ["foo", "bar"]), min_size=1, max_size=9)
text_st = st.text(alphabet="abcxyz (.)", min_size=1, max_size=20)


class TestTokenize:
    def test_splits_punctuation(self):
        assert tokenize("os.rmdir(f)") == ["os", ".", "rmdir", "(", "f", ")"]

    def test_keeps_identifiers_whole(self):
        assert tokenize("del the_dir") == ["del", "the_dir"]

    def test_operators_are_single_chars(self):
        assert tokenize("x ** 0.5") == ["x", "*", "*", "0", ".", "5"]


class TestNGramProfile:
    @given(tokens=tokens_st, n=st.integers(1, 5))
    def test_total_count(self, tokens, n):
        profile = ngram_profile(tokens, n)
        assert profile.total == max(0, len(tokens) - n + 1)
        assert all(count >= 1 for count in profile.counts.values())


class TestBleu:
    def test_identical(self):
        assert bleu(["a", "b", "c"], ["a", "b", "c"]) == pytest.approx(1.0, abs=1e-12)

    def test_worked_example(self):
        # p1 = 2/3 unsmoothed, p2 = (1+1)/(2+1), p3 = (0+1)/(1+1), BP = 1
        assert bleu(["a", "b", "c"], ["a", "b", "d"]) == pytest.approx(0.60571, abs=1e-4)

    def test_disjoint_tokens_floor(self):
        # zero unigram overlap zeroes the geometric mean (frozen via oracle)
        assert bleu(["a", "b", "c"], ["x", "y", "z"]) == 0.0

    def test_brevity_penalty_one_sided(self):
        short = bleu(["a", "b"], ["a", "b", "c", "d"])
        assert short < bleu(["a", "b", "c", "d"], ["a", "b"])

    def test_empty_inputs(self):
        with pytest.raises(ValueError):
            bleu([], ["a"])
        with pytest.raises(ValueError):
            bleu(["a"], [])

    @given(cand=tokens_st, ref=tokens_st)
    def test_matches_oracle(self, cand, ref):
        assert bleu(cand, ref) == pytest.approx(oracle_bleu(cand, ref), abs=1e-12)

    @given(cand=tokens_st, ref=tokens_st)
    def test_range(self, cand, ref):
        assert 0.0 <= bleu(cand, ref) <= 1.0 + 1e-12


class TestChrf:
    def test_identical(self):
        assert chrf("def f(x):", "def f(x):") == pytest.approx(1.0, abs=1e-12)

    def test_short_strings_skip_empty_orders(self):
        assert chrf("ab", "ab", max_n=6) == pytest.approx(1.0, abs=1e-12)

    def test_frozen_oracle_value(self):
        assert chrf("abc", "abd") == pytest.approx(0.3888888888888888, abs=1e-12)

    def test_whitespace_run_invariance(self):
        assert chrf("a  b\t c", "x y") == pytest.approx(chrf("a b c", "x  y"), abs=1e-15)

    def test_both_empty_error(self):
        with pytest.raises(ValueError):
            chrf("   ", "\t\n")

    def test_one_sided_empty_scores_zero(self):
        assert chrf("", "abc") == pytest.approx(0.0, abs=1e-12)

    @given(cand=text_st, ref=text_st)
    def test_matches_oracle(self, cand, ref):
        assume(cand.strip() or ref.strip())  # both-empty is the error case
        assert chrf(cand, ref) == pytest.approx(oracle_chrf(cand, ref), abs=1e-12)


class TestRouge:
    def test_rouge_n_identical(self):
        assert rouge_n(["a", "b"], ["a", "b"], 1) == pytest.approx(1.0, abs=1e-12)

    def test_rouge_1_worked(self):
        assert rouge_n(["a", "b"], ["b", "c"], 1) == pytest.approx(0.5, abs=1e-12)

    def test_rouge_2_no_bigrams(self):
        assert rouge_n(["a"], ["a", "b"], 2) == 0.0

    def test_rouge_l_worked(self):
        assert rouge_l(["a", "x", "b"], ["a", "b"]) == pytest.approx(0.8, abs=1e-12)

    def test_rouge_l_disjoint(self):
        assert rouge_l(["a", "b"], ["x", "y"]) == 0.0

    @given(cand=tokens_st, ref=tokens_st)
    def test_rouge_1_symmetric(self, cand, ref):
        assert rouge_n(cand, ref, 1) == pytest.approx(rouge_n(ref, cand, 1), abs=1e-15)

    @given(cand=tokens_st, ref=tokens_st, n=st.integers(1, 3))
    def test_rouge_n_matches_oracle(self, cand, ref, n):
        assert rouge_n(cand, ref, n) == pytest.approx(oracle_rouge_n(cand, ref, n), abs=1e-12)

    @given(cand=tokens_st, ref=tokens_st)
    def test_rouge_l_matches_oracle(self, cand, ref):
        assert rouge_l(cand, ref) == pytest.approx(oracle_rouge_l(cand, ref), abs=1e-12)


class TestTrivialNgrams:
    def test_k_zero(self):
        ts = trivial_ngrams([["a", "b"]], k=0)
        assert ts.ngrams == frozenset()

    def test_most_frequent_selected(self):
        ts = trivial_ngrams([["a", "a", "b"]], k=1, orders=(1,))
        assert ts.ngrams == frozenset({("a",)})

    def test_lexicographic_tie_break(self):
        ts = trivial_ngrams([["b", "a"]], k=1, orders=(1,))
        assert ts.ngrams == frozenset({("a",)})

    def test_bounded_by_orders_times_k(self):
        corpus = [["a", "b", "c", "a", "b"], ["c", "d", "e"]]
        ts = trivial_ngrams(corpus, k=2, orders=(1, 2))
        assert len(ts.ngrams) <= 2 * 2

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            trivial_ngrams([], k=5)


class TestCrystalBleu:
    def test_empty_trivial_set_reduces_to_bleu(self):
        cand, ref = ["a", "b", "c"], ["a", "b", "d"]
        assert crystal_bleu(cand, ref, EMPTY_TRIVIAL_SET) == bleu(cand, ref)

    @given(cand=tokens_st, ref=tokens_st)
    def test_reduction_is_exact_everywhere(self, cand, ref):
        assert crystal_bleu(cand, ref, EMPTY_TRIVIAL_SET) == bleu(cand, ref)

    def test_identical_with_trivial_overlap_still_perfect(self):
        cand = ["a", "b", "c", "d"]
        trivial = TrivialSet(ngrams=frozenset({("a",)}), k=1)
        assert crystal_bleu(cand, list(cand), trivial) == pytest.approx(1.0, abs=1e-12)

    def test_only_trivial_shared_collapses(self):
        # shared content is entirely trivial; remaining tokens never match
        cand = ["print", "(", "x", ")"]
        ref = ["print", "(", "y", ")"]
        trivial = TrivialSet(
            ngrams=frozenset({("print",), ("(",), (")",), ("print", "(")}), k=4
        )
        value = crystal_bleu(cand, ref, trivial)
        assert value == pytest.approx(
            oracle_bleu(cand, ref, exclude=trivial.ngrams), abs=1e-12
        )
        assert value < 0.5

    def test_all_orders_skipped_errors(self):
        trivial = TrivialSet(ngrams=frozenset({("a",)}), k=1)
        with pytest.raises(DegeneracyError, match="no informative"):
            crystal_bleu(["a"], ["a"], trivial)

    @given(cand=tokens_st, ref=tokens_st, data=st.data())
    def test_matches_oracle_with_exclusions(self, cand, ref, data):
        pool = sorted({tuple(cand[i : i + 1]) for i in range(len(cand))}
                      | {tuple(ref[i : i + 1]) for i in range(len(ref))})
        exclude = frozenset(data.draw(st.sets(st.sampled_from(pool))) if pool else ())
        expected = oracle_bleu(cand, ref, exclude=exclude)
        trivial = TrivialSet(ngrams=exclude, k=len(exclude))
        if expected is None:
            with pytest.raises(DegeneracyError):
                crystal_bleu(cand, ref, trivial)
        else:
            assert crystal_bleu(cand, ref, trivial) == pytest.approx(expected, abs=1e-12)
