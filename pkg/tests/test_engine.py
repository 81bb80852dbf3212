import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from reda.engine import (EditOp, RedaConfig, apply_op, augment, make_rng, num_edits, random_deletion,
                         random_insertion, random_mix, random_swap, synonym_replacement)
from reda.errors import EmptyText
from reda.lexicon import SynonymLexicon
from reda.text import LanguageMode, TokenSeq, detokenize, tokenize

import oracles
from oracles import all_outcomes, half_even_edits, outcome_set

EN = LanguageMode.ENGLISH
GOOD = SynonymLexicon.from_mapping({"good": ["fine"]})
EMPTY = SynonymLexicon()


def seq(*tokens):
    return TokenSeq.from_tokens(tokens, EN)


# edit counts

@pytest.mark.parametrize("rate, length, expected", [
    (0.1, 5, 0),   # 0.5 rounds down to 0
    (0.2, 10, 2),
    (0.1, 25, 2),  # 2.5 rounds to even; doubles would say 3
    (0.1, 15, 2),  # 1.5 rounds to even
    (0.2, 0, 0),
    (0.0, 200, 0),
    (1.0, 7, 7),
])
def test_num_edits_examples(rate, length, expected):
    assert num_edits(rate, length) == expected


def test_num_edits_matches_rational_oracle():
    for rate in (0.1, 0.2, 0.3, 0.5, 0.05, 0.15, 0.25):
        for length in range(201):
            assert num_edits(rate, length) == half_even_edits(rate, length), (rate, length)


# config

def test_default_config_values():
    cfg = RedaConfig()
    assert (cfg.rate_sr, cfg.rate_rs, cfg.rate_ri, cfg.rate_rd) == (0.2, 0.2, 0.1, 0.1)
    assert (cfg.n_aug_small, cfg.n_aug_large, cfg.small_corpus_threshold) == (2, 1, 50_000)
    assert (cfg.rm_min_ops, cfg.rm_max_ops, cfg.retry_factor) == (2, 4, 10)
    exp = RedaConfig.experiment()
    assert (exp.rm_min_ops, exp.rm_max_ops, exp.rm_edits_per_op) == (2, 2, 1)


@pytest.mark.parametrize("kwargs", [
    {"rate_sr": 1.5}, {"rate_rd": -0.1}, {"rm_min_ops": 1}, {"rm_max_ops": 5},
    {"rm_min_ops": 3, "rm_max_ops": 2}, {"n_aug_small": 0}, {"retry_factor": 0}, {"seed": -1},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        RedaConfig(**kwargs)


def test_n_aug_threshold():
    cfg = RedaConfig()
    assert cfg.n_aug_for(49_999) == 2
    assert cfg.n_aug_for(50_000) == 1


def test_edit_op_parsing():
    assert EditOp.parse_list("sr, RI,rs,rd,rm") == list(EditOp)
    with pytest.raises(ValueError):
        EditOp.parse("xx")


# single operations

def test_sr_single_outcome():
    out = synonym_replacement(seq("a", "good", "movie"), 1, GOOD, make_rng(0))
    assert out.tokens == ("a", "fine", "movie")


def test_sr_replaces_one_occurrence_only():
    lex = SynonymLexicon.from_mapping({"good": ["fine"]})
    outs = all_outcomes(lambda r: synonym_replacement(seq("good", "x", "good"), 1, lex, r).tokens)
    assert outs == {("fine", "x", "good"), ("good", "x", "fine")}


def test_sr_recomputes_eligibility_each_step():
    lex = SynonymLexicon.from_mapping({"a": ["b"], "b": ["c"]})
    outs = all_outcomes(lambda r: synonym_replacement(seq("a"), 2, lex, r).tokens)
    assert outs == {("c",)}


@pytest.mark.parametrize("fn", [
    lambda s, r: synonym_replacement(s, 0, GOOD, r),
    lambda s, r: random_insertion(s, 0, GOOD, r),
    lambda s, r: random_swap(s, 0, r),
    lambda s, r: random_deletion(s, 0, r),
])
def test_zero_edits_is_identity(fn):
    s = seq("a", "good", "movie", "!")
    assert fn(s, make_rng(1)) == s


def test_empty_lexicon_sr_and_ri_are_noops():
    s = seq("a", "good", "movie")
    assert synonym_replacement(s, 3, EMPTY, make_rng(0)) == s
    assert random_insertion(s, 3, EMPTY, make_rng(0)) == s


def test_ri_outcomes_enumerated():
    outs = all_outcomes(lambda r: random_insertion(seq("a", "good", "movie"), 1, GOOD, r).tokens)
    assert outs == {("fine", "a", "good", "movie"), ("a", "fine", "good", "movie"),
                    ("a", "good", "fine", "movie"), ("a", "good", "movie", "fine")}


def test_rs_examples():
    assert random_swap(seq("A", "B"), 1, make_rng(5)).tokens == ("B", "A")
    assert random_swap(seq("A"), 1, make_rng(5)).tokens == ("A",)


def test_rs_swaps_flags_with_tokens():
    out = random_swap(seq("x", ","), 1, make_rng(0))
    assert out.tokens == (",", "x") and out.word_flags == (False, True)


def test_rd_examples():
    assert all_outcomes(lambda r: random_deletion(seq("A", "B"), 1, r).tokens) == {("A",), ("B",)}
    assert random_deletion(seq("A"), 1, make_rng(0)).tokens == ("A",)
    assert random_deletion(seq("A", "B", "C"), 10, make_rng(0)).tokens in {("A",), ("B",), ("C",)}


def test_rm_with_forced_sr_and_rs():
    # empty lexicon: SR is a no-op, so SR+RS in either order yields one transposition
    base = (("A", True), ("B", True), ("C", True))
    forced = set()
    for order in (("sr", "rs"), ("rs", "sr")):
        states = {base}
        for op in order:
            states = oracles.reachable(states, op, 1, {})
        forced |= {tuple(t for t, _ in st) for st in states}
    assert forced == {("B", "A", "C"), ("C", "B", "A"), ("A", "C", "B")}
    cfg = RedaConfig.experiment()
    engine = all_outcomes(lambda r: random_mix(seq("A", "B", "C"), cfg, EMPTY, r).tokens)
    assert forced <= engine


def test_rm_single_token_unchanged():
    cfg = RedaConfig()
    for s in range(50):
        assert random_mix(seq("A"), cfg, EMPTY, make_rng(s)).tokens == ("A",)


def test_rm_length_bound_under_preset():
    cfg = RedaConfig.experiment()
    lex = SynonymLexicon.from_mapping({"a": ["b", "c"], "b": ["a"]})
    for n in range(1, 8):
        s = seq(*(["a", "b", "x"] * 3)[:n])
        for length in {len(o) for o in all_outcomes(lambda r: random_mix(s, cfg, lex, r).tokens)}:
            assert n - 2 <= length <= n + 2


def test_rm_picks_distinct_ops_count_in_range():
    # with one edit each and a one-synonym lexicon, RI adds exactly one token and RD removes one
    cfg = RedaConfig(rm_min_ops=2, rm_max_ops=4)
    lex = SynonymLexicon.from_mapping({"a": ["z"]})
    outs = all_outcomes(lambda r: random_mix(seq("a", "b", "c"), cfg, lex, r).tokens)
    assert min(map(len, outs)) == 2 and max(map(len, outs)) == 4


# augment

def test_augment_single_unique_result():
    cfg = RedaConfig()
    assert augment("a good movie", EditOp.SR, 2, cfg, GOOD, make_rng(0)) == ["a fine movie"]


def test_augment_empty_lexicon_yields_nothing():
    assert augment("a good movie", EditOp.SR, 2, RedaConfig(), EMPTY, make_rng(0)) == []


def test_augment_swap_two_tokens():
    cfg = RedaConfig(rate_rs=0.5)
    assert augment("A B", EditOp.RS, 2, cfg, EMPTY, make_rng(0)) == ["B A"]


def test_augment_empty_text():
    with pytest.raises(EmptyText):
        augment("  ", EditOp.RS, 1, RedaConfig(), EMPTY, make_rng(0))


def test_augment_rejects_respaced_original():
    # "a, a" re-joins as "a , a"; an unchanged result must not count
    cfg = RedaConfig(rate_rs=1.0)
    outs = augment("a, a", EditOp.RS, 3, cfg, EMPTY, make_rng(0))
    assert "a , a" not in outs and "a, a" not in outs


def test_augment_deterministic():
    lex = SynonymLexicon.from_mapping({"quick": ["fast", "speedy"], "dog": ["hound"]})
    text = "the quick brown fox jumps over the lazy dog ."
    for op in EditOp:
        a = augment(text, op, 3, RedaConfig(seed=1), lex, make_rng(99))
        b = augment(text, op, 3, RedaConfig(seed=1), lex, make_rng(99))
        assert a == b


def test_augment_results_are_reachable():
    lex = SynonymLexicon.from_mapping({"quick": ["fast"], "dog": ["hound", "pup"]})
    cfg = RedaConfig(rate_sr=0.5, rate_ri=0.5, rate_rs=0.5, rate_rd=0.5)
    tokens = ("quick", "dog", "!")
    rates = {"sr": 0.5, "ri": 0.5, "rs": 0.5, "rd": 0.5}
    lexmap = {h: list(s) for h, s in lex.entries.items()}
    for op in EditOp:
        allowed = {" ".join(t) for t in outcome_set(tokens, op.value, lexmap, rates=rates, rm=(2, 4, 1))}
        for seed in range(20):
            for out in augment("quick dog!", op, 4, cfg, lex, make_rng(seed)):
                assert out in allowed


# property laws

token_lists = st.lists(st.sampled_from(["a", "b", "c", "good", ",", "!", "x-y"]), min_size=1, max_size=12)
lexicons = st.dictionaries(st.sampled_from(["a", "b", "good", "x-y"]),
                           st.lists(st.sampled_from(["a", "b", "c", "fine", "q"]), min_size=1, max_size=3),
                           max_size=4).map(SynonymLexicon.from_mapping)


@given(token_lists, st.integers(0, 6), lexicons, st.integers(0, 2 ** 32))
def test_length_laws(tokens, n, lex, seed):
    s = seq(*tokens)
    assert len(synonym_replacement(s, n, lex, random.Random(seed))) == len(s)
    assert Counter(random_swap(s, n, random.Random(seed)).tokens) == Counter(s.tokens)
    out = random_deletion(s, n, random.Random(seed))
    assert len(out) == len(s) - min(n, len(s) - 1) >= 1
    ins = random_insertion(s, n, lex, random.Random(seed))
    assert len(s) <= len(ins) <= len(s) + n


@given(token_lists, lexicons, st.integers(0, 2 ** 32))
@settings(max_examples=50)
def test_apply_op_keeps_flags_consistent(tokens, lex, seed):
    s = seq(*tokens)
    for op in EditOp:
        out = apply_op(s, op, RedaConfig(), lex, random.Random(seed))
        assert out.word_flags == tuple(any(c.isalnum() for c in t) for t in out.tokens)


@given(st.text(alphabet="abc ,!", min_size=1, max_size=30).filter(lambda t: t.strip()),
       lexicons, st.sampled_from(list(EditOp)), st.integers(1, 4), st.integers(0, 2 ** 32))
def test_dedup_guarantee(text, lex, op, n_aug, seed):
    cfg = RedaConfig(rate_sr=0.3, rate_rs=0.3, rate_ri=0.3, rate_rd=0.3)
    outs = augment(text, op, n_aug, cfg, lex, random.Random(seed))
    assert len(outs) == len(set(outs)) <= n_aug
    assert text not in outs
    assert detokenize(tokenize(text)) not in outs
