import itertools

import numpy as np
import pytest

from suggestkit import policy
from suggestkit.features import DIM
from suggestkit.policy import (
    LogLinearPolicy,
    PolicyError,
    load_weights,
    reference_distribution,
    reference_policy,
    reference_weights,
    save_weights,
)

from conftest import random_context


def test_reference_weights_shape():
    theta = reference_weights(0.5)
    assert theta.shape == (DIM,)
    assert theta[0] == 2.0
    assert np.all(theta[1:] == 0.0)
    with pytest.raises(PolicyError):
        reference_weights(0.0)


def test_weight_validation(lm, lex):
    with pytest.raises(PolicyError):
        LogLinearPolicy(np.zeros(DIM - 1), lm, lex)
    bad = np.zeros(DIM)
    bad[3] = np.inf
    with pytest.raises(PolicyError):
        LogLinearPolicy(bad, lm, lex)


def test_distribution_is_softmax_of_scores(toy_lm, lex):
    # hand oracle: with theta = (1, w_long, pos weights...) the distribution
    # must equal exp(score)/sum(exp(score)) computed independently per word
    rng = np.random.default_rng(7)
    theta = rng.normal(size=DIM)
    pol = LogLinearPolicy(theta, toy_lm, lex)
    ctx = ("<bor>", "aa")
    probs = pol.word_distribution(ctx)
    from suggestkit import features

    scores = np.array(
        [theta @ features.extract(w, ctx, toy_lm, lex) for w in toy_lm.vocab]
    )
    expect = np.exp(scores)
    expect /= expect.sum()
    assert probs == pytest.approx(expect, rel=1e-12)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_temperature_policy_equals_powered_base(lm, lex, small_docs, table):
    # theta = (1/tau, 0, ...) must reproduce base^(1/tau) renormalized
    rng = np.random.default_rng(8)
    for tau in (0.25, 0.5, 1.0, 2.0):
        pol = reference_policy(lm, lex, tau, table=table)
        for _ in range(10):
            ctx = random_context(rng, small_docs)
            a = pol.word_distribution(ctx)
            b = reference_distribution(lm, tau, ctx)
            assert np.max(np.abs(a - b)) < 1e-10


def test_extreme_weights_stay_finite(lm, lex, table, small_docs):
    rng = np.random.default_rng(9)
    for sign in (+1.0, -1.0):
        theta = np.full(DIM, sign * 50.0)
        pol = LogLinearPolicy(theta, lm, lex, table=table)
        ctx = random_context(rng, small_docs)
        probs = pol.word_distribution(ctx)
        assert np.all(np.isfinite(probs))
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)


def test_sample_word_frequencies(toy_lm, lex):
    pol = reference_policy(toy_lm, lex, 1.0)
    ctx = ("<bor>",)
    expect = pol.word_distribution(ctx)
    rng = np.random.default_rng(10)
    counts = np.zeros(len(toy_lm.vocab))
    n = 20000
    for _ in range(n):
        w, p = pol.sample_word(ctx, rng)
        wid = toy_lm.word_to_id[w]
        counts[wid] += 1
        assert p == expect[wid]
    freq = counts / n
    assert np.max(np.abs(freq - expect)) < 0.02


def test_phrase_probability_matches_sampling_frequency(toy_lm, lex):
    # enumerate all 2-word phrases over the toy vocabulary and compare
    # sampled frequencies with the policy's own phrase probabilities
    pol = reference_policy(toy_lm, lex, 1.0)
    ctx = ("<bor>", "aa")
    rng = np.random.default_rng(11)
    n = 100000
    counts: dict[tuple[str, ...], int] = {}
    for _ in range(n):
        s = pol.sample_phrase(ctx, length=2, rng=rng)
        counts[s.words] = counts.get(s.words, 0) + 1
        assert s.propensity == pytest.approx(np.prod(s.per_word_probs), rel=1e-15)
    top = sorted(counts, key=counts.get, reverse=True)[:8]
    for words in top:
        model_p = np.exp(pol.phrase_log_probability(ctx, words))
        freq = counts[words] / n
        assert freq == pytest.approx(model_p, rel=0.1, abs=0.004), words
    # enumeration sanity: phrase probabilities over all pairs sum to 1
    total = sum(
        np.exp(pol.phrase_log_probability(ctx, pair))
        for pair in itertools.product(toy_lm.vocab, repeat=2)
    )
    assert total == pytest.approx(1.0, abs=1e-9)


def test_phrase_log_probability_consistent_with_per_word(ref_policy, small_docs):
    rng = np.random.default_rng(12)
    for _ in range(20):
        ctx = random_context(rng, small_docs)
        s = ref_policy.sample_phrase(ctx, length=6, rng=rng)
        assert ref_policy.phrase_log_probability(ctx, s.words) == pytest.approx(
            sum(np.log(p) for p in s.per_word_probs), rel=1e-12
        )


def test_suggestion_set_distinct_first_words(ref_policy, small_docs):
    rng = np.random.default_rng(13)
    for _ in range(30):
        ctx = random_context(rng, small_docs)
        sset = ref_policy.generate_suggestion_set(ctx, k=3, length=6, rng=rng)
        firsts = [s.words[0] for s in sset.suggestions]
        assert len(set(firsts)) == 3
        for s in sset.suggestions:
            assert len(s.words) == 6
            assert len(s.per_word_probs) == 6
            assert s.propensity > 0.0


def test_suggestion_set_validation(ref_policy, toy_lm, lex):
    with pytest.raises(PolicyError):
        ref_policy.generate_suggestion_set(("the",), k=0)
    tiny = reference_policy(toy_lm, lex, 0.5)
    with pytest.raises(PolicyError):
        tiny.generate_suggestion_set(("<bor>",), k=len(toy_lm.vocab) + 1)


def test_weights_roundtrip(tmp_path):
    theta = np.linspace(-2.5, 3.0, DIM)
    path = tmp_path / "weights.txt"
    save_weights(path, theta)
    assert np.array_equal(load_weights(path), theta)


def test_load_weights_rejects_incomplete(tmp_path):
    path = tmp_path / "partial.txt"
    path.write_text("lm 2.0\nlong_word 1.0\n")
    with pytest.raises(PolicyError, match="missing"):
        load_weights(path)


def test_load_weights_rejects_unknown_name(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("not_a_feature 1.0\n")
    with pytest.raises(PolicyError):
        load_weights(path)
