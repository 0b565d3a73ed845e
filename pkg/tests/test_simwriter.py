import numpy as np
import pytest

from suggestkit import corpus, simwriter
from suggestkit.policy import Suggestion, SuggestionSet, reference_policy
from suggestkit.simwriter import (
    AcceptanceDistribution,
    DesirabilityParams,
    SimulationError,
    acceptance_distribution,
    desirability,
    predictive_likelihoods,
    simulate_session,
    true_reward,
)


def _sugg(words):
    n = len(words)
    return Suggestion(tuple(words), tuple([0.1] * n), 0.1**n)


def test_params_validation():
    with pytest.raises(SimulationError):
        DesirabilityParams(kind="word-count")
    with pytest.raises(SimulationError):
        DesirabilityParams(scale=np.inf)


def test_desirability_counts_long_words():
    params = DesirabilityParams(scale=10.0)
    assert desirability(_sugg(["the", "cat", "sat"]), params) == 0.0
    assert desirability(_sugg(["the", "service", "was", "amazing"]), params) == 20.0
    # punctuation and short contractions don't count
    assert desirability(_sugg(["didn't", "!", "great"]), params) == 0.0


def test_acceptance_hand_case_exact():
    # p = (0.2, 0.1, 0.05), D = (ln 2, 0, 0):
    #   Z = 1 - 0.2(1-2) - 0.1*0 - 0.05*0 = 1.2
    #   a = (0.4, 0.1, 0.05)/1.2,  a_reject = 0.65/1.2
    acc = acceptance_distribution([0.2, 0.1, 0.05], 0.65, [np.log(2.0), 0.0, 0.0])
    assert acc.accept[0] == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert acc.accept[1] == pytest.approx(0.1 / 1.2, rel=1e-15)
    assert acc.accept[2] == pytest.approx(0.05 / 1.2, rel=1e-15)
    assert acc.reject == pytest.approx(0.65 / 1.2, rel=1e-15)


def test_acceptance_zero_desirability_is_identity():
    p = np.array([0.3, 0.2, 0.1])
    acc = acceptance_distribution(p, 0.4, np.zeros(3))
    assert np.array_equal(acc.as_vector(), np.array([0.3, 0.2, 0.1, 0.4]))


def test_acceptance_sums_to_one():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = rng.dirichlet(np.ones(4)) * rng.uniform(0.2, 1.0)
        d = rng.uniform(-3, 3, size=3)
        acc = acceptance_distribution(p[:3], 1.0 - p[:3].sum(), d)
        assert acc.as_vector().sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(acc.as_vector() >= 0.0)


def test_acceptance_monotone_in_desirability():
    p = [0.2, 0.1, 0.05]
    p_rej = 0.65
    prev = -np.inf
    for d0 in np.linspace(-2.0, 4.0, 13):
        acc = acceptance_distribution(p, p_rej, [d0, 0.0, 0.0])
        assert acc.accept[0] > prev
        prev = acc.accept[0]
    # raising one suggestion's desirability lowers everyone else's share
    lo = acceptance_distribution(p, p_rej, [0.0, 0.0, 0.0])
    hi = acceptance_distribution(p, p_rej, [3.0, 0.0, 0.0])
    assert hi.accept[1] < lo.accept[1]
    assert hi.reject < lo.reject


def test_acceptance_monotone_in_likelihood():
    prev = -np.inf
    for p0 in np.linspace(0.01, 0.5, 10):
        acc = acceptance_distribution([p0, 0.1], 1.0 - p0 - 0.1, [1.0, 0.0])
        assert acc.accept[0] > prev
        prev = acc.accept[0]


def test_acceptance_validation():
    with pytest.raises(SimulationError):
        acceptance_distribution([0.2, 0.1], 0.7, [0.0])
    with pytest.raises(SimulationError):
        acceptance_distribution([-0.1, 0.2], 0.9, [0.0, 0.0])
    with pytest.raises(SimulationError):
        acceptance_distribution([0.8, 0.8], -0.6, [0.0, 0.0])


def test_predictive_likelihoods_product_of_lm_probs(lm):
    ctx = ("the", "food", "was")
    words = ("very", "good", ".")
    sset = SuggestionSet(ctx, (_sugg(words),))
    p, p_rej = predictive_likelihoods(sset, lm)
    expect = 1.0
    c = list(ctx)
    for w in words:
        expect *= np.exp(lm.log_prob(w, c))
        c.append(w)
    assert p[0] == pytest.approx(expect, rel=1e-12)
    assert p_rej == pytest.approx(1.0 - p[0], rel=1e-12)


def test_predictive_likelihoods_cap(toy_lm):
    # single-word "phrases" can have near-total probability mass; the cap
    # keeps rejection strictly positive
    ssets = SuggestionSet(
        ("<bor>",), tuple(_sugg([w]) for w in toy_lm.vocab)
    )
    p, p_rej = predictive_likelihoods(ssets, toy_lm)
    assert p.sum() <= 1.0 - simwriter.LIKELIHOOD_CAP_EPS + 1e-15
    assert p_rej > 0.0


def test_simulate_session_record_shape(lm, lex, ref_policy, small_docs):
    locs = corpus.sample_locations(small_docs, 25, min_context=1, seed=1)
    writer = DesirabilityParams()
    rng = np.random.default_rng(2)
    records, achieved = simulate_session(
        locs, small_docs, ref_policy, writer, lm, lex, rng
    )
    assert len(records) == 3 * len(locs)
    by_id = {d.id: d for d in small_docs}
    for i in range(0, len(records), 3):
        chunk = records[i : i + 3]
        assert len({r.words[0] for r in chunk}) == 3  # distinct first words
        assert all(r.context == chunk[0].context for r in chunk)
        assert all(len(r.words) == 6 for r in chunk)
        rewards = [r.reward for r in chunk]
        assert sum(1 for r in rewards if r > 0) <= 1  # at most one accepted
        assert all(r in (0.0, 6.0) for r in rewards)
        assert chunk[0].group in by_id
    total = sum(r.reward for r in records)
    assert achieved == pytest.approx(total / len(locs), rel=1e-12)


def test_simulate_session_deterministic(lm, lex, ref_policy, small_docs):
    locs = corpus.sample_locations(small_docs, 10, min_context=1, seed=3)
    writer = DesirabilityParams()
    a, ra = simulate_session(locs, small_docs, ref_policy, writer, lm, lex,
                             np.random.default_rng(4))
    b, rb = simulate_session(locs, small_docs, ref_policy, writer, lm, lex,
                             np.random.default_rng(4))
    assert ra == rb
    assert [r.words for r in a] == [r.words for r in b]
    assert [r.propensity for r in a] == [r.propensity for r in b]


def test_simulate_session_validation(lm, lex, ref_policy, small_docs):
    writer = DesirabilityParams()
    with pytest.raises(SimulationError):
        simulate_session([], small_docs, ref_policy, writer, lm, lex,
                         np.random.default_rng(0))
    bad = [corpus.SuggestionLocation("nope", 1)]
    with pytest.raises(SimulationError):
        simulate_session(bad, small_docs, ref_policy, writer, lm, lex,
                         np.random.default_rng(0))


def test_true_reward_bounds(lm, lex, ref_policy, small_docs):
    locs = corpus.sample_locations(small_docs, 40, min_context=1, seed=5)
    writer = DesirabilityParams()
    mu, se = true_reward(ref_policy, writer, locs, small_docs, lm, lex,
                         np.random.default_rng(6))
    assert 0.0 <= mu <= 6.0
    assert se > 0.0
    with pytest.raises(SimulationError):
        true_reward(ref_policy, writer, locs, small_docs, lm, lex,
                    np.random.default_rng(6), n_rollouts=0)


def test_higher_scale_increases_acceptance(lm, lex, ref_policy, small_docs):
    locs = corpus.sample_locations(small_docs, 60, min_context=1, seed=7)
    mu_neutral, _ = true_reward(
        ref_policy, DesirabilityParams(scale=0.0), locs, small_docs, lm, lex,
        np.random.default_rng(8)
    )
    mu_keen, _ = true_reward(
        ref_policy, DesirabilityParams(scale=10.0), locs, small_docs, lm, lex,
        np.random.default_rng(8)
    )
    assert mu_keen >= mu_neutral
