"""Simulated writer: desirability-biased acceptance of phrase suggestions.

The writer sees K suggestions per location. Each suggestion's predictive
likelihood p_j (under the base model) is boosted in log space by a
desirability score D_j; the writer accepts suggestion j with probability

    a_j = p_j exp(D_j) / Z,    a_reject = p_reject / Z,
    Z = 1 - sum_j p_j (1 - exp(D_j)),

which moves probability mass from rejection toward desirable suggestions.
Driving sessions over sampled locations yields logged interactions for
counterfactual estimation plus the ground-truth achieved reward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, SuggestionLocation
from .counterfactual import LoggedInteraction
from .features import is_long_word, PosLexicon
from .ngram import NgramModel
from .policy import LogLinearPolicy, Suggestion, SuggestionSet

LIKELIHOOD_CAP_EPS = 1e-9


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class DesirabilityParams:
    """Writer preference model; currently counts long words in a suggestion."""

    kind: str = "long-word-count"
    scale: float = 10.0

    def __post_init__(self):
        if self.kind != "long-word-count":
            raise SimulationError(f"unknown desirability kind {self.kind!r}")
        if not np.isfinite(self.scale):
            raise SimulationError("scale must be finite")


@dataclass(frozen=True)
class AcceptanceDistribution:
    accept: tuple[float, ...]  # one probability per displayed suggestion
    reject: float

    def as_vector(self) -> np.ndarray:
        return np.array(list(self.accept) + [self.reject])


def desirability(suggestion: Suggestion, params: DesirabilityParams) -> float:
    return params.scale * sum(1 for w in suggestion.words if is_long_word(w))


def acceptance_distribution(p, p_reject: float, d) -> AcceptanceDistribution:
    """Acceptance probabilities from predictive likelihoods and desirabilities."""
    p = np.asarray(p, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if p.shape != d.shape:
        raise SimulationError(f"shape mismatch: p {p.shape} vs D {d.shape}")
    if np.any(p < 0.0):
        raise SimulationError("likelihoods must be non-negative")
    if p.sum() > 1.0 + 1e-12:
        raise SimulationError(f"likelihoods sum to {p.sum()}, exceeding 1")
    boost = np.exp(d)
    z = 1.0 - float((p * (1.0 - boost)).sum())
    accept = p * boost / z
    return AcceptanceDistribution(tuple(float(a) for a in accept), float(p_reject / z))


def predictive_likelihoods(
    sset: SuggestionSet, lm: NgramModel
) -> tuple[np.ndarray, float]:
    """Likelihood of each suggestion under the base model, plus rejection mass.

    Each p_j is the product of base-LM conditional probabilities of the
    suggestion's words; the total is capped just below 1 so rejection always
    has positive mass.
    """
    p = []
    for s in sset.suggestions:
        ctx = list(sset.context)
        logp = 0.0
        for w in s.words:
            logp += lm.log_prob(w, ctx)
            ctx.append(w)
        p.append(float(np.exp(logp)))
    p = np.array(p)
    cap = 1.0 - LIKELIHOOD_CAP_EPS
    if p.sum() > cap:
        p = p * (cap / p.sum())
    return p, float(1.0 - p.sum())


def _sample_choice(acc: AcceptanceDistribution, rng: np.random.Generator) -> int:
    """Index of the accepted suggestion, or len(accept) for rejection."""
    vec = acc.as_vector()
    return min(int(np.searchsorted(np.cumsum(vec), rng.random())), len(vec) - 1)


def _interact_once(
    context,
    policy: LogLinearPolicy,
    writer: DesirabilityParams,
    lm: NgramModel,
    rng: np.random.Generator,
    k: int,
    length: int,
) -> tuple[SuggestionSet, int, float]:
    """Show one suggestion set; returns (set, chosen slot or -1, reward)."""
    sset = policy.generate_suggestion_set(context, k=k, length=length, rng=rng)
    p, p_reject = predictive_likelihoods(sset, lm)
    d = [desirability(s, writer) for s in sset.suggestions]
    acc = acceptance_distribution(p, p_reject, d)
    choice = _sample_choice(acc, rng)
    if choice >= k:
        return sset, -1, 0.0
    return sset, choice, float(length)


def _contexts_for(locations, docs: list[Document]):
    by_id = {d.id: d for d in docs}
    out = []
    for loc in locations:
        doc = by_id.get(loc.doc_id)
        if doc is None:
            raise SimulationError(f"unknown document {loc.doc_id!r}")
        if not 0 <= loc.offset < len(doc.tokens):
            raise SimulationError(f"offset {loc.offset} outside {loc.doc_id}")
        out.append((loc, doc.tokens[: loc.offset]))
    return out


def simulate_session(
    locations: list[SuggestionLocation],
    docs: list[Document],
    generator_policy: LogLinearPolicy,
    writer: DesirabilityParams,
    lm: NgramModel,
    lex: PosLexicon,
    rng: np.random.Generator,
    k: int = 3,
    length: int = 6,
) -> tuple[list[LoggedInteraction], float]:
    """Run the writer over every location, logging all displayed suggestions.

    Emits K records per location (reward = phrase length for the accepted
    slot, 0 elsewhere). Returns the records and the achieved reward: mean
    accepted words per location.
    """
    if not locations:
        raise SimulationError("no locations to simulate")
    records: list[LoggedInteraction] = []
    total_reward = 0.0
    for loc, context in _contexts_for(locations, docs):
        sset, choice, reward = _interact_once(
            context, generator_policy, writer, lm, rng, k, length
        )
        total_reward += reward
        for j, s in enumerate(sset.suggestions):
            records.append(
                LoggedInteraction(
                    context=tuple(context),
                    words=s.words,
                    reward=reward if j == choice else 0.0,
                    propensity=s.propensity,
                    per_word_probs=s.per_word_probs,
                    group=loc.doc_id,
                )
            )
    return records, total_reward / len(locations)


def true_reward(
    policy: LogLinearPolicy,
    writer: DesirabilityParams,
    locations: list[SuggestionLocation],
    docs: list[Document],
    lm: NgramModel,
    lex: PosLexicon,
    rng: np.random.Generator,
    n_rollouts: int = 1,
    k: int = 3,
    length: int = 6,
) -> tuple[float, float]:
    """Monte-Carlo mean accepted words per location, with its standard error."""
    if n_rollouts < 1:
        raise SimulationError(f"n_rollouts must be >= 1, got {n_rollouts}")
    pairs = _contexts_for(locations, docs)
    samples = []
    for _ in range(n_rollouts):
        for _loc, context in pairs:
            _, _, reward = _interact_once(context, policy, writer, lm, rng, k, length)
            samples.append(reward)
    arr = np.array(samples)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), se
