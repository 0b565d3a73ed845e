"""Locally-normalized log-linear suggestion policies.

A policy scores every vocabulary word as theta . f(w | context), normalizes
with a max-subtracted softmax over the full vocabulary, and generates phrase
suggestions one word at a time, recording each word's sampling probability so
the phrase propensity (their product) is exact. The stochastic reference
policy is the special case theta = (1/tau, 0, ..., 0), i.e. temperature
sampling from the base model.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import DIM, FEATURE_NAMES, FeatureTable, PosLexicon
from .ngram import NgramModel

DEFAULT_PHRASE_LENGTH = 6
DEFAULT_SLOTS = 3
DEFAULT_TAU = 0.5


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class Suggestion:
    words: tuple[str, ...]
    per_word_probs: tuple[float, ...]
    propensity: float


@dataclass(frozen=True)
class SuggestionSet:
    context: tuple[str, ...]
    suggestions: tuple[Suggestion, ...]


def reference_weights(tau: float = DEFAULT_TAU, dim: int = DIM) -> np.ndarray:
    """Weights of the temperature-sampling reference policy: (1/tau, 0, ...)."""
    if tau <= 0:
        raise PolicyError(f"temperature must be positive, got {tau}")
    theta = np.zeros(dim)
    theta[0] = 1.0 / tau
    return theta


class LogLinearPolicy:
    """Immutable policy = weights + base LM + POS lexicon."""

    def __init__(
        self,
        theta: np.ndarray,
        lm: NgramModel,
        lex: PosLexicon,
        table: FeatureTable | None = None,
    ):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (DIM,):
            raise PolicyError(f"weights must have shape ({DIM},), got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise PolicyError("weights must be finite")
        self.theta = theta.copy()
        self.lm = lm
        self.lex = lex
        self.table = table if table is not None else FeatureTable(lm, lex)
        self._static = self.table.static_scores(self.theta)

    def word_distribution(self, context) -> np.ndarray:
        """softmax(theta . f(w | context)) over the full vocabulary."""
        scores = self.theta[0] * self.lm.next_log_distribution(context) + self._static
        m = scores.max()
        e = np.exp(scores - m)
        return e / e.sum()

    def sample_word(self, context, rng: np.random.Generator) -> tuple[str, float]:
        probs = self.word_distribution(context)
        idx = min(int(np.searchsorted(np.cumsum(probs), rng.random())), len(probs) - 1)
        return self.lm.vocab[idx], float(probs[idx])

    def sample_phrase(
        self, context, length: int = DEFAULT_PHRASE_LENGTH, rng: np.random.Generator | None = None
    ) -> Suggestion:
        """Sample ``length`` words sequentially, conditioning on prior samples."""
        if length < 1:
            raise PolicyError(f"phrase length must be >= 1, got {length}")
        rng = rng if rng is not None else np.random.default_rng()
        ctx = list(context)
        words, probs = [], []
        for _ in range(length):
            w, p = self.sample_word(ctx, rng)
            words.append(w)
            probs.append(p)
            ctx.append(w)
        return Suggestion(tuple(words), tuple(probs), float(np.prod(probs)))

    def phrase_log_probability(self, context, words) -> float:
        """Sum of per-word log probabilities of ``words`` after ``context``."""
        if not words:
            raise PolicyError("phrase must be non-empty")
        ctx = list(context)
        total = 0.0
        for w in words:
            dist = self.word_distribution(ctx)
            total += float(np.log(dist[self.lm.token_id(w)]))
            ctx.append(w)
        return total

    def generate_suggestion_set(
        self,
        context,
        k: int = DEFAULT_SLOTS,
        length: int = DEFAULT_PHRASE_LENGTH,
        rng: np.random.Generator | None = None,
    ) -> SuggestionSet:
        """K phrases with pairwise-distinct first words.

        The first word is rejection-resampled (up to vocabulary-size attempts)
        until unused; recorded propensities are the unconstrained sampling
        probabilities.
        """
        if k < 1:
            raise PolicyError(f"k must be >= 1, got {k}")
        if len(self.lm.vocab) < k:
            raise PolicyError(f"vocabulary of {len(self.lm.vocab)} cannot fill {k} slots")
        rng = rng if rng is not None else np.random.default_rng()
        used: set[str] = set()
        out = []
        for _ in range(k):
            for _ in range(len(self.lm.vocab)):
                first, p_first = self.sample_word(context, rng)
                if first not in used:
                    break
            else:
                # near-deterministic first-word distribution: draw from the
                # unused words directly, still recording the unconstrained
                # probability as the logged propensity
                probs = self.word_distribution(context)
                used_ids = [self.lm.word_to_id[w] for w in used]
                masked = probs.copy()
                masked[used_ids] = 0.0
                masked /= masked.sum()
                idx = min(int(np.searchsorted(np.cumsum(masked), rng.random())), len(masked) - 1)
                first, p_first = self.lm.vocab[idx], float(probs[idx])
            used.add(first)
            ctx = list(context) + [first]
            words, probs = [first], [p_first]
            for _ in range(length - 1):
                w, p = self.sample_word(ctx, rng)
                words.append(w)
                probs.append(p)
                ctx.append(w)
            out.append(Suggestion(tuple(words), tuple(probs), float(np.prod(probs))))
        return SuggestionSet(tuple(context), tuple(out))


def reference_policy(
    lm: NgramModel, lex: PosLexicon, tau: float = DEFAULT_TAU, table: FeatureTable | None = None
) -> LogLinearPolicy:
    return LogLinearPolicy(reference_weights(tau), lm, lex, table=table)


def word_distribution(theta, context, lm: NgramModel, lex: PosLexicon) -> np.ndarray:
    return LogLinearPolicy(theta, lm, lex).word_distribution(context)


def reference_distribution(lm: NgramModel, tau: float, context, lex: PosLexicon | None = None) -> np.ndarray:
    """Temperature-sampled base distribution p0^(1/tau), renormalized."""
    if tau <= 0:
        raise PolicyError(f"temperature must be positive, got {tau}")
    scores = lm.next_log_distribution(context) / tau
    m = scores.max()
    e = np.exp(scores - m)
    return e / e.sum()


def save_weights(path: str | Path, theta: np.ndarray) -> None:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (DIM,):
        raise PolicyError(f"weights must have shape ({DIM},), got {theta.shape}")
    lines = [f"{name} {repr(float(v))}\n" for name, v in zip(FEATURE_NAMES, theta)]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_weights(path: str | Path) -> np.ndarray:
    theta = np.zeros(DIM)
    seen = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in FEATURE_NAMES:
            raise PolicyError(f"{path}:{lineno}: malformed weights line {line!r}")
        theta[FEATURE_NAMES.index(parts[0])] = float(parts[1])
        seen.append(parts[0])
    if len(seen) != DIM:
        missing = set(FEATURE_NAMES) - set(seen)
        raise PolicyError(f"{path}: missing weights for {sorted(missing)}")
    return theta
