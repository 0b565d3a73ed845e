"""Candidate-word features for the log-linear suggestion policy.

Three feature families: the base-LM log likelihood of the word in context, a
binary long-word indicator (>= 6 letters, counting only alphabetic
characters), and a one-hot encoding of the word's most common POS tag from a
static lexicon. Only the LM entry depends on context, which lets the policy
precompute the rest per vocabulary word.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ngram import NgramModel

POS_TAGS = (
    "PUNCT", "ADJ", "ADP", "ADV", "CONJ", "DET",
    "NOUN", "NUM", "PRON", "PRT", "VERB", "X",
)
LONG_WORD_LETTERS = 6

IDX_LM = 0
IDX_LONG = 1
IDX_POS = 2  # first POS slot; dimension = 2 + len(POS_TAGS)

FEATURE_NAMES = ("lm", "long_word") + tuple(f"pos_{t}" for t in POS_TAGS)
DIM = len(FEATURE_NAMES)


class LexiconError(ValueError):
    pass


class PosLexicon:
    """Static word -> most-common-POS-tag map; unknown words resolve to X."""

    def __init__(self, tags: dict[str, str]):
        for word, tag in tags.items():
            if tag not in POS_TAGS:
                raise LexiconError(f"unknown tag {tag!r} for word {word!r}")
        self._tags = dict(tags)

    def tag(self, word: str) -> str:
        return self._tags.get(word, "X")

    def tag_index(self, word: str) -> int:
        return POS_TAGS.index(self.tag(word))

    def __len__(self) -> int:
        return len(self._tags)


def load_pos_lexicon(path: str | Path) -> PosLexicon:
    """Load a `word<TAB>TAG` lexicon file."""
    tags: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0]:
                raise LexiconError(f"{path}:{lineno}: malformed line {line!r}")
            word, tag = parts
            if tag not in POS_TAGS:
                raise LexiconError(f"{path}:{lineno}: unknown tag {tag!r}")
            tags[word] = tag
    return PosLexicon(tags)


def bundled_lexicon() -> PosLexicon:
    return load_pos_lexicon(Path(__file__).parent / "data" / "pos_lexicon.tsv")


def letter_count(word: str) -> int:
    return sum(1 for ch in word if ch.isalpha())


def is_long_word(word: str) -> bool:
    return letter_count(word) >= LONG_WORD_LETTERS


def extract(word: str, context, lm: NgramModel, lex: PosLexicon) -> np.ndarray:
    """Feature vector for one candidate word in context."""
    vec = np.zeros(DIM)
    vec[IDX_LM] = lm.log_prob(word, context)
    vec[IDX_LONG] = 1.0 if is_long_word(word) else 0.0
    vec[IDX_POS + lex.tag_index(word)] = 1.0
    return vec


class FeatureTable:
    """Context-independent feature columns for every vocabulary word.

    ``static`` is a (V, DIM-1) matrix holding the long-word indicator and the
    POS one-hot per word; stacking the LM log-prob vector for a context in
    front of it reproduces ``extract`` for all words at once.
    """

    def __init__(self, lm: NgramModel, lex: PosLexicon):
        v = len(lm.vocab)
        self.static = np.zeros((v, DIM - 1))
        for i, word in enumerate(lm.vocab):
            self.static[i, 0] = 1.0 if is_long_word(word) else 0.0
            self.static[i, 1 + lex.tag_index(word)] = 1.0
        self.long_word = self.static[:, 0].copy()

    def static_scores(self, theta: np.ndarray) -> np.ndarray:
        """Per-word score contribution of all non-LM features."""
        return self.static @ np.asarray(theta, dtype=np.float64)[1:]
