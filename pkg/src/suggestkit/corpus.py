"""Corpus ingestion: tokenization, train/held-out splits, suggestion locations.

Documents come from newline-delimited UTF-8 text, one review per line. All
functions here are pure and deterministic given their seed arguments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BOR = "<bor>"  # beginning-of-review marker, first token of every document
BOS = "<bos>"  # generic beginning-of-sequence marker (reserved)
EOS = "<eos>"  # appended after every sentence
UNK = "<unk>"  # reserved out-of-vocabulary token
MARKERS = frozenset({BOR, BOS, EOS, UNK})

_WORD_OR_PUNCT = re.compile(r"[\w']+|[^\w\s]", re.UNICODE)
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])[\s]+")


class CorpusError(ValueError):
    """Raised when a corpus is too small or a request is infeasible."""


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class SuggestionLocation:
    """A point inside a document where suggestions would be offered.

    Context is ``tokens[:offset]``; the reference continuation starts at
    ``tokens[offset]``.
    """

    doc_id: str
    offset: int


def tokenize(raw_text: str) -> list[str]:
    """Lowercase and split ``raw_text`` into word/punctuation tokens.

    Punctuation characters become standalone tokens (apostrophes stay inside
    words, so "didn't" is one token). BOR is prepended and EOS appended after
    every sentence; an empty input yields just [BOR, EOS].
    """
    tokens = [BOR]
    text = raw_text.strip().lower()
    if not text:
        return tokens + [EOS]
    for sent in _SENTENCE_SPLIT.split(text):
        parts = _WORD_OR_PUNCT.findall(sent)
        parts = [p for p in parts if p.strip("'")]
        if parts:
            tokens.extend(parts)
            tokens.append(EOS)
    if tokens[-1] != EOS:
        tokens.append(EOS)
    return tokens


def load_documents(path: str | Path) -> list[Document]:
    """Read one document per non-empty line; ids are 1-based line numbers."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                docs.append(Document(id=f"doc{lineno:06d}", tokens=tuple(tokenize(line))))
    return docs


def split_corpus(
    docs: list[Document], holdout_fraction: float, seed: int
) -> tuple[list[Document], list[Document], list[Document]]:
    """Partition ``docs`` into (train, heldout_train, heldout_test).

    A ``holdout_fraction`` share of documents is held out from training and
    split into equal halves (the earlier half gets the extra document when
    the count is odd). Deterministic under ``seed``.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise CorpusError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}")
    if len(docs) < 3:
        raise CorpusError(f"need at least 3 documents, got {len(docs)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(docs))
    n_holdout = max(1, round(holdout_fraction * len(docs)))
    held = [docs[i] for i in order[:n_holdout]]
    train = [docs[i] for i in order[n_holdout:]]
    half = (n_holdout + 1) // 2
    return train, held[:half], held[half:]


def save_split_ids(path: str | Path, docs: list[Document]) -> None:
    Path(path).write_text("".join(d.id + "\n" for d in docs), encoding="utf-8")


def load_split(path: str | Path, docs: list[Document]) -> list[Document]:
    by_id = {d.id: d for d in docs}
    ids = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    return [by_id[i] for i in ids]


def sample_locations(
    docs: list[Document],
    n: int,
    min_context: int,
    seed: int,
    min_continuation: int = 6,
) -> list[SuggestionLocation]:
    """Sample ``n`` suggestion locations uniformly over eligible positions.

    A position is eligible when at least ``min_context`` tokens precede it and
    at least ``min_continuation`` tokens remain at/after it. Sampling is with
    replacement and deterministic under ``seed``.
    """
    if n < 1:
        raise CorpusError(f"n must be >= 1, got {n}")
    eligible: list[SuggestionLocation] = []
    for doc in docs:
        lo = min_context
        hi = len(doc.tokens) - min_continuation
        for off in range(lo, hi + 1):
            eligible.append(SuggestionLocation(doc.id, off))
    if not eligible:
        raise CorpusError(
            f"no eligible positions (min_context={min_context}, "
            f"min_continuation={min_continuation})"
        )
    rng = np.random.default_rng(seed)
    idx = rng.integers(len(eligible), size=n)
    return [eligible[i] for i in idx]


def bundled_corpus_path() -> Path:
    """Path of the synthetic review corpus shipped with the package."""
    return Path(__file__).parent / "data" / "reviews.txt"


def bundled_lexicon_path() -> Path:
    return Path(__file__).parent / "data" / "pos_lexicon.tsv"
