import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from suggestkit import corpus, features, ngram, policy

TESTS = Path(__file__).parent


@pytest.fixture(scope="session")
def all_docs():
    return corpus.load_documents(corpus.bundled_corpus_path())


@pytest.fixture(scope="session")
def small_docs(all_docs):
    return all_docs[:250]


@pytest.fixture(scope="session")
def lm(small_docs):
    return ngram.train_lm(small_docs, order=5)


@pytest.fixture(scope="session")
def lex():
    return features.bundled_lexicon()


@pytest.fixture(scope="session")
def table(lm, lex):
    return features.FeatureTable(lm, lex)


@pytest.fixture(scope="session")
def ref_policy(lm, lex, table):
    return policy.reference_policy(lm, lex, 0.5, table=table)


@pytest.fixture(scope="session")
def toy_lm():
    """Tiny 3-content-word model for hand-checkable arithmetic."""
    docs = [
        corpus.Document(f"toy{i}", tuple(corpus.tokenize(text)))
        for i, text in enumerate(
            ["aa bb aa cc.", "bb aa bb aa.", "aa cc bb aa.", "cc aa aa bb."] * 3
        )
    ]
    return ngram.train_lm(docs, order=2)


def random_context(rng, docs):
    doc = docs[rng.integers(len(docs))]
    off = int(rng.integers(1, len(doc.tokens)))
    return doc.tokens[:off]
