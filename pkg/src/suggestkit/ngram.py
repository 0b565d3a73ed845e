"""Interpolated modified Kneser-Ney n-gram language model.

The base predictive model: trains count tables per order, estimates the three
standard discounts per order from count-of-counts, and interpolates each order
with the one below, bottoming out in a uniform distribution over the
vocabulary so every word (including the reserved UNK) has positive
probability.

Counts at the highest order are raw; lower orders use continuation counts
(number of distinct single-token left extensions), as in the standard
modified-KN estimation. The conditional distribution for a context u is

    p(w | u) = (a(u, w) - D(a(u, w)))_+ / a(u)  +  gamma(u) * p(w | u[1:])

with gamma(u) chosen so the distribution sums to one exactly. Natural log
throughout. See docs/lm_format.md for the serialization layout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Document, UNK


class NgramError(ValueError):
    pass


@dataclass
class _ContextEntry:
    """Per-context discounted successor table (word ids sorted ascending)."""

    ids: np.ndarray  # int64, sorted
    disc: np.ndarray  # float64, (count - D(count)) / total per successor
    gamma: float


def _estimate_discounts(counts: list[int]) -> tuple[float, float, float]:
    """Three discounts (for counts 1, 2, 3+) from count-of-counts.

    Uses the closed-form estimates D_k = k - (k+1) Y n_{k+1} / n_k with
    Y = n1 / (n1 + 2 n2), falling back to 0.75*k and clamping to [0, k] so
    discounted numerators stay non-negative.
    """
    n = [0, 0, 0, 0, 0]
    for c in counts:
        if 1 <= c <= 4:
            n[c] += 1
    out = []
    y = n[1] / (n[1] + 2.0 * n[2]) if (n[1] + 2 * n[2]) > 0 else 0.0
    for k in (1, 2, 3):
        if n[k] > 0 and n[k + 1] > 0 and y > 0.0:
            d = k - (k + 1) * y * n[k + 1] / n[k]
        else:
            d = 0.75 * k
        out.append(min(max(d, 0.0), float(k)))
    return out[0], out[1], out[2]


def _discount_for(count: float, d: tuple[float, float, float]) -> float:
    if count >= 3:
        return d[2]
    if count >= 2:
        return d[1]
    return d[0]


class NgramModel:
    """Trained KN model. Immutable after construction; safe to share."""

    def __init__(
        self,
        order: int,
        vocab: list[str],
        discounts: list[tuple[float, float, float]],
        uni_counts: np.ndarray,
        tables: list[dict[tuple[int, ...], dict[int, int]]],
    ):
        self.order = order
        self.vocab = list(vocab)
        self.word_to_id = {w: i for i, w in enumerate(vocab)}
        self.unk_id = self.word_to_id[UNK]
        self.discounts = discounts  # index k-1 -> (D1, D2, D3) for order k
        self._uni_counts = uni_counts.astype(np.float64)
        self._raw_tables = tables  # index k-2 -> context tables for order k
        self._build_derived()

    # -- derived caches ----------------------------------------------------

    def _build_derived(self) -> None:
        v = len(self.vocab)
        d1 = self.discounts[0]
        total = float(self._uni_counts.sum())
        disc = np.array([_discount_for(c, d1) for c in self._uni_counts])
        num = np.maximum(self._uni_counts - disc, 0.0)
        mass = float((np.minimum(self._uni_counts, disc)).sum())
        gamma = mass / total
        self._uni_vec = num / total + gamma * (1.0 / v)
        self._entries: list[dict[tuple[int, ...], _ContextEntry]] = []
        for k in range(2, self.order + 1):
            dk = self.discounts[k - 1]
            table = self._raw_tables[k - 2]
            entries: dict[tuple[int, ...], _ContextEntry] = {}
            for ctx, succ in table.items():
                ids = np.array(sorted(succ), dtype=np.int64)
                counts = np.array([succ[i] for i in ids], dtype=np.float64)
                total_c = float(counts.sum())
                dvec = np.array([_discount_for(c, dk) for c in counts])
                gamma_c = float(np.minimum(counts, dvec).sum()) / total_c
                entries[ctx] = _ContextEntry(
                    ids=ids, disc=np.maximum(counts - dvec, 0.0) / total_c, gamma=gamma_c
                )
            self._entries.append(entries)

    # -- queries -----------------------------------------------------------

    def token_id(self, word: str) -> int:
        return self.word_to_id.get(word, self.unk_id)

    def encode(self, tokens) -> list[int]:
        return [self.token_id(t) for t in tokens]

    def _context_ids(self, context) -> list[int]:
        ctx = list(context)[-(self.order - 1):] if self.order > 1 else []
        return [self.token_id(t) if isinstance(t, str) else int(t) for t in ctx]

    def _prob_vector(self, context) -> np.ndarray:
        ctx = self._context_ids(context)
        vec = self._uni_vec.copy()
        for k in range(2, self.order + 1):
            if len(ctx) < k - 1:
                break
            entry = self._entries[k - 2].get(tuple(ctx[-(k - 1):]))
            if entry is None:
                break
            vec *= entry.gamma
            vec[entry.ids] += entry.disc
        return vec

    def _prob_scalar(self, word_id: int, context) -> float:
        ctx = self._context_ids(context)
        p = float(self._uni_vec[word_id])
        for k in range(2, self.order + 1):
            if len(ctx) < k - 1:
                break
            entry = self._entries[k - 2].get(tuple(ctx[-(k - 1):]))
            if entry is None:
                break
            p = p * entry.gamma
            j = int(np.searchsorted(entry.ids, word_id))
            if j < len(entry.ids) and entry.ids[j] == word_id:
                p = p + float(entry.disc[j])
        return p

    def log_prob(self, word: str, context) -> float:
        """Natural-log conditional probability; OOV words map to UNK."""
        return float(np.log(self._prob_scalar(self.token_id(word), context)))

    def next_log_distribution(self, context) -> np.ndarray:
        """Vector of log p(w | context) over the full vocabulary."""
        return np.log(self._prob_vector(context))

    def next_distribution(self, context) -> np.ndarray:
        """Probability vector over the vocabulary; entry i = exp(log_prob(w_i))."""
        return np.exp(self.next_log_distribution(context))

    # -- persistence -------------------------------------------------------

    MAGIC = b"SKNG"
    VERSION = 1

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(struct.pack("<II", self.VERSION, self.order))
            fh.write(struct.pack("<I", len(self.vocab)))
            for w in self.vocab:
                b = w.encode("utf-8")
                fh.write(struct.pack("<H", len(b)))
                fh.write(b)
            for d in self.discounts:
                fh.write(struct.pack("<3d", *d))
            fh.write(struct.pack("<I", len(self._uni_counts)))
            fh.write(self._uni_counts.astype("<f8").tobytes())
            for k in range(2, self.order + 1):
                table = self._raw_tables[k - 2]
                fh.write(struct.pack("<I", len(table)))
                for ctx in sorted(table):
                    succ = table[ctx]
                    fh.write(struct.pack("<B", len(ctx)))
                    fh.write(struct.pack(f"<{len(ctx)}I", *ctx))
                    fh.write(struct.pack("<I", len(succ)))
                    for wid in sorted(succ):
                        fh.write(struct.pack("<Iq", wid, succ[wid]))

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        with open(path, "rb") as fh:
            if fh.read(4) != cls.MAGIC:
                raise NgramError(f"{path}: not a suggestkit LM file")
            version, order = struct.unpack("<II", fh.read(8))
            if version != cls.VERSION:
                raise NgramError(f"{path}: unsupported format version {version}")
            (nv,) = struct.unpack("<I", fh.read(4))
            vocab = []
            for _ in range(nv):
                (ln,) = struct.unpack("<H", fh.read(2))
                vocab.append(fh.read(ln).decode("utf-8"))
            discounts = [struct.unpack("<3d", fh.read(24)) for _ in range(order)]
            (nu,) = struct.unpack("<I", fh.read(4))
            uni = np.frombuffer(fh.read(8 * nu), dtype="<f8").copy()
            tables = []
            for _ in range(2, order + 1):
                (nc,) = struct.unpack("<I", fh.read(4))
                table: dict[tuple[int, ...], dict[int, int]] = {}
                for _ in range(nc):
                    (cl,) = struct.unpack("<B", fh.read(1))
                    ctx = struct.unpack(f"<{cl}I", fh.read(4 * cl))
                    (ns,) = struct.unpack("<I", fh.read(4))
                    succ = {}
                    for _ in range(ns):
                        wid, cnt = struct.unpack("<Iq", fh.read(12))
                        succ[wid] = cnt
                    table[tuple(ctx)] = succ
                tables.append(table)
        return cls(order, vocab, discounts, uni, tables)


def train_lm(train_docs: list[Document], order: int = 5) -> NgramModel:
    """Train an interpolated modified-KN model of the given order.

    Vocabulary is every training token plus UNK. No pruning.
    """
    if not train_docs:
        raise NgramError("empty training corpus")
    if order < 1:
        raise NgramError(f"order must be >= 1, got {order}")
    n_tokens = sum(len(d.tokens) for d in train_docs)
    if n_tokens < order:
        raise NgramError(f"corpus has {n_tokens} tokens, smaller than order {order}")

    vocab = sorted({t for d in train_docs for t in d.tokens} | {UNK})
    word_to_id = {w: i for i, w in enumerate(vocab)}
    v = len(vocab)

    # raw[k-1]: counts of k-grams keyed by (context_ids..., word_id)
    raw: list[dict[tuple[int, ...], int]] = [dict() for _ in range(order)]
    for doc in train_docs:
        ids = [word_to_id[t] for t in doc.tokens]
        for i in range(len(ids)):
            for k in range(1, order + 1):
                if i - k + 1 < 0:
                    break
                gram = tuple(ids[i - k + 1 : i + 1])
                raw[k - 1][gram] = raw[k - 1].get(gram, 0) + 1

    # adjusted counts: raw at the top order, continuation counts below
    adjusted: list[dict[tuple[int, ...], int]] = [dict() for _ in range(order)]
    adjusted[order - 1] = raw[order - 1]
    for k in range(order - 1, 0, -1):
        cont: dict[tuple[int, ...], int] = {}
        for gram in raw[k]:  # (k+1)-grams; drop the leftmost token
            suffix = gram[1:]
            cont[suffix] = cont.get(suffix, 0) + 1
        adjusted[k - 1] = cont
    if order == 1:
        adjusted[0] = raw[0]

    discounts = [_estimate_discounts(list(adjusted[k].values())) for k in range(order)]

    uni_counts = np.zeros(v, dtype=np.float64)
    for (wid,), c in adjusted[0].items():
        uni_counts[wid] = c
    if uni_counts.sum() == 0:
        raise NgramError("no unigram mass; corpus too small")

    tables: list[dict[tuple[int, ...], dict[int, int]]] = []
    for k in range(2, order + 1):
        table: dict[tuple[int, ...], dict[int, int]] = {}
        for gram, c in adjusted[k - 1].items():
            table.setdefault(gram[:-1], {})[gram[-1]] = c
        tables.append(table)

    return NgramModel(order, vocab, discounts, uni_counts, tables)


def perplexity(model: NgramModel, docs: list[Document]) -> float:
    """Per-token perplexity, predicting every token after the document opener."""
    total, count = 0.0, 0
    for doc in docs:
        ids = model.encode(doc.tokens)
        for i in range(1, len(ids)):
            total += float(np.log(model._prob_scalar(ids[i], ids[:i])))
            count += 1
    if count == 0:
        raise NgramError("no tokens to evaluate")
    return float(np.exp(-total / count))
