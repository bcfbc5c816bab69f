"""Synthetic class-skewed corpora for experiments and self-tests."""

from __future__ import annotations

import itertools
import string

import numpy as np

from semhash.textpipe import Document


def _word_list(n: int) -> list[str]:
    """n distinct two-letter-plus alphabetic words: aa, ab, ..., ba, ..."""
    out = []
    for size in itertools.count(2):
        for letters in itertools.product(string.ascii_lowercase, repeat=size):
            out.append("".join(letters))
            if len(out) == n:
                return out
    raise AssertionError("unreachable")


def class_topic_distributions(
    n_classes: int, vocab_size: int, boost: float = 6.0
) -> np.ndarray:
    """Multinomial per class: a uniform floor plus a boosted per-class block
    of vocab_size // n_classes word types."""
    block = vocab_size // n_classes
    probs = np.ones((n_classes, vocab_size), dtype=np.float64)
    for c in range(n_classes):
        probs[c, c * block : (c + 1) * block] += boost
    return probs / probs.sum(axis=1, keepdims=True)


def synthetic_corpus(
    n_classes: int = 4,
    docs_per_class: int = 250,
    vocab_size: int = 200,
    doc_len: tuple[int, int] = (40, 80),
    boost: float = 6.0,
    seed: int = 0,
    id_offset: int = 0,
) -> list[Document]:
    """Class-skewed multinomial text; labels are the generating class."""
    rng = np.random.default_rng(seed)
    words = np.array(_word_list(vocab_size))
    probs = class_topic_distributions(n_classes, vocab_size, boost)
    docs = []
    next_id = id_offset
    for c in range(n_classes):
        for _ in range(docs_per_class):
            length = int(rng.integers(doc_len[0], doc_len[1] + 1))
            toks = rng.choice(words, size=length, p=probs[c])
            docs.append(Document(id=next_id, text=" ".join(toks), label=c))
            next_id += 1
    return docs
