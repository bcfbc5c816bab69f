"""Corpus ingestion: tokenization, pruned vocabulary, TF-IDF vectors, and
scaling of vectors into the [0,1] input space of the network."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse

# Alphabetic runs only; single-letter fragments (the "s" of "cat's") are noise.
_TOKEN_RE = re.compile(r"[a-z]{2,}")


def load_default_stopwords() -> frozenset[str]:
    """Built-in English stopword list shipped with the package."""
    text = resources.files("semhash").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


@dataclass(frozen=True)
class Document:
    """One corpus document. The label is only consulted at evaluation time."""

    id: int
    text: str
    label: int = -1


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Lowercase alphabetic tokens of length >= 2, with stopwords removed.

    Digits and punctuation split the text, so "2nd" yields "nd" and
    "cat's" yields just "cat".
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in stopwords]


@dataclass
class Vocabulary:
    """Dense feature-id space over retained tokens plus document frequencies."""

    tokens: list[str]        # feature id -> token, lexicographically ordered
    doc_freq: np.ndarray     # feature id -> number of documents containing it
    n_docs: int
    token_to_id: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.doc_freq = np.asarray(self.doc_freq, dtype=np.int64)
        if len(self.tokens) != len(self.doc_freq):
            raise ValueError("token list and doc_freq length mismatch")
        if len(self.tokens) and not (
            self.doc_freq.min() >= 1 and self.doc_freq.max() <= self.n_docs
        ):
            raise ValueError("document frequencies outside [1, n_docs]")
        self.token_to_id = {t: i for i, t in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        return len(self.tokens)


def build_vocabulary(
    docs: list[Document],
    stopwords: frozenset[str] = frozenset(),
    min_df_frac: float = 0.00001,
    max_df_frac: float = 0.9,
    top_n: int = 10000,
) -> Vocabulary:
    """Retain tokens with min_df_frac*|D| < |D_w| < max_df_frac*|D| (strict),
    keep the top_n by total corpus frequency (ties lexicographic), and assign
    dense feature ids in lexicographic order.
    """
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if not (0 <= min_df_frac < max_df_frac <= 1):
        raise ValueError("need 0 <= min_df_frac < max_df_frac <= 1")

    df: Counter[str] = Counter()
    tf: Counter[str] = Counter()
    for doc in docs:
        toks = tokenize(doc.text, stopwords)
        tf.update(toks)
        df.update(set(toks))

    n = len(docs)
    lo, hi = min_df_frac * n, max_df_frac * n
    survivors = [t for t, d in df.items() if lo < d < hi]
    if not survivors:
        raise ValueError(
            "no features survive document-frequency pruning; corpus is "
            "over-pruned for bounds (%g, %g)" % (min_df_frac, max_df_frac)
        )
    survivors.sort(key=lambda t: (-tf[t], t))
    retained = sorted(survivors[:top_n])
    return Vocabulary(
        tokens=retained,
        doc_freq=np.array([df[t] for t in retained], dtype=np.int64),
        n_docs=n,
    )


@dataclass(frozen=True)
class SparseVector:
    """Sorted (feature id, weight) pairs over a fixed dimensionality."""

    ids: np.ndarray       # int32, strictly increasing
    weights: np.ndarray   # float64, no stored zeros
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "ids", np.asarray(self.ids, dtype=np.int32))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        if self.ids.shape != self.weights.shape:
            raise ValueError("ids and weights must be parallel arrays")
        if self.ids.size:
            if np.any(np.diff(self.ids) <= 0):
                raise ValueError("feature ids must be strictly increasing")
            if self.ids[0] < 0 or self.ids[-1] >= self.dim:
                raise ValueError("feature id out of range")
            if np.any(self.weights == 0.0):
                raise ValueError("zero weights must not be stored")

    @property
    def nnz(self) -> int:
        return int(self.ids.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        out[self.ids] = self.weights
        return out

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SparseVector":
        dense = np.asarray(dense, dtype=np.float64)
        ids = np.nonzero(dense)[0]
        return cls(ids=ids.astype(np.int32), weights=dense[ids], dim=dense.size)

    @classmethod
    def empty(cls, dim: int) -> "SparseVector":
        return cls(ids=np.empty(0, np.int32), weights=np.empty(0, np.float64), dim=dim)


def count_vector(
    doc: Document, vocab: Vocabulary, stopwords: frozenset[str] = frozenset()
) -> SparseVector:
    """Within-vocabulary token occurrence counts; OOV tokens are ignored."""
    counts: Counter[int] = Counter()
    for tok in tokenize(doc.text, stopwords):
        fid = vocab.token_to_id.get(tok)
        if fid is not None:
            counts[fid] += 1
    if not counts:
        return SparseVector.empty(vocab.size)
    ids = np.array(sorted(counts), dtype=np.int32)
    weights = np.array([counts[i] for i in ids], dtype=np.float64)
    return SparseVector(ids=ids, weights=weights, dim=vocab.size)


def tfidf_transform(counts: SparseVector, vocab: Vocabulary) -> SparseVector:
    """weight(w) = (c(w)/W) * ln(|D|/|D_w|), with W the document's
    in-vocabulary token total. Features present in every document idf to
    zero and are dropped.
    """
    if counts.dim != vocab.size:
        raise ValueError("count vector dimensionality does not match vocabulary")
    total = counts.weights.sum()
    if total == 0:
        return SparseVector.empty(vocab.size)
    df = vocab.doc_freq[counts.ids]
    weights = (counts.weights / total) * np.log(vocab.n_docs / df)
    keep = weights != 0.0
    return SparseVector(ids=counts.ids[keep], weights=weights[keep], dim=vocab.size)


@dataclass(frozen=True)
class ScalingStats:
    """Per-corpus maximum TF-IDF weight, computed on the training split."""

    max_weight: float

    def __post_init__(self):
        if not (self.max_weight > 0):
            raise ValueError("scaling max must be positive")


def scale_for_network(v: SparseVector, scale: ScalingStats) -> np.ndarray:
    """Dense [0,1] vector: weight/max, clipped at 1 for unseen larger weights."""
    out = np.zeros(v.dim, dtype=np.float64)
    if v.nnz:
        out[v.ids] = np.minimum(v.weights / scale.max_weight, 1.0)
    return out


class VectorStore:
    """TF-IDF vectors for a corpus, with ids, labels and scaling stats.

    Rows are CSR so candidate gathers and cosine scoring stay vectorized.
    """

    def __init__(self, ids, labels, matrix, scaling, label_names=None):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.matrix = matrix.tocsr()
        self.scaling = scaling
        self.label_names = list(label_names) if label_names else []
        if len(self.ids) != self.matrix.shape[0] or len(self.ids) != len(self.labels):
            raise ValueError("ids, labels and matrix row counts disagree")
        if len(np.unique(self.ids)) != len(self.ids):
            raise ValueError("duplicate document ids in vector store")
        self._row_of = {int(d): i for i, d in enumerate(self.ids)}
        sq = np.asarray(self.matrix.multiply(self.matrix).sum(axis=1)).ravel()
        self.norms = np.sqrt(sq)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def row_index(self, doc_id: int) -> int:
        return self._row_of[int(doc_id)]

    def label_of(self, doc_id: int) -> int:
        return int(self.labels[self._row_of[int(doc_id)]])

    def vector(self, doc_id: int) -> SparseVector:
        row = self.matrix.getrow(self._row_of[int(doc_id)])
        order = np.argsort(row.indices)
        return SparseVector(
            ids=row.indices[order].astype(np.int32),
            weights=row.data[order],
            dim=self.dim,
        )

    @classmethod
    def from_documents(cls, docs, vocab, stopwords=frozenset(), label_names=None):
        rows, cols, vals = [], [], []
        ids, labels = [], []
        for i, doc in enumerate(docs):
            ids.append(doc.id)
            labels.append(doc.label)
            tv = tfidf_transform(count_vector(doc, vocab, stopwords), vocab)
            rows.extend([i] * tv.nnz)
            cols.extend(tv.ids.tolist())
            vals.extend(tv.weights.tolist())
        matrix = sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(docs), vocab.size), dtype=np.float64
        )
        max_w = float(matrix.data.max()) if matrix.nnz else 0.0
        if max_w <= 0:
            raise ValueError("corpus produced no TF-IDF mass; cannot derive scaling")
        return cls(ids, labels, matrix, ScalingStats(max_weight=max_w), label_names)


def load_corpus_dir(path: str | Path) -> tuple[list[Document], list[str]]:
    """One directory per class, one UTF-8 text file per document.

    Labels are the sorted class-directory names; ids are assigned
    sequentially in that deterministic order.
    """
    root = Path(path)
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ValueError(f"no class directories under {root}")
    docs: list[Document] = []
    names: list[str] = []
    next_id = 0
    for label, cdir in enumerate(class_dirs):
        names.append(cdir.name)
        for f in sorted(cdir.iterdir()):
            if f.is_file():
                docs.append(Document(id=next_id, text=f.read_text("utf-8"), label=label))
                next_id += 1
    return docs, names


def load_corpus_jsonl(path: str | Path) -> tuple[list[Document], list[str]]:
    """JSON-lines corpus with fields {id, label, text}.

    String labels are mapped to dense ints by sorted order of the distinct
    values; integer labels are taken as-is.
    """
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    labels = [r["label"] for r in records]
    if any(isinstance(lab, str) for lab in labels):
        names = sorted({str(lab) for lab in labels})
        lab_id = {name: i for i, name in enumerate(names)}
        docs = [
            Document(id=int(r["id"]), text=r["text"], label=lab_id[str(r["label"])])
            for r in records
        ]
        return docs, names
    docs = [
        Document(id=int(r["id"]), text=r["text"], label=int(r["label"]))
        for r in records
    ]
    return docs, []


def load_corpus(path: str | Path, fmt: str = "auto"):
    path = Path(path)
    if fmt == "auto":
        fmt = "dir" if path.is_dir() else "jsonl"
    if fmt == "dir":
        return load_corpus_dir(path)
    if fmt == "jsonl":
        return load_corpus_jsonl(path)
    raise ValueError(f"unknown corpus format {fmt!r}")
