"""Query-side pipeline: hamming-ball preselection followed by cosine ranking,
with optional gradient search augmentation (GSA), pseudo-relevance feedback
(PRF), and the reconstruction-search baseline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from semhash.autoencoder import NetworkParams, encode, reconstruct
from semhash.hashindex import (
    BinaryCode,
    HammingIndex,
    PreselectConfig,
    binarize,
    preselect,
)
from semhash.textpipe import (
    Document,
    ScalingStats,
    SparseVector,
    VectorStore,
    Vocabulary,
    count_vector,
    scale_for_network,
    tfidf_transform,
)

VARIANTS = ("tfidf", "gsa", "prf", "gsa+prf", "reconstruction")


@dataclass
class QueryConfig:
    radius: int = 2
    rank_depth: int = 100
    prf_k: int = 5
    gsa_alpha: float = 1.0
    gsa_sigma: float = 2.0
    variant: str = "tfidf"
    prf_scope: str = "preselection"   # or "corpus"
    min_count: int = 0
    max_radius: int | None = None
    binarize_threshold: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.prf_scope not in ("preselection", "corpus"):
            raise ValueError(f"unknown prf_scope {self.prf_scope!r}")
        if self.uses_prf and self.prf_k < 1:
            raise ValueError("prf_k must be >= 1 when PRF is active")
        if self.uses_gsa and not (self.gsa_sigma > 0):
            raise ValueError("gsa_sigma must be positive when GSA is active")

    @property
    def uses_prf(self) -> bool:
        return self.variant in ("prf", "gsa+prf")

    @property
    def uses_gsa(self) -> bool:
        return self.variant in ("gsa", "gsa+prf")


@dataclass
class RankedResult:
    """Ranked (doc id, cosine score) pairs plus preselection diagnostics."""

    results: list[tuple[int, float]]
    preselection_size: int
    effective_radius: int
    preselected_ids: list[int] = field(default_factory=list)
    diagnostic: str | None = None

    @property
    def doc_ids(self) -> list[int]:
        return [d for d, _ in self.results]


def cosine(a: SparseVector, b: SparseVector) -> float:
    """a.b / (|a||b|); zero when either vector has no mass."""
    if a.dim != b.dim:
        raise ValueError("cosine needs equal dimensionality")
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    _, ia, ib = np.intersect1d(a.ids, b.ids, assume_unique=True, return_indices=True)
    return float(np.dot(a.weights[ia], b.weights[ib]) / (na * nb))


def rank(
    q: SparseVector, candidates: list[int], store: VectorStore, m: int
) -> list[tuple[int, float]]:
    """Top-m candidates by cosine against q, ties broken by ascending doc id."""
    if m <= 0 or not candidates:
        return []
    cand = np.asarray(candidates, dtype=np.int64)
    rows = np.array([store.row_index(d) for d in cand], dtype=np.int64)
    qn = q.norm()
    if qn == 0.0:
        scores = np.zeros(len(cand))
    else:
        dots = store.matrix[rows].dot(q.to_dense())
        norms = store.norms[rows]
        scores = np.where(norms > 0, dots / (norms * qn), 0.0)
    order = np.lexsort((cand, -scores))[:m]
    return [(int(cand[i]), float(scores[i])) for i in order]


def prf_adjust(q: SparseVector, top_docs: list[SparseVector]) -> SparseVector:
    """Rocchio-style update: q + (1/k) * sum of the top documents."""
    if not top_docs:
        raise ValueError("pseudo-relevance feedback needs at least one document")
    acc = q.to_dense()
    k = len(top_docs)
    for doc in top_docs:
        if doc.dim != q.dim:
            raise ValueError("feedback document dimensionality mismatch")
        acc[doc.ids] += doc.weights / k
    return SparseVector.from_dense(acc)


def gsa_adjust(
    q_dense: np.ndarray, net: NetworkParams, sigma: float, alpha: float
) -> np.ndarray:
    """Move the query against the learned manifold gradient:
    q - alpha*(r(q) - q)/sigma^2, clipped at zero."""
    q_dense = np.asarray(q_dense, dtype=np.float64)
    if not (sigma > 0):
        raise ValueError("gsa sigma must be positive")
    if alpha == 0.0:
        return q_dense.copy()
    r = reconstruct(net, q_dense)
    if not np.all(np.isfinite(r)):
        raise ValueError("non-finite reconstruction")
    return np.maximum(q_dense - alpha * (r - q_dense) / (sigma * sigma), 0.0)


def reconstruction_query(q_dense: np.ndarray, net: NetworkParams) -> np.ndarray:
    """The deliberately weak baseline: rank with r(q) itself."""
    return reconstruct(net, np.asarray(q_dense, dtype=np.float64))


@dataclass
class Engine:
    """Immutable query-time state: vocabulary, vectors, network and index."""

    vocab: Vocabulary
    store: VectorStore
    net: NetworkParams
    index: HammingIndex
    stopwords: frozenset[str] = frozenset()

    def vectorize(self, text: str) -> SparseVector:
        doc = Document(id=-1, text=text)
        return tfidf_transform(count_vector(doc, self.vocab, self.stopwords), self.vocab)

    def code_for(self, q: SparseVector, threshold: float = 0.5) -> BinaryCode:
        x = scale_for_network(q, self.store.scaling)
        return binarize(encode(self.net, x), threshold)

    def search(self, query: Document, cfg: QueryConfig) -> RankedResult:
        return search(query, self, cfg)


def _ranking_vector(engine: Engine, q: SparseVector, cfg: QueryConfig) -> SparseVector:
    """The variant's first-pass ranking vector, in TF-IDF space.

    GSA and reconstruction work in the scaled network input space; their
    results are re-projected to TF-IDF space by the inverse scaling. The GSA
    update is carried over as a delta against the original query so that
    alpha = 0 reproduces the plain query bit for bit even where the input
    scaling clipped.
    """
    m = engine.store.scaling.max_weight
    x = scale_for_network(q, engine.store.scaling)
    if cfg.variant == "reconstruction":
        return SparseVector.from_dense(reconstruction_query(x, engine.net) * m)
    if cfg.uses_gsa:
        delta = gsa_adjust(x, engine.net, cfg.gsa_sigma, cfg.gsa_alpha) - x
        return SparseVector.from_dense(np.maximum(q.to_dense() + delta * m, 0.0))
    return q


def search(query: Document, engine: Engine, cfg: QueryConfig) -> RankedResult:
    """vectorize -> scale -> encode -> binarize -> preselect -> rank, with the
    variant's augmented ranking vector. The hash code always comes from the
    unaugmented query, so all variants share one candidate pool."""
    q = engine.vectorize(query.text)
    code = engine.code_for(q, cfg.binarize_threshold)
    pre_ids, radius = preselect(
        engine.index,
        code,
        PreselectConfig(cfg.radius, cfg.min_count, cfg.max_radius),
    )
    if not pre_ids:
        return RankedResult(
            results=[],
            preselection_size=0,
            effective_radius=radius,
            diagnostic=f"empty preselection after expanding to radius {radius}",
        )

    q_rank = _ranking_vector(engine, q, cfg)
    results = rank(q_rank, pre_ids, engine.store, cfg.rank_depth)

    if cfg.uses_prf:
        feedback = [d for d, _ in results if d != query.id][: cfg.prf_k]
        if feedback:
            q_prf = prf_adjust(q_rank, [engine.store.vector(d) for d in feedback])
            scope = (
                pre_ids
                if cfg.prf_scope == "preselection"
                else engine.store.ids.tolist()
            )
            results = rank(q_prf, scope, engine.store, cfg.rank_depth)

    return RankedResult(
        results=results,
        preselection_size=len(pre_ids),
        effective_radius=radius,
        preselected_ids=list(pre_ids),
    )
