import numpy as np
import pytest

from semhash.autoencoder import init_network, reconstruct
from semhash.retrieval import (
    QueryConfig,
    cosine,
    gsa_adjust,
    prf_adjust,
    rank,
    reconstruction_query,
    search,
)
from semhash.textpipe import Document, SparseVector


def sv(pairs, dim):
    ids = np.array([i for i, _ in pairs], dtype=np.int32)
    weights = np.array([w for _, w in pairs], dtype=np.float64)
    return SparseVector(ids=ids, weights=weights, dim=dim)


class TestCosine:
    def test_self_similarity_is_one(self):
        v = sv([(0, 0.5), (3, 2.0)], 5)
        assert cosine(v, v) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        assert cosine(sv([(0, 1.0)], 4), sv([(1, 1.0)], 4)) == 0.0

    def test_hand_arithmetic(self):
        a = sv([(0, 1.0), (1, 1.0)], 3)
        b = sv([(0, 1.0)], 3)
        assert cosine(a, b) == pytest.approx(1.0 / np.sqrt(2.0))

    def test_zero_vector_scores_zero(self):
        assert cosine(SparseVector.empty(3), sv([(0, 1.0)], 3)) == 0.0

    def test_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            ids_a = np.sort(rng.choice(12, size=n, replace=False))
            ids_b = np.sort(rng.choice(12, size=n, replace=False))
            a = SparseVector(ids=ids_a, weights=rng.uniform(0.1, 3, n), dim=12)
            b = SparseVector(ids=ids_b, weights=rng.uniform(0.1, 3, n), dim=12)
            c = float(rng.uniform(0.01, 100))
            scaled = SparseVector(ids=a.ids, weights=a.weights * c, dim=12)
            assert cosine(scaled, b) == pytest.approx(cosine(a, b), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine(sv([(0, 1.0)], 3), sv([(0, 1.0)], 4))


class TestRank:
    def test_exact_match_ranks_first(self, small_engine):
        store = small_engine.store
        doc_id = int(store.ids[0])
        q = store.vector(doc_id)
        ranked = rank(q, store.ids.tolist(), store, m=5)
        assert ranked[0][0] == doc_id
        assert ranked[0][1] == pytest.approx(1.0)

    def test_rank_depth_zero(self, small_engine):
        store = small_engine.store
        assert rank(store.vector(int(store.ids[0])), store.ids.tolist(), store, 0) == []

    def test_parallel_beats_orthogonal_with_id_tiebreak(self, small_engine):
        # synthetic 4-dim store: candidates 0..3, query parallel to doc 2
        from scipy import sparse

        from semhash.textpipe import ScalingStats, VectorStore

        mat = sparse.csr_matrix(
            np.array(
                [
                    [1.0, 0, 0, 0],
                    [0, 1.0, 0, 0],
                    [0, 0, 2.0, 0],
                    [0, 0, 0, 1.0],
                ]
            )
        )
        store = VectorStore([10, 11, 12, 13], [0, 0, 0, 0], mat, ScalingStats(2.0))
        q = sv([(2, 1.0)], 4)
        ranked = rank(q, [10, 11, 12, 13], store, m=4)
        assert [d for d, _ in ranked] == [12, 10, 11, 13]
        assert ranked[0][1] == pytest.approx(1.0)
        assert all(s == 0.0 for _, s in ranked[1:])

    def test_scores_non_increasing(self, small_engine):
        store = small_engine.store
        q = store.vector(int(store.ids[3]))
        ranked = rank(q, store.ids.tolist(), store, m=20)
        scores = [s for _, s in ranked]
        assert scores == sorted(scores, reverse=True)


class TestPrfAdjust:
    def test_identical_feedback_doubles_query(self):
        q = sv([(0, 1.0), (2, 0.5)], 4)
        out = prf_adjust(q, [q, q, q])
        assert out.ids.tolist() == q.ids.tolist()
        assert np.allclose(out.weights, 2 * q.weights)

    def test_single_document(self):
        q = sv([(0, 1.0)], 3)
        d = sv([(1, 2.0)], 3)
        out = prf_adjust(q, [d])
        assert out.ids.tolist() == [0, 1]
        assert out.weights.tolist() == [1.0, 2.0]

    def test_hand_arithmetic(self):
        q = sv([(0, 1.0)], 2)
        docs = [sv([(1, 2.0)], 2), sv([(1, 4.0)], 2)]
        out = prf_adjust(q, docs)
        assert out.ids.tolist() == [0, 1]
        assert out.weights.tolist() == [1.0, 3.0]

    def test_rejects_empty_feedback(self):
        with pytest.raises(ValueError):
            prf_adjust(sv([(0, 1.0)], 2), [])


class TestGsaAdjust:
    def test_alpha_zero_is_identity(self):
        net = init_network([4, 2, 4], seed=0)
        q = np.array([0.1, 0.5, 0.9, 0.0])
        assert np.array_equal(gsa_adjust(q, net, sigma=2.0, alpha=0.0), q)

    def test_perfect_reconstruction_is_fixed_point(self):
        # identity-ish: zero-weight net reconstructs 0.5 everywhere, so feed 0.5
        net = init_network([3, 2, 3], seed=0)
        for w in net.weights:
            w[:] = 0.0
        q = np.full(3, 0.5)
        assert np.allclose(gsa_adjust(q, net, sigma=1.0, alpha=5.0), q)

    def test_hand_arithmetic(self):
        net = init_network([1, 1, 1], seed=0)
        q = np.array([0.5])
        r = reconstruct(net, q)
        expected = max(0.5 - (r[0] - 0.5) / 4.0, 0.0)
        assert gsa_adjust(q, net, sigma=2.0, alpha=1.0)[0] == pytest.approx(expected)

    def test_affine_in_alpha(self):
        net = init_network([5, 3, 5], seed=1)
        q = np.random.default_rng(2).uniform(0.3, 0.7, 5)
        out = [gsa_adjust(q, net, sigma=2.0, alpha=a) for a in (0.0, 0.5, 1.0)]
        assert np.allclose(out[2] - out[1], out[1] - out[0], atol=1e-12)

    def test_clips_at_zero(self):
        net = init_network([1, 1, 1], seed=0)
        q = np.array([0.01])
        out = gsa_adjust(q, net, sigma=0.1, alpha=10.0)
        assert out[0] >= 0.0

    def test_rejects_nonpositive_sigma(self):
        net = init_network([2, 1, 2], seed=0)
        with pytest.raises(ValueError):
            gsa_adjust(np.array([0.5, 0.5]), net, sigma=0.0, alpha=1.0)


class TestReconstructionQuery:
    def test_zero_network_gives_uniform_half(self):
        net = init_network([4, 2, 4], seed=0)
        for w in net.weights:
            w[:] = 0.0
        out = reconstruction_query(np.array([0.9, 0.0, 0.3, 1.0]), net)
        assert np.allclose(out, 0.5)

    def test_equals_forward_reconstruction(self):
        net = init_network([6, 3, 6], seed=4)
        q = np.random.default_rng(3).uniform(0, 1, 6)
        assert np.array_equal(reconstruction_query(q, net), reconstruct(net, q))


class TestSearch:
    def _cfg(self, engine, **kw):
        base = dict(radius=2, rank_depth=10, min_count=1, max_radius=engine.index.width)
        base.update(kw)
        return QueryConfig(**base)

    def test_self_retrieval_ranks_query_document_first(self, small_corpus, small_engine):
        doc = small_corpus[0]
        result = search(doc, small_engine, self._cfg(small_engine, variant="tfidf"))
        assert result.results[0][0] == doc.id
        assert result.results[0][1] == pytest.approx(1.0)

    def test_gsa_alpha_zero_identical_to_tfidf(self, small_corpus, small_engine):
        for doc in small_corpus[:6]:
            plain = search(doc, small_engine, self._cfg(small_engine, variant="tfidf"))
            gsa = search(doc, small_engine, self._cfg(small_engine, variant="gsa", gsa_alpha=0.0))
            assert plain.results == gsa.results
            assert plain.effective_radius == gsa.effective_radius

    def test_prf_preserves_preselection(self, small_corpus, small_engine):
        doc = small_corpus[1]
        plain = search(doc, small_engine, self._cfg(small_engine, variant="tfidf"))
        prf = search(doc, small_engine, self._cfg(small_engine, variant="prf", prf_k=3))
        assert prf.preselected_ids == plain.preselected_ids
        assert set(prf.doc_ids) <= set(prf.preselected_ids)

    def test_prf_corpus_scope_can_leave_preselection(self, small_corpus, small_engine):
        doc = small_corpus[2]
        cfg = self._cfg(small_engine, variant="prf", prf_k=3, prf_scope="corpus", rank_depth=40)
        result = search(doc, small_engine, cfg)
        assert result.preselection_size <= len(result.results) or result.results

    def test_gsa_prf_runs_and_respects_scope(self, small_corpus, small_engine):
        doc = small_corpus[3]
        result = search(doc, small_engine, self._cfg(small_engine, variant="gsa+prf"))
        assert set(result.doc_ids) <= set(result.preselected_ids)

    def test_reconstruction_variant_runs(self, small_corpus, small_engine):
        doc = small_corpus[4]
        result = search(doc, small_engine, self._cfg(small_engine, variant="reconstruction"))
        assert len(result.results) > 0

    def test_missing_preselection_reports_diagnostic(self, small_corpus, small_engine):
        from semhash.hashindex import BinaryCode, build_index
        from semhash.retrieval import Engine

        doc = small_corpus[0]
        code = small_engine.code_for(small_engine.vectorize(doc.text))
        far = BinaryCode(code.value ^ 0b11111, code.width)  # distance 5 from query
        lonely = Engine(
            vocab=small_engine.vocab,
            store=small_engine.store,
            net=small_engine.net,
            index=build_index([(int(small_engine.store.ids[0]), far)]),
            stopwords=small_engine.stopwords,
        )
        cfg = QueryConfig(radius=0, rank_depth=5, min_count=0, max_radius=2)
        result = search(doc, lonely, cfg)
        assert result.preselection_size == 0
        assert result.results == []
        assert "radius" in result.diagnostic

    def test_invalid_variant_rejected(self):
        with pytest.raises(ValueError):
            QueryConfig(variant="nope")

    def test_prf_requires_positive_k(self):
        with pytest.raises(ValueError):
            QueryConfig(variant="prf", prf_k=0)

    def test_gsa_requires_positive_sigma(self):
        with pytest.raises(ValueError):
            QueryConfig(variant="gsa", gsa_sigma=0.0)
