import json

import numpy as np
import pytest

from semhash.datasets import synthetic_corpus
from semhash.evaluation import (
    EvalReport,
    VariantReport,
    export_report,
    precision_at_k,
    run_experiment,
)
from semhash.retrieval import QueryConfig

from conftest import build_engine


class TestPrecisionAtK:
    LABELS = {1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 1, 7: 1, 8: 1, 9: 1, 10: 1}

    def test_all_relevant(self):
        assert precision_at_k([1, 2, 3, 4, 5], 0, self.LABELS, 5) == 1.0

    def test_none_relevant(self):
        assert precision_at_k([6, 7, 8, 9, 10], 0, self.LABELS, 10) == 0.0

    def test_three_of_five(self):
        assert precision_at_k([1, 6, 2, 7, 3], 0, self.LABELS, 5) == pytest.approx(0.6)

    def test_empty_ranking_scores_zero(self):
        assert precision_at_k([], 0, self.LABELS, 5) == 0.0

    def test_short_ranking_uses_retrieved_count(self):
        assert precision_at_k([1, 6], 0, self.LABELS, 10) == pytest.approx(0.5)

    def test_rejects_nonpositive_k(self):
        with pytest.raises(ValueError):
            precision_at_k([1], 0, self.LABELS, 0)

    def test_always_in_unit_interval(self):
        rng = np.random.default_rng(0)
        ids = list(self.LABELS)
        for _ in range(50):
            ranked = list(rng.choice(ids, size=rng.integers(0, 10), replace=False))
            p = precision_at_k(ranked, int(rng.integers(0, 2)), self.LABELS, int(rng.integers(1, 12)))
            assert 0.0 <= p <= 1.0


@pytest.fixture(scope="module")
def eval_setup():
    corpus = synthetic_corpus(
        n_classes=2, docs_per_class=15, vocab_size=30, doc_len=(12, 25), boost=8.0, seed=9
    )
    queries = synthetic_corpus(
        n_classes=2, docs_per_class=4, vocab_size=30, doc_len=(12, 25), boost=8.0,
        seed=10, id_offset=1000,
    )
    engine = build_engine(corpus, code_bits=6, epochs=4, seed=1)
    return engine, queries


def _cfg(engine):
    return QueryConfig(radius=2, rank_depth=10, min_count=1, max_radius=engine.index.width)


class TestRunExperiment:
    def test_single_class_corpus_gives_perfect_curves(self):
        corpus = synthetic_corpus(n_classes=1, docs_per_class=20, vocab_size=20, seed=2)
        queries = synthetic_corpus(
            n_classes=1, docs_per_class=3, vocab_size=20, seed=3, id_offset=500
        )
        engine = build_engine(corpus, code_bits=5, epochs=2, seed=0)
        report = run_experiment(
            engine, queries, ["tfidf", "prf"], _cfg(engine), k_max=10
        )
        for variant in report.variants:
            assert variant.curve == [1.0] * 10
            assert variant.density == 1.0

    def test_gsa_alpha_zero_matches_tfidf_curve(self, eval_setup):
        engine, queries = eval_setup
        cfg = QueryConfig(
            radius=2, rank_depth=10, min_count=1, max_radius=engine.index.width, gsa_alpha=0.0
        )
        report = run_experiment(engine, queries, ["tfidf", "gsa"], cfg, k_max=10)
        assert report.variant("tfidf").curve == report.variant("gsa").curve

    def test_order_invariance_of_mean_curves(self, eval_setup):
        engine, queries = eval_setup
        fwd = run_experiment(engine, queries, ["tfidf"], _cfg(engine), k_max=8)
        rev = run_experiment(engine, list(reversed(queries)), ["tfidf"], _cfg(engine), k_max=8)
        assert np.allclose(fwd.variant("tfidf").curve, rev.variant("tfidf").curve)

    def test_density_is_weighted_mean_of_per_query_densities(self, eval_setup):
        engine, queries = eval_setup
        report = run_experiment(engine, queries, ["tfidf"], _cfg(engine), k_max=5)
        v = report.variant("tfidf")
        sizes = np.array([q.preselection_size for q in v.per_query], dtype=float)
        dens = np.array([q.density for q in v.per_query])
        assert v.density == pytest.approx(float((sizes * dens).sum() / sizes.sum()))

    def test_threads_do_not_change_report(self, eval_setup):
        engine, queries = eval_setup
        a = run_experiment(engine, queries, ["tfidf", "prf"], _cfg(engine), k_max=6, threads=1)
        b = run_experiment(engine, queries, ["tfidf", "prf"], _cfg(engine), k_max=6, threads=4)
        for va, vb in zip(a.variants, b.variants):
            assert va.curve == vb.curve
            assert va.density == vb.density


class TestExportReport:
    def _tiny_report(self):
        return EvalReport(
            variants=[
                VariantReport("tfidf", [1.0, 0.5], 0.4, 0, []),
                VariantReport("gsa", [0.75, 0.25], 0.5, 1, []),
            ],
            n_queries=4,
            k_max=2,
            config={"seed": 0},
        )

    def test_csv_row_count(self, tmp_path, eval_setup):
        engine, queries = eval_setup
        report = run_experiment(engine, queries, ["tfidf", "gsa"], _cfg(engine), k_max=100)
        csv_path, _ = export_report(report, tmp_path / "r.csv", tmp_path / "r.json")
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "variant,k,mean_precision"
        assert len(lines) == 1 + 2 * 100

    def test_re_export_is_byte_identical(self, tmp_path):
        report = self._tiny_report()
        export_report(report, tmp_path / "a.csv", tmp_path / "a.json")
        export_report(report, tmp_path / "b.csv", tmp_path / "b.json")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_csv_round_trip_full_precision(self, tmp_path, eval_setup):
        engine, queries = eval_setup
        report = run_experiment(engine, queries, ["tfidf"], _cfg(engine), k_max=20)
        csv_path, _ = export_report(report, tmp_path / "r.csv", tmp_path / "r.json")
        curve = report.variant("tfidf").curve
        for line in csv_path.read_text().strip().splitlines()[1:]:
            variant, k, p = line.split(",")
            assert float(p) == curve[int(k) - 1]

    def test_json_mirrors_report(self, tmp_path):
        report = self._tiny_report()
        _, json_path = export_report(report, tmp_path / "r.csv", tmp_path / "r.json")
        payload = json.loads(json_path.read_text())
        assert payload["n_queries"] == 4
        assert payload["variants"][0]["curve"] == [1.0, 0.5]
        assert payload["config"] == {"seed": 0}
