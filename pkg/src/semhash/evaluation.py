"""Precision@k experiment harness comparing retrieval variants, with
preselection-density diagnostics."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from semhash.retrieval import Engine, QueryConfig
from semhash.textpipe import Document


def precision_at_k(
    ranked: list[int], query_label: int, labels: dict[int, int], k: int
) -> float:
    """Fraction of the top-min(k, |ranked|) documents sharing the query label;
    zero for an empty ranking."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ranked:
        return 0.0
    top = ranked[: min(k, len(ranked))]
    hits = sum(1 for d in top if labels[d] == query_label)
    return hits / len(top)


@dataclass
class QueryLog:
    """Per-query evaluation record; the report's curves aggregate these."""

    query_id: int
    label: int
    preselection_size: int
    effective_radius: int
    relevant_preselected: int
    retrieved: int
    precisions: list[float]          # precision@k for k = 1..k_max
    recall: float                    # retrieved relevant / corpus relevant

    @property
    def density(self) -> float:
        if self.preselection_size == 0:
            return 0.0
        return self.relevant_preselected / self.preselection_size


@dataclass
class VariantReport:
    variant: str
    curve: list[float]               # mean precision@k over queries, k = 1..k_max
    density: float                   # pooled over queries: sum rel / sum size
    empty_preselections: int
    per_query: list[QueryLog] = field(repr=False, default_factory=list)


@dataclass
class EvalReport:
    variants: list[VariantReport]
    n_queries: int
    k_max: int
    config: dict = field(default_factory=dict)

    def variant(self, name: str) -> VariantReport:
        for v in self.variants:
            if v.variant == name:
                return v
        raise KeyError(name)


def _evaluate_query(
    engine: Engine, query: Document, cfg: QueryConfig, k_max: int, labels: dict[int, int]
) -> QueryLog:
    result = engine.search(query, cfg)
    ranked = result.doc_ids
    precisions = [precision_at_k(ranked, query.label, labels, k) for k in range(1, k_max + 1)]
    relevant_pre = sum(1 for d in result.preselected_ids if labels[d] == query.label)
    corpus_relevant = int(np.sum(engine.store.labels == query.label))
    retrieved_relevant = sum(1 for d in ranked if labels[d] == query.label)
    recall = retrieved_relevant / corpus_relevant if corpus_relevant else 0.0
    return QueryLog(
        query_id=query.id,
        label=query.label,
        preselection_size=result.preselection_size,
        effective_radius=result.effective_radius,
        relevant_preselected=relevant_pre,
        retrieved=len(ranked),
        precisions=precisions,
        recall=recall,
    )


def run_experiment(
    engine: Engine,
    queries: list[Document],
    variants: list[str],
    cfg: QueryConfig,
    k_max: int = 100,
    threads: int = 1,
    config_snapshot: dict | None = None,
) -> EvalReport:
    """Search every query under every variant and aggregate precision curves.

    Queries run independently (optionally across threads); aggregation is an
    ordered reduction over the query list, so the report is deterministic.
    """
    if cfg.rank_depth < k_max:
        cfg = replace(cfg, rank_depth=k_max)
    labels = {int(d): int(l) for d, l in zip(engine.store.ids, engine.store.labels)}
    reports = []
    for variant in variants:
        vcfg = replace(cfg, variant=variant)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                logs = list(
                    pool.map(
                        lambda q: _evaluate_query(engine, q, vcfg, k_max, labels),
                        queries,
                    )
                )
        else:
            logs = [_evaluate_query(engine, q, vcfg, k_max, labels) for q in queries]
        curve = np.zeros(k_max, dtype=np.float64)
        for log in logs:
            curve += np.asarray(log.precisions)
        curve /= max(len(logs), 1)
        total_pre = sum(log.preselection_size for log in logs)
        total_rel = sum(log.relevant_preselected for log in logs)
        reports.append(
            VariantReport(
                variant=variant,
                curve=curve.tolist(),
                density=total_rel / total_pre if total_pre else 0.0,
                empty_preselections=sum(1 for log in logs if log.preselection_size == 0),
                per_query=logs,
            )
        )
    return EvalReport(
        variants=reports,
        n_queries=len(queries),
        k_max=k_max,
        config=dict(config_snapshot or {}),
    )


def export_report(report: EvalReport, csv_path: str | Path, json_path: str | Path):
    """Long-format CSV (variant, k, mean_precision) plus a full JSON mirror.

    Floats are written with repr so a parse-back reproduces them exactly,
    and re-exports of the same report are byte-identical.
    """
    csv_path, json_path = Path(csv_path), Path(json_path)
    lines = ["variant,k,mean_precision"]
    for v in report.variants:
        for k, p in enumerate(v.curve, start=1):
            lines.append(f"{v.variant},{k},{p!r}")
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    payload = {
        "n_queries": report.n_queries,
        "k_max": report.k_max,
        "config": report.config,
        "variants": [asdict(v) for v in report.variants],
    }
    json_path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return csv_path, json_path
