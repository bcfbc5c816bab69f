"""Pipeline orchestration: ingest, train, index, query, eval.

Each stage reads its predecessors' artifacts from the run directory and
writes its own atomically, alongside a copy of the fully-resolved config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from semhash import storage
from semhash.autoencoder import TrainConfig, default_activations, encode, init_network, train
from semhash.config import ConfigError, PipelineConfig, resolve_config
from semhash.evaluation import export_report, run_experiment
from semhash.hashindex import binarize, build_index
from semhash.rbm import RbmTrainConfig, pretrain_stack, unroll
from semhash.retrieval import Engine, QueryConfig
from semhash.textpipe import (
    Document,
    VectorStore,
    build_vocabulary,
    load_corpus,
    load_default_stopwords,
    scale_for_network,
)

ART_VOCAB = "vocab.bin"
ART_VECTORS = "vectors.bin"
ART_NETWORK = "network.bin"
ART_RBM = "rbm_stack.bin"
ART_INDEX = "index.bin"
ART_EVAL_CSV = "eval.csv"
ART_EVAL_JSON = "eval.json"
ART_CONFIG = "config.resolved"

# artifact -> stage that produces it, for actionable missing-artifact errors
_PRODUCED_BY = {
    ART_VOCAB: "ingest",
    ART_VECTORS: "ingest",
    ART_NETWORK: "train",
    ART_INDEX: "index",
}


class StageError(RuntimeError):
    pass


def _require(cfg: PipelineConfig, name: str) -> Path:
    path = cfg.artifact(name)
    if not path.exists():
        raise StageError(
            f"missing artifact {path}; run `semhash {_PRODUCED_BY[name]}` first"
        )
    return path


def _stopwords(cfg: PipelineConfig) -> frozenset[str]:
    choice = cfg["textpipe.stopwords"]
    if choice == "builtin":
        return load_default_stopwords()
    if choice == "none":
        return frozenset()
    words = Path(choice).read_text("utf-8").split()
    return frozenset(w for w in words if not w.startswith("#"))


def _write_resolved_config(cfg: PipelineConfig):
    cfg.run_dir.mkdir(parents=True, exist_ok=True)
    cfg.artifact(ART_CONFIG).write_text(cfg.to_text(), encoding="utf-8")


def _load_corpus(cfg: PipelineConfig, key: str = "corpus.path"):
    path = cfg[key]
    if not path:
        raise StageError(f"config key {key} is empty; point it at a corpus")
    return load_corpus(path, cfg["corpus.format"])


def cmd_ingest(cfg: PipelineConfig) -> int:
    docs, label_names = _load_corpus(cfg)
    stopwords = _stopwords(cfg)
    vocab = build_vocabulary(
        docs,
        stopwords=stopwords,
        min_df_frac=cfg["textpipe.min_df_frac"],
        max_df_frac=cfg["textpipe.max_df_frac"],
        top_n=cfg["textpipe.top_n"],
    )
    store = VectorStore.from_documents(docs, vocab, stopwords, label_names)
    _write_resolved_config(cfg)
    storage.write_vocabulary(cfg.artifact(ART_VOCAB), vocab)
    storage.write_vector_store(cfg.artifact(ART_VECTORS), store)
    print(
        f"ingested {len(store)} documents, vocabulary {vocab.size} features "
        f"-> {cfg.artifact(ART_VOCAB)}, {cfg.artifact(ART_VECTORS)}"
    )
    return 0


def _network_dims(cfg: PipelineConfig, input_dim: int) -> list[int]:
    hidden = list(cfg["train.hidden"])
    return [input_dim, *hidden, cfg["train.code_bits"], *reversed(hidden), input_dim]


def _scaled_inputs(store: VectorStore) -> np.ndarray:
    data = np.empty((len(store), store.dim))
    for i, doc_id in enumerate(store.ids):
        data[i] = scale_for_network(store.vector(int(doc_id)), store.scaling)
    return data


def cmd_train(cfg: PipelineConfig) -> int:
    store = storage.read_vector_store(_require(cfg, ART_VECTORS))
    data = _scaled_inputs(store)
    dims = _network_dims(cfg, store.dim)
    seed = cfg["seed"]

    if cfg["train.pretrain"]:
        encoder_dims = dims[: len(dims) // 2 + 1]
        stack = pretrain_stack(
            encoder_dims,
            data,
            RbmTrainConfig(
                epochs=cfg["train.pretrain_epochs"],
                batch_size=cfg["train.pretrain_batch_size"],
                learning_rate=cfg["train.pretrain_learning_rate"],
                seed=seed,
            ),
        )
        storage.write_rbm_stack(cfg.artifact(ART_RBM), stack)
        net = unroll(stack)
    else:
        net = init_network(dims, seed=seed, activations=default_activations(dims))

    trained, trace = train(
        net,
        data,
        TrainConfig(
            epochs=cfg["train.epochs"],
            batch_size=cfg["train.batch_size"],
            noise_sigma=cfg["train.noise_sigma"],
            seed=seed,
            loss=cfg["train.loss"],
            rho=cfg["train.rho"],
            eps=cfg["train.eps"],
            learning_rate=cfg["train.learning_rate"],
        ),
    )
    _write_resolved_config(cfg)
    storage.write_network(cfg.artifact(ART_NETWORK), trained)
    first = f"{trace[0]:.4f}" if trace else "n/a"
    last = f"{trace[-1]:.4f}" if trace else "n/a"
    print(
        f"trained {dims} for {cfg['train.epochs']} epochs "
        f"(loss {first} -> {last}) -> {cfg.artifact(ART_NETWORK)}"
    )
    return 0


def cmd_index(cfg: PipelineConfig) -> int:
    store = storage.read_vector_store(_require(cfg, ART_VECTORS))
    net = storage.read_network(_require(cfg, ART_NETWORK))
    threshold = cfg["hash.threshold"]
    codes = []
    for doc_id in store.ids:
        x = scale_for_network(store.vector(int(doc_id)), store.scaling)
        codes.append((int(doc_id), binarize(encode(net, x), threshold)))
    index = build_index(codes)
    _write_resolved_config(cfg)
    storage.write_index(cfg.artifact(ART_INDEX), index)
    print(
        f"indexed {len(index)} documents into {len(index.buckets)} buckets "
        f"({index.width}-bit codes) -> {cfg.artifact(ART_INDEX)}"
    )
    return 0


def _load_engine(cfg: PipelineConfig) -> Engine:
    vocab = storage.read_vocabulary(_require(cfg, ART_VOCAB))
    store = storage.read_vector_store(_require(cfg, ART_VECTORS))
    net = storage.read_network(_require(cfg, ART_NETWORK))
    index = storage.read_index(_require(cfg, ART_INDEX))
    return Engine(vocab=vocab, store=store, net=net, index=index, stopwords=_stopwords(cfg))


def _query_config(cfg: PipelineConfig, width: int, variant: str | None = None) -> QueryConfig:
    return QueryConfig(
        radius=cfg["hash.radius"],
        rank_depth=cfg["query.rank_depth"],
        prf_k=cfg["query.prf_k"],
        gsa_alpha=cfg["query.alpha"],
        gsa_sigma=cfg.gsa_sigma(),
        variant=variant or cfg["query.variant"],
        prf_scope=cfg["query.prf_scope"],
        min_count=cfg["hash.min_count"],
        max_radius=cfg.max_radius(width),
        binarize_threshold=cfg["hash.threshold"],
    )


def _result_json(query_id, variant, result, engine) -> str:
    return json.dumps(
        {
            "query_id": query_id,
            "variant": variant,
            "radius": result.effective_radius,
            "preselection_size": result.preselection_size,
            "results": [
                {"doc_id": d, "score": s, "label": engine.store.label_of(d)}
                for d, s in result.results
            ],
        },
        sort_keys=True,
    )


def cmd_query(cfg: PipelineConfig, text: str | None, doc_id: int | None) -> int:
    engine = _load_engine(cfg)
    if (text is None) == (doc_id is None):
        raise StageError("query needs exactly one of --text or --doc-id")
    if text is not None:
        query = Document(id=-1, text=text)
    else:
        source = cfg["corpus.queries_path"] or cfg["corpus.path"]
        docs, _ = load_corpus(source, cfg["corpus.format"])
        matches = [d for d in docs if d.id == doc_id]
        if not matches:
            raise StageError(f"no document with id {doc_id} in {source}")
        query = matches[0]
    qcfg = _query_config(cfg, engine.index.width)
    result = engine.search(query, qcfg)
    print(_result_json(query.id, qcfg.variant, result, engine))
    if result.diagnostic:
        print(f"note: {result.diagnostic}", file=sys.stderr)
    return 0


def cmd_eval(cfg: PipelineConfig) -> int:
    engine = _load_engine(cfg)
    if not cfg["corpus.queries_path"]:
        raise StageError("config key corpus.queries_path is empty; eval needs queries")
    queries, _ = _load_corpus(cfg, "corpus.queries_path")
    report = run_experiment(
        engine,
        queries,
        variants=list(cfg["eval.variants"]),
        cfg=_query_config(cfg, engine.index.width),
        k_max=cfg["eval.k_max"],
        threads=cfg["threads"],
        config_snapshot=dict(
            (k, list(v) if isinstance(v, tuple) else v) for k, v in cfg.values.items()
        ),
    )
    _write_resolved_config(cfg)
    csv_path, json_path = export_report(
        report, cfg.artifact(ART_EVAL_CSV), cfg.artifact(ART_EVAL_JSON)
    )
    for v in report.variants:
        p10 = v.curve[min(9, len(v.curve) - 1)]
        print(
            f"{v.variant}: precision@10 {p10:.3f}, preselection density "
            f"{v.density:.3f}, empty preselections {v.empty_preselections}"
        )
    print(f"report -> {csv_path}, {json_path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semhash",
        description="Semantic-hashing retrieval pipeline (ingest/train/index/query/eval)",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="override the `seed` config key")
    parser.add_argument("--threads", type=int, help="override the `threads` config key")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable; wins over the file)",
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the fully-resolved config and exit",
    )
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("ingest", help="build vocabulary and TF-IDF vector store")
    sub.add_parser("train", help="train the autoencoder")
    sub.add_parser("index", help="encode documents and build the hamming index")
    q = sub.add_parser("query", help="run one query, JSON-lines on stdout")
    q.add_argument("--text", help="free-text query")
    q.add_argument("--doc-id", type=int, help="query by document id")
    sub.add_parser("eval", help="run the precision@k experiment harness")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        key, _, val = item.partition("=")
        overrides[key.strip()] = val.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.threads is not None:
        overrides["threads"] = str(args.threads)

    try:
        cfg = resolve_config(args.config, overrides)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.print_config:
        sys.stdout.write(cfg.to_text())
        return 0
    if not args.command:
        _build_parser().print_usage(sys.stderr)
        return 2

    try:
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "index":
            return cmd_index(cfg)
        if args.command == "query":
            return cmd_query(cfg, args.text, args.doc_id)
        if args.command == "eval":
            return cmd_eval(cfg)
        raise AssertionError(args.command)
    except (StageError, ConfigError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
