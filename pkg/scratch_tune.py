"""Scratch: explore acceptance-5 settings (not part of the deliverable)."""
import time

import numpy as np

from semhash.autoencoder import TrainConfig, encode, init_network, train
from semhash.datasets import synthetic_corpus
from semhash.evaluation import run_experiment
from semhash.hashindex import binarize, build_index
from semhash.retrieval import Engine, QueryConfig
from semhash.textpipe import VectorStore, build_vocabulary, scale_for_network

VARIANTS = ["tfidf", "gsa", "prf", "gsa+prf", "reconstruction"]


def one_seed(seed, noise, batch, boost, alpha, gsa_sigma, n_queries_per_class=30, epochs=50):
    t0 = time.time()
    corpus = synthetic_corpus(4, 250, 200, (40, 80), boost=boost, seed=100 + seed)
    queries = synthetic_corpus(4, n_queries_per_class, 200, (40, 80), boost=boost,
                               seed=200 + seed, id_offset=50_000)
    vocab = build_vocabulary(corpus, min_df_frac=0.0, max_df_frac=1.0, top_n=200)
    store = VectorStore.from_documents(corpus, vocab)
    data = np.array([scale_for_network(store.vector(int(d)), store.scaling) for d in store.ids])
    dims = [vocab.size, 64, 64, 12, 64, 64, vocab.size]
    net = init_network(dims, seed=seed)
    net, trace = train(net, data, TrainConfig(epochs=epochs, batch_size=batch,
                                              noise_sigma=noise, seed=seed))
    codes = [(int(d), binarize(encode(net, data[i]))) for i, d in enumerate(store.ids)]
    engine = Engine(vocab=vocab, store=store, net=net, index=build_index(codes))
    n_buckets = len(engine.index.buckets)
    cfg = QueryConfig(radius=2, rank_depth=10, min_count=0, max_radius=12,
                      gsa_alpha=alpha, gsa_sigma=gsa_sigma, prf_k=5)
    report = run_experiment(engine, queries, VARIANTS, cfg, k_max=10)
    p10 = {v.variant: v.curve[9] for v in report.variants}
    dens = report.variant("tfidf").density
    empt = report.variant("tfidf").empty_preselections
    mean_pre = np.mean([q.preselection_size for q in report.variant("tfidf").per_query])
    print(f"  seed={seed} loss {trace[0]:.1f}->{trace[-1]:.1f} buckets={n_buckets} "
          f"dens={dens:.3f} empty={empt} pre~{mean_pre:.0f} "
          + " ".join(f"{k}={v:.3f}" for k, v in p10.items())
          + f" [{time.time()-t0:.1f}s]")
    return dens, p10


def sweep(noise, batch, boost, alpha, gsa_sigma, seeds=(0, 1, 2, 3, 4)):
    print(f"noise={noise} batch={batch} boost={boost} alpha={alpha} gsa_sigma={gsa_sigma}")
    denss, p10s = [], []
    for s in seeds:
        d, p = one_seed(s, noise, batch, boost, alpha, gsa_sigma)
        denss.append(d)
        p10s.append(p)
    med = {k: float(np.median([p[k] for p in p10s])) for k in VARIANTS}
    print(f"  MEDIANS dens={np.median(denss):.3f} " + " ".join(f"{k}={v:.3f}" for k, v in med.items()))
    print(f"  checks: dens>0.25 {np.median(denss) > 0.25}, gsa+prf>=tfidf {med['gsa+prf'] >= med['tfidf']}, recon<tfidf {med['reconstruction'] < med['tfidf']}")
    return med


if __name__ == "__main__":
    import sys
    args = sys.argv[1:]
    noise = float(args[0]) if args else 0.3
    batch = int(args[1]) if len(args) > 1 else 256
    boost = float(args[2]) if len(args) > 2 else 6.0
    alpha = float(args[3]) if len(args) > 3 else 1.0
    gsig = float(args[4]) if len(args) > 4 else 2.0
    seeds = tuple(range(int(args[5]))) if len(args) > 5 else (0, 1, 2)
    sweep(noise, batch, boost, alpha, gsig, seeds)
