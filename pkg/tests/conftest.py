import numpy as np
import pytest

from semhash.autoencoder import TrainConfig, encode, init_network, train
from semhash.datasets import synthetic_corpus
from semhash.hashindex import binarize, build_index
from semhash.retrieval import Engine
from semhash.textpipe import VectorStore, build_vocabulary, scale_for_network


def build_engine(
    docs,
    code_bits=8,
    hidden=(16,),
    epochs=5,
    noise_sigma=0.3,
    seed=0,
    stopwords=frozenset(),
):
    """Assemble a ready-to-query engine from in-memory documents."""
    vocab = build_vocabulary(docs, stopwords=stopwords, min_df_frac=0.0, max_df_frac=1.0, top_n=10_000)
    store = VectorStore.from_documents(docs, vocab, stopwords)
    dims = [vocab.size, *hidden, code_bits, *reversed(hidden), vocab.size]
    net = init_network(dims, seed=seed)
    net, _ = train(
        net,
        np.array([scale_for_network(store.vector(int(d)), store.scaling) for d in store.ids]),
        TrainConfig(epochs=epochs, batch_size=16, noise_sigma=noise_sigma, seed=seed),
    )
    codes = []
    for doc_id in store.ids:
        x = scale_for_network(store.vector(int(doc_id)), store.scaling)
        codes.append((int(doc_id), binarize(encode(net, x))))
    return Engine(vocab=vocab, store=store, net=net, index=build_index(codes), stopwords=stopwords)


@pytest.fixture(scope="session")
def small_corpus():
    return synthetic_corpus(
        n_classes=2, docs_per_class=20, vocab_size=40, doc_len=(15, 30), boost=8.0, seed=5
    )


@pytest.fixture(scope="session")
def small_engine(small_corpus):
    return build_engine(small_corpus, code_bits=8, epochs=5, seed=3)
