import json

import numpy as np
import pytest

from semhash import storage
from semhash.autoencoder import init_network
from semhash.hashindex import BinaryCode, build_index
from semhash.rbm import init_rbm
from semhash.textpipe import Document, VectorStore, build_vocabulary

from conftest import build_engine


@pytest.fixture(scope="module")
def corpus_bits():
    docs = [
        Document(id=0, text="alpha beta beta gamma", label=0),
        Document(id=1, text="beta gamma gamma", label=0),
        Document(id=2, text="delta epsilon alpha", label=1),
        Document(id=3, text="epsilon delta delta", label=1),
    ]
    vocab = build_vocabulary(docs, min_df_frac=0.0, max_df_frac=1.0, top_n=100)
    store = VectorStore.from_documents(docs, vocab, label_names=["news", "sport"])
    return docs, vocab, store


class TestVocabulary:
    def test_round_trip(self, tmp_path, corpus_bits):
        _, vocab, _ = corpus_bits
        path = tmp_path / "vocab.bin"
        storage.write_vocabulary(path, vocab)
        back = storage.read_vocabulary(path)
        assert back.tokens == vocab.tokens
        assert back.n_docs == vocab.n_docs
        assert np.array_equal(back.doc_freq, vocab.doc_freq)

    def test_json_export_parses(self, corpus_bits):
        _, vocab, _ = corpus_bits
        payload = json.loads(storage.vocabulary_to_json(vocab))
        assert payload["tokens"] == vocab.tokens

    def test_wrong_kind_rejected(self, tmp_path, corpus_bits):
        _, vocab, store = corpus_bits
        path = tmp_path / "vectors.bin"
        storage.write_vector_store(path, store)
        with pytest.raises(storage.StorageError, match="holds"):
            storage.read_vocabulary(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPExxxxxxxxxxxxxxxx")
        with pytest.raises(storage.StorageError, match="magic"):
            storage.read_vocabulary(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            storage.read_vocabulary(tmp_path / "absent.bin")


class TestVectorStoreContainer:
    def test_round_trip(self, tmp_path, corpus_bits):
        docs, _, store = corpus_bits
        path = tmp_path / "vectors.bin"
        storage.write_vector_store(path, store)
        back = storage.read_vector_store(path)
        assert np.array_equal(back.ids, store.ids)
        assert np.array_equal(back.labels, store.labels)
        assert back.label_names == ["news", "sport"]
        assert back.scaling.max_weight == store.scaling.max_weight
        for doc in docs:
            a, b = store.vector(doc.id), back.vector(doc.id)
            assert a.ids.tolist() == b.ids.tolist()
            assert a.weights.tolist() == b.weights.tolist()

    def test_write_is_deterministic(self, tmp_path, corpus_bits):
        _, _, store = corpus_bits
        storage.write_vector_store(tmp_path / "a.bin", store)
        storage.write_vector_store(tmp_path / "b.bin", store)
        assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


class TestNetworkContainer:
    def test_round_trip(self, tmp_path):
        net = init_network([7, 4, 2, 4, 7], seed=13)
        path = tmp_path / "net.bin"
        storage.write_network(path, net)
        back = storage.read_network(path)
        assert back.dims == net.dims
        assert back.activations == net.activations
        for a, b in zip(net.weights + net.biases, back.weights + back.biases):
            assert np.array_equal(a, b)

    def test_json_export(self):
        net = init_network([3, 2, 3], seed=0)
        payload = json.loads(storage.network_to_json(net))
        assert payload["dims"] == [3, 2, 3]
        assert len(payload["weights"]) == 2


class TestRbmStackContainer:
    def test_round_trip(self, tmp_path):
        stack = [init_rbm(6, 4, seed=0), init_rbm(4, 2, seed=1)]
        path = tmp_path / "stack.bin"
        storage.write_rbm_stack(path, stack)
        back = storage.read_rbm_stack(path)
        assert len(back) == 2
        for a, b in zip(stack, back):
            assert np.array_equal(a.weights, b.weights)
            assert np.array_equal(a.visible_bias, b.visible_bias)
            assert np.array_equal(a.hidden_bias, b.hidden_bias)


class TestIndexContainer:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        codes = [
            (i, BinaryCode(int(rng.integers(0, 2**12)), 12)) for i in range(30)
        ]
        index = build_index(codes)
        path = tmp_path / "index.bin"
        storage.write_index(path, index)
        back = storage.read_index(path)
        assert back.width == index.width
        assert back.buckets == index.buckets
        assert np.array_equal(back.scan_ids, index.scan_ids)
        assert np.array_equal(back.scan_codes, index.scan_codes)

    def test_round_trip_multiword(self, tmp_path):
        codes = [(0, BinaryCode((1 << 79) | 3, 80)), (1, BinaryCode(1 << 64, 80))]
        index = build_index(codes)
        storage.write_index(tmp_path / "wide.bin", index)
        back = storage.read_index(tmp_path / "wide.bin")
        assert back.buckets == index.buckets

    def test_empty_index(self, tmp_path):
        index = build_index([], width=8)
        storage.write_index(tmp_path / "empty.bin", index)
        assert len(storage.read_index(tmp_path / "empty.bin")) == 0
