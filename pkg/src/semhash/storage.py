"""Versioned binary containers for pipeline artifacts.

Layout: 4-byte magic, u16 format version, 8-byte ASCII kind tag, then the
payload. All integers little-endian with explicit widths; floats are
little-endian IEEE f64; arrays are length-prefixed and row-major. Writes go
through a temp file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np
from scipy import sparse

from semhash.autoencoder import NetworkParams
from semhash.hashindex import HammingIndex, words_for_width
from semhash.rbm import RbmParams
from semhash.textpipe import ScalingStats, VectorStore, Vocabulary

MAGIC = b"SMHC"
VERSION = 1

KIND_VOCABULARY = b"VOCAB   "
KIND_VECTORS = b"VECSTORE"
KIND_NETWORK = b"NETWORK "
KIND_RBM_STACK = b"RBMSTACK"
KIND_INDEX = b"HAMINDEX"


class StorageError(RuntimeError):
    pass


def _write_atomic(path: str | Path, payload: bytes):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def _u8(x: int) -> bytes:
    return struct.pack("<B", x)


def _u32(x: int) -> bytes:
    return struct.pack("<I", x)


def _u64(x: int) -> bytes:
    return struct.pack("<Q", x)


def _i64(x: int) -> bytes:
    return struct.pack("<q", x)


def _f64(x: float) -> bytes:
    return struct.pack("<d", x)


def _str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _u32(len(raw)) + raw


def _array(a: np.ndarray, dtype: str) -> bytes:
    a = np.ascontiguousarray(a, dtype=dtype)
    return _u64(a.size) + a.tobytes()


class _Reader:
    def __init__(self, data: bytes, kind: bytes, path):
        self.data = data
        self.pos = 0
        if len(data) < 14:
            raise StorageError(f"{path}: truncated container")
        if data[:4] != MAGIC:
            raise StorageError(f"{path}: bad magic {data[:4]!r}")
        (version,) = struct.unpack_from("<H", data, 4)
        if version != VERSION:
            raise StorageError(f"{path}: unsupported container version {version}")
        if data[6:14] != kind:
            raise StorageError(
                f"{path}: container holds {data[6:14].decode().strip()!r}, "
                f"expected {kind.decode().strip()!r}"
            )
        self.pos = 14

    def _unpack(self, fmt: str):
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += struct.calcsize(fmt)
        return vals[0]

    def u8(self) -> int:
        return self._unpack("<B")

    def u32(self) -> int:
        return self._unpack("<I")

    def u64(self) -> int:
        return self._unpack("<Q")

    def i64(self) -> int:
        return self._unpack("<q")

    def f64(self) -> float:
        return self._unpack("<d")

    def str(self) -> str:
        n = self.u32()
        raw = self.data[self.pos : self.pos + n]
        self.pos += n
        return raw.decode("utf-8")

    def array(self, dtype: str) -> np.ndarray:
        n = self.u64()
        arr = np.frombuffer(self.data, dtype=dtype, count=n, offset=self.pos)
        self.pos += arr.nbytes
        return arr.copy()


def _header(kind: bytes) -> bytes:
    return MAGIC + struct.pack("<H", VERSION) + kind


def _open(path: str | Path, kind: bytes) -> _Reader:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    return _Reader(path.read_bytes(), kind, path)


# -- vocabulary ---------------------------------------------------------------

def write_vocabulary(path, vocab: Vocabulary):
    parts = [_header(KIND_VOCABULARY), _u64(vocab.n_docs), _u32(vocab.size)]
    for tok in vocab.tokens:
        parts.append(_str(tok))
    parts.append(_array(vocab.doc_freq, "<i8"))
    _write_atomic(path, b"".join(parts))


def read_vocabulary(path) -> Vocabulary:
    r = _open(path, KIND_VOCABULARY)
    n_docs = r.u64()
    size = r.u32()
    tokens = [r.str() for _ in range(size)]
    doc_freq = r.array("<i8")
    return Vocabulary(tokens=tokens, doc_freq=doc_freq, n_docs=n_docs)


def vocabulary_to_json(vocab: Vocabulary) -> str:
    return json.dumps(
        {
            "n_docs": vocab.n_docs,
            "tokens": vocab.tokens,
            "doc_freq": vocab.doc_freq.tolist(),
        },
        sort_keys=True,
    )


# -- vector store -------------------------------------------------------------

def write_vector_store(path, store: VectorStore):
    csr = store.matrix.tocsr()
    parts = [
        _header(KIND_VECTORS),
        _u64(len(store)),
        _u32(store.dim),
        _f64(store.scaling.max_weight),
        _u32(len(store.label_names)),
    ]
    for name in store.label_names:
        parts.append(_str(name))
    parts.append(_array(store.ids, "<i8"))
    parts.append(_array(store.labels, "<i8"))
    parts.append(_array(csr.indptr, "<i8"))
    parts.append(_array(csr.indices, "<i8"))
    parts.append(_array(csr.data, "<f8"))
    _write_atomic(path, b"".join(parts))


def read_vector_store(path) -> VectorStore:
    r = _open(path, KIND_VECTORS)
    n = r.u64()
    dim = r.u32()
    max_weight = r.f64()
    label_names = [r.str() for _ in range(r.u32())]
    ids = r.array("<i8")
    labels = r.array("<i8")
    indptr = r.array("<i8")
    indices = r.array("<i8")
    data = r.array("<f8")
    matrix = sparse.csr_matrix((data, indices, indptr), shape=(n, dim))
    return VectorStore(ids, labels, matrix, ScalingStats(max_weight), label_names)


# -- network ------------------------------------------------------------------

_ACT_TAGS = {"rectifier": 0, "logistic": 1}
_ACT_NAMES = {v: k for k, v in _ACT_TAGS.items()}


def write_network(path, net: NetworkParams):
    dims = net.dims
    parts = [_header(KIND_NETWORK), _u32(len(dims))]
    parts.extend(_u32(d) for d in dims)
    parts.extend(_u8(_ACT_TAGS[a]) for a in net.activations)
    for w, b in zip(net.weights, net.biases):
        parts.append(_array(w, "<f8"))
        parts.append(_array(b, "<f8"))
    _write_atomic(path, b"".join(parts))


def read_network(path) -> NetworkParams:
    r = _open(path, KIND_NETWORK)
    n_dims = r.u32()
    dims = [r.u32() for _ in range(n_dims)]
    acts = [_ACT_NAMES[r.u8()] for _ in range(n_dims - 1)]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(r.array("<f8").reshape(fan_in, fan_out))
        biases.append(r.array("<f8"))
    return NetworkParams(weights, biases, acts)


def network_to_json(net: NetworkParams) -> str:
    return json.dumps(
        {
            "dims": net.dims,
            "activations": net.activations,
            "weights": [w.tolist() for w in net.weights],
            "biases": [b.tolist() for b in net.biases],
        },
        sort_keys=True,
    )


# -- rbm stack ----------------------------------------------------------------

def write_rbm_stack(path, stack: list[RbmParams]):
    parts = [_header(KIND_RBM_STACK), _u32(len(stack))]
    for rbm in stack:
        parts.append(_u32(rbm.n_visible))
        parts.append(_u32(rbm.n_hidden))
        parts.append(_array(rbm.weights, "<f8"))
        parts.append(_array(rbm.visible_bias, "<f8"))
        parts.append(_array(rbm.hidden_bias, "<f8"))
    _write_atomic(path, b"".join(parts))


def read_rbm_stack(path) -> list[RbmParams]:
    r = _open(path, KIND_RBM_STACK)
    stack = []
    for _ in range(r.u32()):
        n_v = r.u32()
        n_h = r.u32()
        w = r.array("<f8").reshape(n_v, n_h)
        a = r.array("<f8")
        b = r.array("<f8")
        stack.append(RbmParams(w, a, b))
    return stack


# -- hamming index ------------------------------------------------------------

def write_index(path, index: HammingIndex):
    parts = [
        _header(KIND_INDEX),
        _u32(index.width),
        _u64(len(index)),
        _array(index.scan_ids, "<i8"),
        _array(index.scan_codes, "<u8"),
    ]
    _write_atomic(path, b"".join(parts))


def read_index(path) -> HammingIndex:
    from semhash.hashindex import BinaryCode, build_index

    r = _open(path, KIND_INDEX)
    width = r.u32()
    n = r.u64()
    ids = r.array("<i8")
    words = r.array("<u8").reshape(n, words_for_width(width))
    pairs = [
        (int(d), BinaryCode.from_words(words[i], width)) for i, d in enumerate(ids)
    ]
    return build_index(pairs, width=width)
