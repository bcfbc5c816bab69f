"""Binary bottleneck codes, the code -> documents index, and hamming-ball
candidate preselection by generative enumeration or packed XOR+popcount scan.

The scan kernel is compiled (Cython) when the extension was built and falls
back to a NumPy implementation otherwise; both expose `scan_distances`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

try:
    from semhash import _hamming as _kernel

    HAVE_COMPILED_KERNEL = True
except ImportError:
    from semhash import _hamming_py as _kernel

    HAVE_COMPILED_KERNEL = False

_WORD_BITS = 64


def words_for_width(width: int) -> int:
    return max(1, (width + _WORD_BITS - 1) // _WORD_BITS)


@dataclass(frozen=True)
class BinaryCode:
    """An n-bit code; bit 0 is the least significant bit of `value`."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("code width must be >= 1")
        if not (0 <= self.value < (1 << self.width)):
            raise ValueError("code value does not fit in the declared width")

    def distance(self, other: "BinaryCode") -> int:
        if other.width != self.width:
            raise ValueError("hamming distance needs equal widths")
        return (self.value ^ other.value).bit_count()

    def to_words(self) -> np.ndarray:
        """Packed uint64 words, lowest bits in word 0."""
        n = words_for_width(self.width)
        mask = (1 << _WORD_BITS) - 1
        return np.array(
            [(self.value >> (_WORD_BITS * k)) & mask for k in range(n)],
            dtype=np.uint64,
        )

    @classmethod
    def from_words(cls, words: np.ndarray, width: int) -> "BinaryCode":
        value = 0
        for k, w in enumerate(np.asarray(words, dtype=np.uint64)):
            value |= int(w) << (_WORD_BITS * k)
        return cls(value=value, width=width)

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")


def binarize(probs: np.ndarray, threshold: float = 0.5) -> BinaryCode:
    """Bit j is set iff probs[j] > threshold (strictly; ties stay 0)."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("binarize expects a non-empty probability vector")
    if np.any(probs < 0) or np.any(probs > 1):
        raise ValueError("probabilities must lie in [0,1]")
    value = 0
    for j in np.nonzero(probs > threshold)[0]:
        value |= 1 << int(j)
    return BinaryCode(value=value, width=probs.size)


class HammingIndex:
    """code -> sorted doc-id buckets, plus packed arrays for linear scans."""

    def __init__(self, width: int, buckets: dict[int, list[int]]):
        self.width = width
        self.buckets = {c: sorted(ids) for c, ids in buckets.items()}
        pairs = [(c, d) for c, ids in self.buckets.items() for d in ids]
        pairs.sort(key=lambda p: p[1])
        self.scan_ids = np.array([d for _, d in pairs], dtype=np.int64)
        self.scan_codes = np.zeros(
            (len(pairs), words_for_width(width)), dtype=np.uint64
        )
        for row, (c, _) in enumerate(pairs):
            self.scan_codes[row] = BinaryCode(c, width).to_words()

    def __len__(self) -> int:
        return len(self.scan_ids)

    def code_of(self, doc_id: int) -> BinaryCode:
        for c, ids in self.buckets.items():
            if doc_id in ids:
                return BinaryCode(c, self.width)
        raise KeyError(doc_id)


def build_index(codes: list[tuple[int, BinaryCode]], width: int | None = None) -> HammingIndex:
    if width is None:
        if not codes:
            raise ValueError("cannot infer width from an empty code list")
        width = codes[0][1].width
    buckets: dict[int, list[int]] = {}
    seen: set[int] = set()
    for doc_id, code in codes:
        if code.width != width:
            raise ValueError(f"code width {code.width} does not match index width {width}")
        if doc_id in seen:
            raise ValueError(f"duplicate document id {doc_id}")
        seen.add(doc_id)
        buckets.setdefault(code.value, []).append(doc_id)
    return HammingIndex(width=width, buckets=buckets)


def ball_size(width: int, h: int) -> int:
    """Number of codes within hamming distance h: sum of C(n, i) for i<=h."""
    return sum(math.comb(width, i) for i in range(h + 1))


def ball_enumerate(center: BinaryCode, h: int) -> list[BinaryCode]:
    """All codes at distance <= h from the center, nearest first."""
    if h < 0 or h > center.width:
        raise ValueError(f"radius {h} outside [0, {center.width}]")
    out = []
    for r in range(h + 1):
        for flips in combinations(range(center.width), r):
            value = center.value
            for bit in flips:
                value ^= 1 << bit
            out.append(BinaryCode(value=value, width=center.width))
    return out


def _scan_hits(index: HammingIndex, center: BinaryCode, h: int):
    dists = _kernel.scan_distances(index.scan_codes, center.to_words())
    mask = dists <= h
    ids = index.scan_ids[mask]
    order = np.lexsort((ids, dists[mask]))
    return ids[order], dists[mask][order]


def ball_scan(index: HammingIndex, center: BinaryCode, h: int) -> list[int]:
    """Doc ids with popcount(code XOR center) <= h, ordered by (distance, id)."""
    if center.width != index.width:
        raise ValueError("query code width does not match index")
    if h < 0 or h > index.width:
        raise ValueError(f"radius {h} outside [0, {index.width}]")
    ids, _ = _scan_hits(index, center, h)
    return ids.tolist()


def ball_lookup(index: HammingIndex, center: BinaryCode, h: int) -> list[int]:
    """Generative equivalent of ball_scan: enumerate the ball, probe buckets."""
    if center.width != index.width:
        raise ValueError("query code width does not match index")
    out: list[int] = []
    for r in range(h + 1):
        at_r: list[int] = []
        for flips in combinations(range(center.width), r):
            value = center.value
            for bit in flips:
                value ^= 1 << bit
            at_r.extend(index.buckets.get(value, ()))
        out.extend(sorted(at_r))
    return out


@dataclass(frozen=True)
class PreselectConfig:
    radius: int
    min_count: int = 0
    max_radius: int | None = None


def choose_strategy(width: int, h: int, index_size: int) -> str:
    """Generative probing when the ball holds fewer codes than the index
    holds documents; otherwise one linear scan is cheaper."""
    return "generative" if ball_size(width, h) < index_size else "scan"


def preselect(
    index: HammingIndex, center: BinaryCode, cfg: PreselectConfig
) -> tuple[list[int], int]:
    """Ball query at cfg.radius, expanding the radius until min_count ids are
    found or max_radius is reached. Returns (doc ids, effective radius)."""
    max_radius = index.width if cfg.max_radius is None else cfg.max_radius
    if not (0 <= cfg.radius <= max_radius <= index.width):
        raise ValueError("need 0 <= radius <= max_radius <= code width")
    radius = cfg.radius
    while True:
        if choose_strategy(index.width, radius, len(index)) == "generative":
            ids = ball_lookup(index, center, radius)
        else:
            ids = ball_scan(index, center, radius)
        if len(ids) >= cfg.min_count or radius >= max_radius:
            return ids, radius
        radius += 1
