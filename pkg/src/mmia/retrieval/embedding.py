"""Deterministic text embeddings.

The default embedder feature-hashes lowercased word 3-grams (with boundary
padding so short texts still produce features) into 256 signed bins and
L2-normalizes. It is not a learned embedding; it only needs to be
deterministic, unit-norm, and similarity-preserving enough for template
matching. A remote embedder can be plugged in behind the same contract.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError

DIMENSION = 256
EMBEDDER_ID = "hash3gram-256-v1"

_WORD = re.compile(r"[a-z0-9]+")
_PAD = "\x00"


@dataclass(frozen=True)
class Embedding:
    vector: tuple[float, ...]
    embedder_id: str = EMBEDDER_ID

    @property
    def dimension(self) -> int:
        return len(self.vector)

    def cosine(self, other: "Embedding") -> float:
        # Vectors are unit-norm, so cosine is the dot product.
        return float(np.dot(self.vector, other.vector))


def _ngrams(text: str) -> list[str]:
    words = _WORD.findall(text.lower())
    padded = [_PAD, _PAD] + words + [_PAD, _PAD]
    return ["\x1f".join(padded[i : i + 3]) for i in range(len(padded) - 2)]


def embed(text: str) -> Embedding:
    """Embed text into a unit-norm 256-dim vector; empty text is rejected."""
    if not text or not text.strip():
        raise PreconditionError("cannot embed empty text")
    v = np.zeros(DIMENSION, dtype=np.float64)
    for gram in _ngrams(text):
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        h = int.from_bytes(digest, "big")
        bucket = h % DIMENSION
        sign = 1.0 if (h >> 8) & 1 else -1.0
        v[bucket] += sign
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        # All-zero only if the text had no word characters; hash the raw text.
        digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
        v[int.from_bytes(digest, "big") % DIMENSION] = 1.0
        norm = 1.0
    return Embedding(vector=tuple((v / norm).tolist()))
