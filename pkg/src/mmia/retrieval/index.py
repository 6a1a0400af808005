"""Exact cosine top-k index.

A full scan over a dict of unit vectors: correctness over speed, since
theorem bases stay small. Ranking is descending similarity with ties
broken by ascending id so results are reproducible.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import numpy as np

from ..errors import IndexError_, PreconditionError
from .embedding import EMBEDDER_ID, Embedding


class VectorIndex:
    def __init__(self, dimension: int = 256, embedder_id: str = EMBEDDER_ID):
        self.dimension = dimension
        self.embedder_id = embedder_id
        self._vectors: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._vectors

    def upsert(self, item_id: str, embedding: Embedding) -> None:
        """Insert or replace the vector stored under ``item_id``."""
        if embedding.dimension != self.dimension:
            raise IndexError_(
                f"dimension mismatch: index is {self.dimension}, vector is {embedding.dimension}"
            )
        if embedding.embedder_id != self.embedder_id:
            raise IndexError_(
                f"embedder mismatch: index uses {self.embedder_id}, vector from {embedding.embedder_id}"
            )
        with self._lock:
            self._vectors[item_id] = np.asarray(embedding.vector, dtype=np.float64)

    def remove(self, item_id: str) -> None:
        with self._lock:
            self._vectors.pop(item_id, None)

    def query_topk(self, query: Embedding, k: int) -> list[tuple[str, float]]:
        """Exact top-k by cosine, descending; ties broken by ascending id."""
        if k < 1:
            raise PreconditionError("k must be >= 1")
        if query.dimension != self.dimension:
            raise IndexError_(
                f"dimension mismatch: index is {self.dimension}, query is {query.dimension}"
            )
        q = np.asarray(query.vector, dtype=np.float64)
        with self._lock:
            scored = [(item_id, float(np.dot(q, v))) for item_id, v in self._vectors.items()]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return scored[:k]

    def save(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            header = {
                "schema": "vec_v1",
                "dimension": self.dimension,
                "embedder_id": self.embedder_id,
            }
            f.write(json.dumps(header, sort_keys=True) + "\n")
            for item_id in sorted(self._vectors):
                record = {"id": item_id, "vector": self._vectors[item_id].tolist()}
                f.write(json.dumps(record, sort_keys=True) + "\n")

    @staticmethod
    def load(path: Path) -> "VectorIndex":
        with open(path, encoding="utf-8") as f:
            header = json.loads(f.readline())
            if header.get("schema") != "vec_v1":
                raise PreconditionError(f"unsupported index schema {header.get('schema')!r}")
            index = VectorIndex(dimension=header["dimension"], embedder_id=header["embedder_id"])
            for line in f:
                if not line.strip():
                    continue
                record = json.loads(line)
                index._vectors[record["id"]] = np.asarray(record["vector"], dtype=np.float64)
        return index
