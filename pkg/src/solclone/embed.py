"""Embeddings for function code and comment text, plus the two similarity
measures used to classify pairs.

The baseline embedders are deterministic and offline: a hashed bag of
character 3-5-grams for code, a hashed term-frequency vector for comments.
External providers (SmartEmbed, MiniLM, BERT, CodeBERT, ...) plug in through a
small HTTP protocol and return vectors verbatim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .util import fnv1a64, read_jsonl, sha256_hex, write_jsonl

logger = logging.getLogger(__name__)

DEFAULT_DIM = 128
CODE_BASELINE = "code_baseline"
COMMENT_BASELINE = "comment_baseline"
EXTERNAL = "external"


class EmbeddingError(Exception):
    pass


class DimensionMismatch(EmbeddingError):
    pass


class TransportError(EmbeddingError):
    def __init__(self, provider_id: str, message: str):
        super().__init__(f"provider {provider_id}: {message}")
        self.provider_id = provider_id


class UndefinedSimilarity(EmbeddingError):
    pass


@dataclass(frozen=True)
class EmbedderSpec:
    kind: str  # code_baseline | comment_baseline | external
    model_id: str
    dim: int = DEFAULT_DIM
    endpoint: Optional[str] = None

    @property
    def provider_id(self) -> str:
        return f"{self.kind}:{self.model_id}:{self.dim}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "model_id": self.model_id, "dim": self.dim, "endpoint": self.endpoint}

    @classmethod
    def from_json(cls, rec: dict) -> "EmbedderSpec":
        return cls(
            kind=rec["kind"],
            model_id=rec["model_id"],
            dim=rec.get("dim", DEFAULT_DIM),
            endpoint=rec.get("endpoint"),
        )


@dataclass(frozen=True)
class Embedding:
    values: np.ndarray
    provider_id: str

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.values)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise EmbeddingError("embedding has non-finite components")


def _subword_ngrams(token: str, min_n: int = 3, max_n: int = 5) -> list[str]:
    if len(token) < min_n:
        return [token]
    grams = []
    for n in range(min_n, max_n + 1):
        for i in range(len(token) - n + 1):
            grams.append(token[i : i + n])
    return grams


def _code_vector(text: str, dim: int) -> np.ndarray:
    """Hashed bag of subwords: whitespace tokens expand to char 3-5-grams,
    each gram lands in one of `dim` buckets with a sign bit, L2-normalized."""
    v = np.zeros(dim, dtype=np.float64)
    for token in text.split():
        for gram in _subword_ngrams(token):
            h = fnv1a64(gram)
            sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
            v[h % dim] += sign
    norm = np.linalg.norm(v)
    if norm > 0:
        v /= norm
    return v


def _comment_vector(text: str, dim: int) -> np.ndarray:
    """Hashed term frequencies over lowercased words, L2-normalized."""
    v = np.zeros(dim, dtype=np.float64)
    for word in text.lower().split():
        v[fnv1a64(word) % dim] += 1.0
    norm = np.linalg.norm(v)
    if norm > 0:
        v /= norm
    return v


def _external_vectors(texts: list[str], spec: EmbedderSpec) -> list[np.ndarray]:
    import requests

    if not spec.endpoint:
        raise TransportError(spec.provider_id, "external embedder has no endpoint")
    try:
        resp = requests.post(spec.endpoint, json={"texts": texts, "model_id": spec.model_id}, timeout=60)
        resp.raise_for_status()
        payload = resp.json()
    except Exception as exc:  # noqa: BLE001 - surfaces as a transport error
        raise TransportError(spec.provider_id, str(exc)) from exc
    vectors = payload.get("vectors")
    if not isinstance(vectors, list) or len(vectors) != len(texts):
        raise TransportError(spec.provider_id, "malformed response: expected one vector per text")
    out = []
    for vec in vectors:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (spec.dim,):
            raise DimensionMismatch(
                f"provider {spec.provider_id} returned dim {arr.shape} != {spec.dim}"
            )
        out.append(arr)
    return out


def embed_texts(texts: list[str], spec: EmbedderSpec) -> list[Embedding]:
    if spec.kind == CODE_BASELINE:
        return [Embedding(_code_vector(t, spec.dim), spec.provider_id) for t in texts]
    if spec.kind == COMMENT_BASELINE:
        return [Embedding(_comment_vector(t, spec.dim), spec.provider_id) for t in texts]
    if spec.kind == EXTERNAL:
        return [Embedding(v, spec.provider_id) for v in _external_vectors(texts, spec)]
    raise EmbeddingError(f"unknown embedder kind {spec.kind!r}")


def embed_code(record, spec: EmbedderSpec) -> Embedding:
    """Embed a FunctionRecord's normalized code (or a raw code string)."""
    if spec.kind not in (CODE_BASELINE, EXTERNAL):
        raise EmbeddingError(f"embedder kind {spec.kind!r} cannot embed code")
    text = record if isinstance(record, str) else record.function_code
    emb = embed_texts([text], spec)[0]
    if emb.is_degenerate:
        logger.warning("degenerate (all-zero) code embedding for %r...", text[:40])
    return emb


def embed_comment(text: str, spec: EmbedderSpec) -> Embedding:
    if spec.kind not in (COMMENT_BASELINE, EXTERNAL):
        raise EmbeddingError(f"embedder kind {spec.kind!r} cannot embed comments")
    return embed_texts([text], spec)[0]


def code_similarity(e1: Embedding, e2: Embedding) -> float:
    """Normalized-Euclidean similarity: 1 - |a-b| / (|a| + |b|), in [0,1].

    Two zero vectors compare as 1 (both empty); callers should treat
    degenerate embeddings separately when classifying.
    """
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"dims differ: {e1.dim} != {e2.dim}")
    denom = float(np.linalg.norm(e1.values) + np.linalg.norm(e2.values))
    if denom == 0.0:
        return 1.0
    sim = 1.0 - float(np.linalg.norm(e1.values - e2.values)) / denom
    return min(1.0, max(0.0, sim))


def comment_similarity(e1: Embedding, e2: Embedding) -> float:
    """Cosine similarity clamped to [0,1]; undefined when both vectors are zero."""
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"dims differ: {e1.dim} != {e2.dim}")
    n1 = float(np.linalg.norm(e1.values))
    n2 = float(np.linalg.norm(e2.values))
    if n1 == 0.0 and n2 == 0.0:
        raise UndefinedSimilarity("cosine similarity of two zero vectors is undefined")
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    if np.array_equal(e1.values, e2.values):
        return 1.0  # keep the identity exact despite rounding in norm products
    cos = float(np.dot(e1.values, e2.values)) / (n1 * n2)
    return min(1.0, max(0.0, cos))


class EmbeddingCache:
    """(content_hash, provider_id) -> vector store backed by a JSONL file."""

    def __init__(self):
        self._store: dict[tuple[str, str], tuple[np.ndarray, bool]] = {}

    @staticmethod
    def content_hash(text: str) -> str:
        return sha256_hex(text)

    def get(self, text: str, spec: EmbedderSpec) -> Optional[Embedding]:
        entry = self._store.get((self.content_hash(text), spec.provider_id))
        if entry is None:
            return None
        return Embedding(entry[0], spec.provider_id)

    def put(self, text: str, emb: Embedding) -> None:
        self._store[(self.content_hash(text), emb.provider_id)] = (emb.values, emb.is_degenerate)

    def get_by_hash(self, content_hash: str, provider_id: str) -> Optional[Embedding]:
        entry = self._store.get((content_hash, provider_id))
        if entry is None:
            return None
        return Embedding(entry[0], provider_id)

    def embed(self, text: str, spec: EmbedderSpec) -> Embedding:
        cached = self.get(text, spec)
        if cached is not None:
            return cached
        emb = embed_texts([text], spec)[0]
        self.put(text, emb)
        return emb

    def __len__(self) -> int:
        return len(self._store)

    def save(self, path: str | Path, meta: Optional[dict] = None) -> Path:
        records = []
        for (content_hash, provider_id) in sorted(self._store):
            values, _ = self._store[(content_hash, provider_id)]
            records.append(
                {
                    "content_hash": content_hash,
                    "provider_id": provider_id,
                    "vector": [float(x) for x in values],
                }
            )
        return write_jsonl(path, records, meta=meta)

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingCache":
        cache = cls()
        for rec in read_jsonl(path):
            values = np.asarray(rec["vector"], dtype=np.float64)
            cache._store[(rec["content_hash"], rec["provider_id"])] = (values, not np.any(values))
        return cache
