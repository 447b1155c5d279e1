"""Word-embedding backends for the averaged-embedding scorer.

Resolved from the model identifier:

  const:<dim>         every token maps to the all-ones vector (testing)
  hash:<dim>[:seed]   deterministic pseudo-random vector per token
  vectors:<path>      word2vec/GloVe text format: token v1 ... vd

Texts are lowercased and split on non-alphanumeric runs; the averaged
vector weights token occurrences (repeats count). Tokens unknown to a
vectors file are skipped; an empty or all-zero average scores 0.
"""

from __future__ import annotations

import hashlib
import re
from pathlib import Path

import numpy as np

_TOKEN_RE = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class ConstantEmbedding:
    def __init__(self, dim: int):
        self.dim = dim
        self._vector = np.ones(dim)

    def token_vector(self, token: str) -> np.ndarray | None:
        return self._vector


class HashEmbedding:
    """Per-token vectors drawn from a generator seeded by the token hash;
    deterministic across runs and platforms."""

    def __init__(self, dim: int, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def token_vector(self, token: str) -> np.ndarray | None:
        vector = self._cache.get(token)
        if vector is None:
            digest = hashlib.sha256(f"{self.seed}:{token}".encode()).digest()
            rng = np.random.Generator(
                np.random.PCG64(int.from_bytes(digest[:8], "big"))
            )
            vector = rng.standard_normal(self.dim)
            self._cache[token] = vector
        return vector


class FileEmbedding:
    """Vectors from a word2vec-style text file; unknown tokens skipped."""

    def __init__(self, path: str | Path):
        self._vectors: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                parts = line.rstrip("\n").split(" ")
                if len(parts) == 2 and dim is None:
                    continue  # optional word2vec count/dim header
                vector = np.array([float(x) for x in parts[1:]])
                if dim is None:
                    dim = len(vector)
                elif len(vector) != dim:
                    raise ValueError(f"inconsistent vector width for {parts[0]!r}")
                self._vectors[parts[0]] = vector
        if not self._vectors:
            raise ValueError(f"{path}: no vectors")
        self.dim = dim

    def token_vector(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token)


def resolve_embedding(model: str):
    kind, _, rest = model.partition(":")
    if kind == "const":
        return ConstantEmbedding(int(rest))
    if kind == "hash":
        dim, _, seed = rest.partition(":")
        return HashEmbedding(int(dim), int(seed) if seed else 0)
    if kind == "vectors":
        return FileEmbedding(rest)
    raise ValueError(f"unknown embedding model {model!r}")


def mean_vector(backend, text: str) -> np.ndarray:
    vectors = [
        v for v in (backend.token_vector(t) for t in tokenize(text)) if v is not None
    ]
    if not vectors:
        return np.zeros(backend.dim)
    return np.mean(vectors, axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    if np.array_equal(a, b):
        return 1.0
    return min(1.0, max(-1.0, float(np.dot(a, b) / (norm_a * norm_b))))
