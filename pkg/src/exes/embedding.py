"""Deterministic skill-similarity provider.

Skills co-occur when held by the same node; the PPMI matrix of those counts is
factored by truncating its spectrum to the top positive eigenvalues under a
fixed sign convention, so fitting twice on the same network is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CollaborationNetwork, SkillId
from .errors import DimensionTooLarge, EmptyVocabulary


@dataclass(frozen=True)
class SkillEmbedding:
    dimension: int
    tokens: tuple[SkillId, ...]  # lexicographic
    vectors: np.ndarray  # shape (len(tokens), dimension)

    @property
    def vocabulary(self) -> frozenset[SkillId]:
        return frozenset(self.tokens)

    def vector_of(self, s: SkillId) -> np.ndarray:
        return self.vectors[self.tokens.index(s)]

    def similarity(self, a: SkillId, b: SkillId) -> float:
        return _cosine(self.vector_of(a), self.vector_of(b))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0  # zero vectors are similar to nothing by convention
    return float(np.dot(u, v) / (nu * nv))


def fit_embedding(net: CollaborationNetwork, dimension: int) -> SkillEmbedding:
    """PPMI of skill-skill co-occurrence counts, rank-``dimension`` factors."""
    tokens = tuple(sorted(net.skill_universe))
    if dimension < 1 or dimension > len(tokens):
        raise DimensionTooLarge(f"dimension {dimension} vs vocabulary {len(tokens)}")
    index = {s: i for i, s in enumerate(tokens)}
    l = len(tokens)

    counts = np.zeros((l, l))
    for p in net.node_ids():
        held = sorted(net.skills_of[p])
        for i, a in enumerate(held):
            for b in held[i + 1 :]:
                counts[index[a], index[b]] += 1
                counts[index[b], index[a]] += 1

    total = counts.sum()
    ppmi = np.zeros_like(counts)
    if total > 0:
        row = counts.sum(axis=1)
        nz = counts > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            pmi = np.log((counts * total) / np.outer(row, row))
        ppmi[nz] = np.maximum(pmi[nz], 0.0)

    # The PPMI matrix is symmetric but indefinite; its negative spectrum only
    # encodes bipartite parity, so keep the top positive eigenvalues.  On the
    # positive-semidefinite part this is exactly the truncated SVD.
    eigvals, eigvecs = np.linalg.eigh(ppmi)
    order = np.argsort(-eigvals, kind="stable")
    sigma = np.maximum(eigvals[order[:dimension]], 0.0)
    u = eigvecs[:, order[:dimension]].copy()
    # Fixed sign convention: largest-magnitude entry of each factor column is
    # made positive (first index wins magnitude ties).
    for j in range(dimension):
        col = u[:, j]
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0:
            u[:, j] = -col
    vectors = u * np.sqrt(sigma)

    # Skills appearing on no node keep an exact zero vector.
    dangling = counts.sum(axis=1) == 0
    vectors[dangling] = 0.0
    return SkillEmbedding(dimension=dimension, tokens=tokens, vectors=vectors)


def centroid(emb: SkillEmbedding, targets) -> np.ndarray:
    vecs = [emb.vector_of(s) for s in sorted(set(targets)) if s in emb.vocabulary]
    if not vecs:
        return np.zeros(emb.dimension)
    return np.mean(vecs, axis=0)


def top_similar(emb: SkillEmbedding, targets, exclude=frozenset(), t: int = 10) -> list[SkillId]:
    """The t vocabulary skills most cosine-similar to the targets' centroid.

    Ties break lexicographically; excluded tokens never appear.
    """
    targets = set(targets)
    if not targets:
        raise ValueError("targets must be non-empty")
    pool = [s for s in emb.tokens if s not in exclude]
    if not pool:
        raise EmptyVocabulary("nothing left after exclusions")
    c = centroid(emb, targets)
    ranked = sorted(pool, key=lambda s: (-_cosine(emb.vector_of(s), c), s))
    return ranked[: max(t, 0)]


def save_embedding(emb: SkillEmbedding, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        for i, s in enumerate(emb.tokens):
            coords = ",".join(repr(float(x)) for x in emb.vectors[i])
            fh.write(f"{s}\t{coords}\n")


def load_embedding(path) -> SkillEmbedding:
    tokens: list[str] = []
    rows: list[list[float]] = []
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            token, coords = line.split("\t")
            tokens.append(token)
            rows.append([float(x) for x in coords.split(",")])
    vectors = np.array(rows)
    return SkillEmbedding(dimension=vectors.shape[1], tokens=tuple(tokens), vectors=vectors)
