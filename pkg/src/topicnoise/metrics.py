"""Similarity and error-rate metrics.

Topic-vector similarity is plain cosine; corpus similarity averages it
over positionally paired documents. Word error rate reuses the alignment
from the confusion module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .confusion import DELETE, INSERT, SUBSTITUTE, align
from .corpus import TextPipeline
from .lda import DimensionMismatchError, LdaModel, TopicVector, infer


def cosine(a: TopicVector, b: TopicVector) -> float:
    """Cosine similarity of two topic vectors, clamped to [0, 1].

    Identical vectors return exactly 1.0. Simplex vectors are nonnegative
    with positive norm, so the clamp only absorbs float rounding.
    """
    va = a.as_array()
    vb = b.as_array()
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"dimensions differ: {va.size} vs {vb.size}")
    if np.array_equal(va, vb):
        return 1.0
    value = float(np.dot(va, vb) / (np.linalg.norm(va) * np.linalg.norm(vb)))
    return min(1.0, max(0.0, value))


def similarity(d1: str, d2: str, model: LdaModel, pipeline: TextPipeline) -> float:
    """Cosine similarity between the inferred topic mixtures of two texts."""
    return cosine(infer(pipeline.bow(d1), model), infer(pipeline.bow(d2), model))


@dataclass(frozen=True)
class CorpusSimilarity:
    mean: float
    stderr: float
    scores: tuple[float, ...]


def aggregate_scores(scores: Sequence[float]) -> CorpusSimilarity:
    """Mean and standard error of a score sample (stderr 0.0 when n = 1)."""
    if not scores:
        raise ValueError("need at least one score")
    n = len(scores)
    mean = sum(scores) / n
    if n == 1:
        stderr = 0.0
    else:
        variance = sum((s - mean) ** 2 for s in scores) / (n - 1)
        stderr = math.sqrt(variance) / math.sqrt(n)
    return CorpusSimilarity(mean=mean, stderr=stderr, scores=tuple(scores))


def corpus_similarity(
    s1: Sequence[str],
    s2: Sequence[str],
    model: LdaModel,
    pipeline: TextPipeline,
) -> CorpusSimilarity:
    """Average pairwise similarity between two equally sized document sets.

    Pairing is positional: s1[i] against s2[i].
    """
    if len(s1) != len(s2):
        raise ValueError(f"document sets differ in size: {len(s1)} vs {len(s2)}")
    if not s1:
        raise ValueError("document sets must be nonempty")
    scores = [similarity(d1, d2, model, pipeline) for d1, d2 in zip(s1, s2)]
    return aggregate_scores(scores)


@dataclass(frozen=True)
class WerBreakdown:
    """Word error rate with its substitution/deletion/insertion parts."""

    substitutions: int
    deletions: int
    insertions: int
    ref_length: int

    def __post_init__(self) -> None:
        if min(self.substitutions, self.deletions, self.insertions) < 0:
            raise ValueError("error counts must be nonnegative")
        if self.ref_length < 1:
            raise ValueError("ref_length must be >= 1")

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.ref_length


def wer(ref: Sequence[str], hyp: Sequence[str]) -> WerBreakdown:
    """Word error rate (S + D + I) / |ref|; can exceed 1 with many inserts."""
    ref = list(ref)
    if not ref:
        raise ValueError("reference must be nonempty")
    counts = {SUBSTITUTE: 0, DELETE: 0, INSERT: 0}
    for op in align(ref, list(hyp)):
        if op.kind in counts:
            counts[op.kind] += 1
    return WerBreakdown(
        substitutions=counts[SUBSTITUTE],
        deletions=counts[DELETE],
        insertions=counts[INSERT],
        ref_length=len(ref),
    )
