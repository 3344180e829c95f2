"""U_mass topic coherence and hyperparameter grid search.

Coherence scores a topic by how often its top words co-occur in the
corpus the model was trained on. The grid search trains one model per
(topic count, vocabulary mode, inference iterations) combination and
ranks them by mean coherence.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import (
    Dictionary,
    Lexicon,
    PipelineConfig,
    ProcessedDoc,
    build_dictionary,
    preprocess,
    vectorize,
)
from .lda import LdaModel, TrainConfig, top_words, train

UNIGRAMS = "unigrams"
UNIGRAMS_BIGRAMS = "unigrams+bigrams"

VOCAB_MODES = (UNIGRAMS, UNIGRAMS_BIGRAMS)


class CoherenceError(ValueError):
    """A top word never occurs in the reference documents."""


@dataclass(frozen=True)
class CoherenceResult:
    per_topic: tuple[float, ...]
    aggregate: float


def umass(
    model: LdaModel,
    docs: Sequence[Iterable[str]],
    dictionary: Dictionary,
    top_n: int = 10,
) -> CoherenceResult:
    """U_mass coherence of every topic, plus the mean across topics.

    For a topic's rank-ordered top words w_1..w_M the score is the sum over
    pairs l < m of log((D(w_m, w_l) + 1) / D(w_l)), where D counts documents
    containing the word(s). Co-occurrence is at whole-document granularity.
    Raises CoherenceError if any top word is absent from all documents,
    since its D would sit in a denominator.
    """
    if not docs:
        raise ValueError("need at least one reference document")
    doc_sets = [frozenset(doc) for doc in docs]
    topic_top_terms = [
        [dictionary.id_to_term[term_id] for term_id in top_words(model, k, top_n)]
        for k in range(model.num_topics)
    ]
    needed = set()
    for terms in topic_top_terms:
        needed.update(terms)
    presence: dict[str, int] = {term: 0 for term in needed}
    for doc_set in doc_sets:
        for term in needed & doc_set:
            presence[term] += 1
    per_topic: list[float] = []
    for terms in topic_top_terms:
        score = 0.0
        for m in range(1, len(terms)):
            for l in range(m):
                d_l = presence[terms[l]]
                if d_l == 0:
                    raise CoherenceError(f"top word {terms[l]!r} occurs in no document")
                d_ml = sum(1 for doc_set in doc_sets if terms[m] in doc_set and terms[l] in doc_set)
                score += math.log((d_ml + 1) / d_l)
        per_topic.append(score)
    aggregate = sum(per_topic) / len(per_topic)
    return CoherenceResult(per_topic=tuple(per_topic), aggregate=aggregate)


@dataclass(frozen=True)
class GridSpec:
    """Axes of the hyperparameter grid."""

    topics: tuple[int, ...] = tuple(range(10, 101, 10))
    vocab_modes: tuple[str, ...] = VOCAB_MODES
    vb_iterations: tuple[int, ...] = (5, 10, 15, 20)

    def __post_init__(self) -> None:
        if not self.topics or not self.vocab_modes or not self.vb_iterations:
            raise ValueError("every grid axis needs at least one value")
        for mode in self.vocab_modes:
            if mode not in VOCAB_MODES:
                raise ValueError(f"unknown vocab mode {mode!r}")


@dataclass(frozen=True)
class GridPoint:
    topics: int
    vocab_mode: str
    vb_iterations: int
    aggregate_umass: float
    train_seconds: float


@dataclass(frozen=True)
class GridSearchResult:
    points: tuple[GridPoint, ...]
    best: GridPoint


def _mode_rank(mode: str) -> int:
    return VOCAB_MODES.index(mode)


def grid_search(
    texts: Sequence[str],
    lexicon: Lexicon,
    grid: GridSpec | None = None,
    base_cfg: TrainConfig | None = None,
    pipeline_cfg: PipelineConfig | None = None,
    top_n: int = 10,
    score_fn: Callable[[LdaModel, list[list[str]], Dictionary], float] | None = None,
) -> GridSearchResult:
    """Train a model per grid point and rank by mean U_mass coherence.

    The vocabulary mode axis rebuilds the dictionary (bigrams on or off);
    the other axes reuse it. Higher aggregate coherence wins; exact ties
    prefer fewer topics, then the unigram mode, then fewer iterations.
    score_fn swaps in a different objective, mainly for tests.
    """
    grid = grid or GridSpec()
    base_cfg = base_cfg or TrainConfig()
    pipeline_cfg = pipeline_cfg or PipelineConfig()
    points: list[GridPoint] = []
    for mode in grid.vocab_modes:
        cfg = PipelineConfig(
            use_bigrams=(mode == UNIGRAMS_BIGRAMS),
            min_doc_freq=pipeline_cfg.min_doc_freq,
            max_doc_fraction=pipeline_cfg.max_doc_fraction,
            lexicon_mode=pipeline_cfg.lexicon_mode,
        )
        docs = [
            ProcessedDoc(id=str(i), tokens=tuple(preprocess(text, lexicon, cfg)))
            for i, text in enumerate(texts)
        ]
        dictionary = build_dictionary(docs, cfg)
        bows = [vectorize(doc, dictionary) for doc in docs]
        token_lists = [list(doc.tokens) for doc in docs]
        for topics in grid.topics:
            for vb_iters in grid.vb_iterations:
                cfg_point = TrainConfig(
                    num_topics=topics,
                    alpha=base_cfg.alpha,
                    eta=base_cfg.eta,
                    vb_iterations=vb_iters,
                    em_passes=base_cfg.em_passes,
                    seed=base_cfg.seed,
                    gamma_threshold=base_cfg.gamma_threshold,
                )
                started = time.perf_counter()
                model = train(bows, cfg_point, vocab_size=len(dictionary))
                elapsed = time.perf_counter() - started
                if score_fn is not None:
                    aggregate = score_fn(model, token_lists, dictionary)
                else:
                    aggregate = umass(model, token_lists, dictionary, top_n=top_n).aggregate
                points.append(
                    GridPoint(
                        topics=topics,
                        vocab_mode=mode,
                        vb_iterations=vb_iters,
                        aggregate_umass=aggregate,
                        train_seconds=elapsed,
                    )
                )
    best = min(
        points,
        key=lambda p: (-p.aggregate_umass, p.topics, _mode_rank(p.vocab_mode), p.vb_iterations),
    )
    return GridSearchResult(points=tuple(points), best=best)


GRID_CSV_COLUMNS = ("topics", "vocab_mode", "vb_iterations", "aggregate_umass", "train_seconds")


def write_grid_csv(result: GridSearchResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_CSV_COLUMNS)
        for point in result.points:
            writer.writerow(
                (
                    point.topics,
                    point.vocab_mode,
                    point.vb_iterations,
                    repr(point.aggregate_umass),
                    repr(point.train_seconds),
                )
            )
