import csv
import math
import random

import numpy as np
import pytest

from topicnoise.coherence import (
    UNIGRAMS,
    UNIGRAMS_BIGRAMS,
    CoherenceError,
    GridSpec,
    grid_search,
    umass,
    write_grid_csv,
)
from topicnoise.corpus import Dictionary, Lexicon, PipelineConfig
from topicnoise.lda import LdaModel, TrainConfig

from oracles import oracle_umass


def make_dictionary(terms):
    return Dictionary(
        term_to_id={t: i for i, t in enumerate(terms)},
        id_to_term=list(terms),
        doc_freq=[1] * len(terms),
        num_docs=1,
    )


def model_with_top(rows, vocab_size):
    """Build a model whose per-topic top words are exactly the given id rows."""
    lam = np.full((len(rows), vocab_size), 0.01)
    for k, row in enumerate(rows):
        for rank, term_id in enumerate(row):
            lam[k, term_id] = 10.0 - rank
    return LdaModel(lam=lam, alpha=0.5, eta=0.1)


def test_umass_zero_when_top_pair_always_cooccurs():
    # D(a)=3, D(b,a)=2, D(b)=2: log((2+1)/3) = 0
    dictionary = make_dictionary(["a", "b", "c"])
    model = model_with_top([[0, 1]], 3)
    docs = [["a", "b"], ["a", "b", "c"], ["a"]]
    result = umass(model, docs, dictionary, top_n=2)
    assert result.per_topic == (0.0,)
    assert result.aggregate == 0.0


def test_umass_hand_computed_value():
    # reversed order: log((D(a,b)+1)/D(b)) = log(3/2)
    dictionary = make_dictionary(["a", "b", "c"])
    model = model_with_top([[1, 0]], 3)
    docs = [["a", "b"], ["a", "b", "c"], ["a"]]
    result = umass(model, docs, dictionary, top_n=2)
    assert result.per_topic[0] == math.log(3 / 2)


def test_umass_errors_when_top_word_absent_from_all_docs():
    dictionary = make_dictionary(["a", "b"])
    model = model_with_top([[0, 1]], 2)
    with pytest.raises(CoherenceError, match="'a'"):
        umass(model, [["b"], ["b"]], dictionary, top_n=2)


def test_umass_aggregate_is_topic_mean():
    dictionary = make_dictionary(["a", "b", "c", "d"])
    model = model_with_top([[0, 1], [2, 3]], 4)
    docs = [["a", "b", "c"], ["a", "c", "d"], ["b", "d"]]
    result = umass(model, docs, dictionary, top_n=2)
    assert result.aggregate == sum(result.per_topic) / 2


def test_umass_matches_direct_oracle_exactly():
    rng = random.Random(55)
    nprng = np.random.default_rng(55)
    terms = ["t" + c for c in "abcdefgh"]
    for _ in range(25):
        vocab_size = rng.randint(4, len(terms))
        used = terms[:vocab_size]
        dictionary = make_dictionary(used)
        num_topics = rng.randint(1, 4)
        lam = nprng.gamma(2.0, 1.0, (num_topics, vocab_size))
        model = LdaModel(lam=lam, alpha=0.5, eta=0.1)
        top_n = rng.randint(2, 4)
        # every term in one seed doc so no D(w) is zero
        docs = [list(used)]
        for _ in range(rng.randint(1, 15)):
            docs.append([rng.choice(used) for _ in range(rng.randint(1, 6))])
        result = umass(model, docs, dictionary, top_n=top_n)
        oracle_topics, oracle_aggregate = oracle_umass(
            [list(map(float, row)) for row in lam],
            [set(doc) for doc in docs],
            used,
            top_n,
        )
        assert list(result.per_topic) == oracle_topics
        assert result.aggregate == oracle_aggregate


def test_grid_spec_defaults_cover_reference_point():
    grid = GridSpec()
    assert 30 in grid.topics
    assert UNIGRAMS in grid.vocab_modes
    assert 20 in grid.vb_iterations


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(topics=())
    with pytest.raises(ValueError):
        GridSpec(vocab_modes=("trigrams",))


WORDS = ["mela", "pera", "uva", "kiwi", "noce", "fico"]
GRID_LEXICON = Lexicon({w: (w, "NOUN") for w in WORDS})


def grid_texts():
    rng = random.Random(8)
    texts = []
    for _ in range(12):
        texts.append(" ".join(rng.choice(WORDS) for _ in range(20)))
    return texts


def test_grid_search_selects_injected_maximizer():
    calls = []

    def score_fn(model, docs, dictionary):
        calls.append(model.num_topics)
        return {2: 0.1, 3: 0.9, 4: 0.5}[model.num_topics]

    result = grid_search(
        grid_texts(),
        GRID_LEXICON,
        grid=GridSpec(topics=(2, 3, 4), vocab_modes=(UNIGRAMS,), vb_iterations=(5,)),
        base_cfg=TrainConfig(num_topics=2, seed=1, em_passes=1),
        pipeline_cfg=PipelineConfig(min_doc_freq=1, max_doc_fraction=1.0),
        score_fn=score_fn,
    )
    assert result.best.topics == 3
    assert result.best.aggregate_umass == 0.9
    assert len(result.points) == 3
    assert sorted(calls) == [2, 3, 4]


def test_grid_search_tie_breaks_prefer_small_simple_configs():
    def flat_score(model, docs, dictionary):
        return 1.0

    result = grid_search(
        grid_texts(),
        GRID_LEXICON,
        grid=GridSpec(
            topics=(3, 2), vocab_modes=(UNIGRAMS_BIGRAMS, UNIGRAMS), vb_iterations=(10, 5)
        ),
        base_cfg=TrainConfig(num_topics=2, seed=1, em_passes=1),
        pipeline_cfg=PipelineConfig(min_doc_freq=1, max_doc_fraction=1.0),
        score_fn=flat_score,
    )
    assert result.best.topics == 2
    assert result.best.vocab_mode == UNIGRAMS
    assert result.best.vb_iterations == 5


def test_grid_search_runs_real_coherence_end_to_end():
    result = grid_search(
        grid_texts(),
        GRID_LEXICON,
        grid=GridSpec(topics=(2,), vocab_modes=(UNIGRAMS,), vb_iterations=(5,)),
        base_cfg=TrainConfig(num_topics=2, seed=1, em_passes=2),
        pipeline_cfg=PipelineConfig(min_doc_freq=1, max_doc_fraction=1.0),
        top_n=3,
    )
    assert len(result.points) == 1
    assert math.isfinite(result.points[0].aggregate_umass)
    assert result.points[0].train_seconds >= 0


def test_grid_search_rebuilds_vocabulary_per_mode():
    seen_vocab_sizes = {}

    def score_fn(model, docs, dictionary):
        seen_vocab_sizes[model.vocab_size] = True
        return 0.0

    grid_search(
        grid_texts(),
        GRID_LEXICON,
        grid=GridSpec(topics=(2,), vocab_modes=(UNIGRAMS, UNIGRAMS_BIGRAMS), vb_iterations=(5,)),
        base_cfg=TrainConfig(num_topics=2, seed=1, em_passes=1),
        pipeline_cfg=PipelineConfig(min_doc_freq=1, max_doc_fraction=1.0),
        score_fn=score_fn,
    )
    # bigram mode adds pair terms, so the two vocabularies differ in size
    assert len(seen_vocab_sizes) == 2


def test_write_grid_csv(tmp_path):
    result = grid_search(
        grid_texts(),
        GRID_LEXICON,
        grid=GridSpec(topics=(2, 3), vocab_modes=(UNIGRAMS,), vb_iterations=(5,)),
        base_cfg=TrainConfig(num_topics=2, seed=1, em_passes=1),
        pipeline_cfg=PipelineConfig(min_doc_freq=1, max_doc_fraction=1.0),
        score_fn=lambda m, d, dic: float(m.num_topics),
    )
    path = tmp_path / "grid.csv"
    write_grid_csv(result, path)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["topics", "vocab_mode", "vb_iterations", "aggregate_umass", "train_seconds"]
    assert len(rows) == 3
    assert rows[1][0] == "2"
    assert float(rows[2][3]) == 3.0
