import numpy as np
import pytest

from topicnoise.confusion import ConfusionModel
from topicnoise.corpus import Dictionary
from topicnoise.noise import (
    STATISTICS_CONFUSION,
    UNIFORM_VOCAB,
    NoiseSpec,
    derive_rng,
    inject,
)


def make_dictionary(terms):
    return Dictionary(
        term_to_id={t: i for i, t in enumerate(terms)},
        id_to_term=list(terms),
        doc_freq=[1] * len(terms),
        num_docs=1,
    )


CONF = ConfusionModel(table={"a": {"b": 1}}, total_pairs=1)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(beta=-0.1, strategy=UNIFORM_VOCAB)
    with pytest.raises(ValueError):
        NoiseSpec(beta=1.1, strategy=UNIFORM_VOCAB)
    with pytest.raises(ValueError):
        NoiseSpec(beta=0.5, strategy="typo")


def test_beta_zero_is_identity_for_both_strategies():
    tokens = ["a", "b", "c", "a"]
    vocab = make_dictionary(["x", "y"])
    out_uniform = inject(tokens, NoiseSpec(0.0, UNIFORM_VOCAB, seed=1), vocab=vocab)
    out_stats = inject(tokens, NoiseSpec(0.0, STATISTICS_CONFUSION, seed=1), confusion=CONF)
    assert out_uniform == tokens
    assert out_stats == tokens


def test_beta_one_uniform_single_term_vocab():
    vocab = make_dictionary(["x"])
    out = inject(["a", "b"], NoiseSpec(1.0, UNIFORM_VOCAB, seed=2), vocab=vocab)
    assert out == ["x", "x"]


def test_beta_one_statistics_deletes_unknown_words():
    out = inject(["a", "c", "a"], NoiseSpec(1.0, STATISTICS_CONFUSION, seed=3), confusion=CONF)
    assert out == ["b", "b"]


def test_beta_one_statistics_splices_multiword_candidates():
    model = ConfusionModel(table={"a": {"b c": 1}}, total_pairs=1)
    out = inject(["a"], NoiseSpec(1.0, STATISTICS_CONFUSION, seed=4), confusion=model)
    assert out == ["b", "c"]


def test_uniform_requires_vocab_and_statistics_requires_model():
    with pytest.raises(ValueError, match="vocabulary"):
        inject(["a"], NoiseSpec(0.5, UNIFORM_VOCAB, seed=0))
    with pytest.raises(ValueError, match="confusion"):
        inject(["a"], NoiseSpec(0.5, STATISTICS_CONFUSION, seed=0))


def test_uniform_pool_excludes_bigram_terms():
    vocab = make_dictionary(["plain", "two_part"])
    out = inject(["a"] * 50, NoiseSpec(1.0, UNIFORM_VOCAB, seed=5), vocab=vocab)
    assert set(out) == {"plain"}


def test_uniform_rejects_bigram_only_vocab():
    vocab = make_dictionary(["only_bigrams", "more_pairs"])
    with pytest.raises(ValueError, match="unigram"):
        inject(["a"], NoiseSpec(1.0, UNIFORM_VOCAB, seed=0), vocab=vocab)


def test_uniform_accepts_plain_term_sequences():
    out = inject(["a", "a"], NoiseSpec(1.0, UNIFORM_VOCAB, seed=6), vocab=["z"])
    assert out == ["z", "z"]


def test_uniform_preserves_token_count_at_every_beta():
    vocab = make_dictionary(["x", "y", "z"])
    tokens = ["a"] * 40
    for beta in (0.0, 0.3, 0.7, 1.0):
        out = inject(tokens, NoiseSpec(beta, UNIFORM_VOCAB, seed=7), vocab=vocab)
        assert len(out) == len(tokens)


def test_empirical_substitution_rate_approximates_beta():
    # disjoint replacement pool, so every hit is visible as a mismatch
    vocab = make_dictionary(["x", "y", "z"])
    tokens = ["a"] * 100
    spec = NoiseSpec(0.3, UNIFORM_VOCAB, seed=8)
    hits = 0
    total = 0
    for trial in range(10_000):
        rng = derive_rng(8, "rate-check", trial)
        out = inject(tokens, spec, vocab=vocab, rng=rng)
        hits += sum(1 for before, after in zip(tokens, out) if before != after)
        total += len(tokens)
    assert abs(hits / total - 0.30) <= 0.01


def test_statistics_output_stays_within_input_and_candidates():
    model = ConfusionModel(
        table={"a": {"b": 2, "c d": 1}, "q": {"r": 1}}, total_pairs=4
    )
    tokens = ["a", "q", "zz", "a"]
    allowed = set(tokens) | {"b", "c", "d", "r"}
    for trial in range(200):
        rng = derive_rng(1, trial)
        out = inject(tokens, NoiseSpec(0.6, STATISTICS_CONFUSION, seed=1),
                     confusion=model, rng=rng)
        assert set(out) <= allowed


def test_fixed_seed_gives_identical_output():
    vocab = make_dictionary(["x", "y", "z"])
    spec = NoiseSpec(0.5, UNIFORM_VOCAB, seed=77)
    tokens = ["a", "b", "c", "d", "e"] * 10
    first = inject(tokens, spec, vocab=vocab)
    second = inject(tokens, spec, vocab=vocab)
    assert first == second


def test_derive_rng_streams_are_context_dependent():
    base = derive_rng(1, "strategy", 0, 0, "ep1").random(5).tolist()
    same = derive_rng(1, "strategy", 0, 0, "ep1").random(5).tolist()
    other_trial = derive_rng(1, "strategy", 0, 1, "ep1").random(5).tolist()
    other_episode = derive_rng(1, "strategy", 0, 0, "ep2").random(5).tolist()
    other_seed = derive_rng(2, "strategy", 0, 0, "ep1").random(5).tolist()
    assert base == same
    assert base != other_trial
    assert base != other_episode
    assert base != other_seed
