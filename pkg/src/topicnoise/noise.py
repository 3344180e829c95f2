"""Controlled substitution noise over raw token streams.

Each token is independently hit with probability beta. A hit token is
either replaced by a uniform draw from the topic-model vocabulary or by a
candidate from a learned confusion model, in which case unknown words are
deleted and multi-word candidates splice into the stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .confusion import ConfusionModel, sample_candidate
from .corpus import Dictionary

UNIFORM_VOCAB = "uniform_vocab"
STATISTICS_CONFUSION = "statistics_confusion"

STRATEGIES = (UNIFORM_VOCAB, STATISTICS_CONFUSION)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level, substitution strategy, and base seed."""

    beta: float
    strategy: str
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def derive_rng(seed: int, *context: object) -> np.random.Generator:
    """Deterministic per-context generator.

    Context parts (document ids, trial indices, strategy names) are folded
    into the entropy pool, strings via sha256, so streams are independent
    of each other and of evaluation order.
    """
    entropy: list[int] = [seed & 0xFFFFFFFF]
    for part in context:
        if isinstance(part, int):
            entropy.append(part & 0xFFFFFFFFFFFFFFFF)
        else:
            digest = hashlib.sha256(str(part).encode("utf-8")).digest()
            entropy.append(int.from_bytes(digest[:8], "big"))
    return np.random.default_rng(entropy)


def _uniform_pool(vocab: Dictionary | Sequence[str]) -> list[str]:
    terms = vocab.id_to_term if isinstance(vocab, Dictionary) else list(vocab)
    # bigram dictionary terms cannot stand in for one raw token
    return [term for term in terms if "_" not in term]


def inject(
    tokens: Sequence[str],
    spec: NoiseSpec,
    vocab: Dictionary | Sequence[str] | None = None,
    confusion: ConfusionModel | None = None,
    rng: np.random.Generator | None = None,
) -> list[str]:
    """Apply substitution noise to a token sequence.

    Per token, a Bernoulli(beta) draw decides whether it is hit. Unhit
    tokens pass through. Hit tokens are replaced by a uniform vocabulary
    draw (uniform_vocab) or by a sampled confusion candidate
    (statistics_confusion), where an unknown word is deleted and a
    multi-word candidate contributes several tokens in place. Order is
    otherwise preserved. With rng omitted a fresh generator is derived
    from spec.seed, so equal inputs give equal outputs.
    """
    if spec.strategy == UNIFORM_VOCAB:
        if vocab is None:
            raise ValueError("uniform_vocab requires a vocabulary")
        pool = _uniform_pool(vocab)
        if not pool:
            raise ValueError("uniform_vocab requires a nonempty unigram vocabulary")
    else:
        if confusion is None:
            raise ValueError("statistics_confusion requires a confusion model")
        pool = []
    if rng is None:
        rng = derive_rng(spec.seed)
    out: list[str] = []
    for token in tokens:
        if rng.random() >= spec.beta:
            out.append(token)
            continue
        if spec.strategy == UNIFORM_VOCAB:
            out.append(pool[int(rng.integers(0, len(pool)))])
        else:
            candidate = sample_candidate(confusion, token, rng)
            if candidate is not None:
                out.extend(candidate.split(" "))
    return out
