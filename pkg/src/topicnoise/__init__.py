"""Topic-vector robustness to simulated transcription noise.

The package trains LDA topic models on podcast transcripts, learns a
word-level confusion model from reference/hypothesis transcript pairs,
injects controlled substitution noise, and measures how topic-vector
similarity degrades as the noise rate grows.
"""

from .corpus import (
    BowVector,
    Dictionary,
    Episode,
    Lexicon,
    PipelineConfig,
    ProcessedDoc,
    TextPipeline,
    build_dictionary,
    extended_description,
    load_corpus,
    preprocess,
    vectorize,
)
from .lda import LdaModel, TopicVector, TrainConfig, infer, load_model, save_model, top_words, train
from .coherence import CoherenceResult, GridSpec, grid_search, umass
from .confusion import (
    AlignmentOp,
    ConfusionModel,
    accumulate,
    align,
    candidate_distribution,
    sample_candidate,
)
from .noise import NoiseSpec, derive_rng, inject
from .metrics import CorpusSimilarity, WerBreakdown, corpus_similarity, cosine, similarity, wer
from .harness import (
    DecileReport,
    SweepConfig,
    SweepResult,
    beta_wer_curve,
    decile_report,
    export,
    filter_pairs,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentOp",
    "BowVector",
    "CoherenceResult",
    "ConfusionModel",
    "CorpusSimilarity",
    "DecileReport",
    "Dictionary",
    "Episode",
    "GridSpec",
    "LdaModel",
    "Lexicon",
    "NoiseSpec",
    "PipelineConfig",
    "ProcessedDoc",
    "SweepConfig",
    "SweepResult",
    "TextPipeline",
    "TopicVector",
    "TrainConfig",
    "WerBreakdown",
    "accumulate",
    "align",
    "beta_wer_curve",
    "build_dictionary",
    "candidate_distribution",
    "corpus_similarity",
    "cosine",
    "decile_report",
    "derive_rng",
    "export",
    "extended_description",
    "filter_pairs",
    "grid_search",
    "infer",
    "inject",
    "load_corpus",
    "load_model",
    "preprocess",
    "run_sweep",
    "sample_candidate",
    "save_model",
    "similarity",
    "top_words",
    "train",
    "umass",
    "vectorize",
    "wer",
]
