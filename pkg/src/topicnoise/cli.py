"""Command-line entry points.

Subcommands cover the full workflow: train a topic model, search the
coherence grid, build a confusion model from transcript pairs, inject
noise into a corpus, filter weakly matched episodes, run the noise sweep,
report similarity deciles, and trace the beta-vs-WER curve. A JSON config
file mirrors the dataclass fields of the pipeline, training, sweep, and
grid settings; --seed overrides the seeds wherever they appear.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import coherence, confusion, harness, lda, noise
from .corpus import (
    Dictionary,
    Episode,
    Lexicon,
    PipelineConfig,
    ProcessedDoc,
    TextPipeline,
    build_dictionary,
    episode_to_record,
    load_corpus,
    preprocess,
    save_corpus,
    vectorize,
)

MODEL_JSON = "model.json"
DICTIONARY_JSON = "dictionary.json"
CONFUSION_JSON = "confusion.json"
GRID_CSV = "grid.csv"
NOISY_CORPUS = "noisy_corpus.jsonl"
FILTER_CSV = "filter_report.csv"


class ConfigError(ValueError):
    """A config file has an unknown section or key."""


_SECTIONS = {
    "pipeline": PipelineConfig,
    "train": lda.TrainConfig,
    "sweep": harness.SweepConfig,
    "grid": coherence.GridSpec,
}


def _build_section(cls, data: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    kwargs = {
        key: tuple(value) if isinstance(value, list) else value for key, value in data.items()
    }
    return cls(**kwargs)


@dataclasses.dataclass(frozen=True)
class Config:
    pipeline: PipelineConfig
    train: lda.TrainConfig
    sweep: harness.SweepConfig
    grid: coherence.GridSpec


def load_config(path: str | Path | None, seed: int | None = None) -> Config:
    """Load a JSON config file; missing sections use defaults.

    A seed given on the command line overrides both the training seed and
    the sweep master seed.
    """
    sections: dict[str, dict] = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = sorted(set(raw) - set(_SECTIONS))
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
        for section, data in raw.items():
            if not isinstance(data, dict):
                raise ConfigError(f"section [{section}] must be a JSON object")
            sections[section] = data
    if seed is not None:
        sections.setdefault("train", {})["seed"] = seed
        sections.setdefault("sweep", {})["master_seed"] = seed
    return Config(
        pipeline=_build_section(PipelineConfig, sections.get("pipeline", {}), "pipeline"),
        train=_build_section(lda.TrainConfig, sections.get("train", {}), "train"),
        sweep=_build_section(harness.SweepConfig, sections.get("sweep", {}), "sweep"),
        grid=_build_section(coherence.GridSpec, sections.get("grid", {}), "grid"),
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_pipeline(args, cfg: Config) -> TextPipeline:
    lexicon = Lexicon.from_tsv(args.lexicon)
    dictionary = Dictionary.load(args.dictionary)
    return TextPipeline(lexicon=lexicon, config=cfg.pipeline, dictionary=dictionary)


def _transcript_docs(episodes: list[Episode], lexicon: Lexicon, cfg: PipelineConfig):
    return [
        ProcessedDoc(id=ep.id, tokens=tuple(preprocess(ep.transcript, lexicon, cfg)))
        for ep in episodes
    ]


def _cmd_train(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    lexicon = Lexicon.from_tsv(args.lexicon)
    docs = _transcript_docs(episodes, lexicon, cfg.pipeline)
    dictionary = build_dictionary(docs, cfg.pipeline)
    bows = [vectorize(doc, dictionary) for doc in docs]
    model = lda.train(bows, cfg.train, vocab_size=len(dictionary))
    out = _out_dir(args)
    lda.save_model(model, out / MODEL_JSON)
    dictionary.save(out / DICTIONARY_JSON)
    final_elbo = model.training_elbo[-1] if model.training_elbo else float("nan")
    print(
        f"trained {model.num_topics} topics over {len(dictionary)} terms "
        f"from {len(bows)} documents (final ELBO {final_elbo:.2f})"
    )
    return 0


def _cmd_grid(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    lexicon = Lexicon.from_tsv(args.lexicon)
    texts = [ep.transcript for ep in episodes]
    result = coherence.grid_search(
        texts, lexicon, grid=cfg.grid, base_cfg=cfg.train, pipeline_cfg=cfg.pipeline
    )
    out = _out_dir(args)
    coherence.write_grid_csv(result, out / GRID_CSV)
    best = result.best
    print(
        f"best: {best.topics} topics, {best.vocab_mode}, "
        f"{best.vb_iterations} iterations (umass {best.aggregate_umass:.4f})"
    )
    return 0


def _cmd_build_confusion(args) -> int:
    pairs = confusion.load_pairs(args.pairs)
    model = confusion.accumulate(pairs)
    out = _out_dir(args)
    model.save(out / CONFUSION_JSON)
    print(f"confusion model: {len(model.table)} words from {model.total_pairs} pairs")
    return 0


def _cmd_inject(args) -> int:
    episodes = load_corpus(args.corpus)
    seed = args.seed if args.seed is not None else 0
    spec = noise.NoiseSpec(beta=args.beta, strategy=args.strategy, seed=seed)
    vocab = Dictionary.load(args.dictionary) if args.dictionary else None
    model = confusion.ConfusionModel.load(args.confusion) if args.confusion else None
    noisy_episodes = []
    for ep in episodes:
        rng = noise.derive_rng(seed, spec.strategy, ep.id)
        tokens = ep.transcript.lower().split()
        noisy = noise.inject(tokens, spec, vocab=vocab, confusion=model, rng=rng)
        record = episode_to_record(ep)
        record["transcript"] = " ".join(noisy)
        noisy_episodes.append(Episode(**record))
    out = _out_dir(args)
    save_corpus(noisy_episodes, out / NOISY_CORPUS)
    print(f"wrote {len(noisy_episodes)} noisy episodes at beta={args.beta}")
    return 0


def _cmd_filter(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    pipeline = _load_pipeline(args, cfg)
    model = lda.load_model(args.model)
    threshold = args.threshold if args.threshold is not None else cfg.sweep.filter_threshold
    kept, report = harness.filter_pairs(episodes, model, pipeline, threshold)
    out = _out_dir(args)
    rows = [(ep_id, repr(score), 1) for ep_id, score in report.retained]
    rows += [(ep_id, repr(score), 0) for ep_id, score in report.dropped]
    with open(out / FILTER_CSV, "w", encoding="utf-8", newline="") as fh:
        fh.write("pair_id,baseline_similarity,retained\n")
        for ep_id, score, retained in rows:
            fh.write(f"{ep_id},{score},{retained}\n")
    print(f"retained {len(kept)} of {len(episodes)} episodes (threshold {threshold})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    pipeline = _load_pipeline(args, cfg)
    model = lda.load_model(args.model)
    conf = confusion.ConfusionModel.load(args.confusion) if args.confusion else None
    result = harness.run_sweep(episodes, model, pipeline, conf, cfg.sweep, workers=args.workers)
    out = _out_dir(args)
    written = harness.export(result, out, svg=args.svg)
    print("wrote " + ", ".join(str(path) for path in written))
    return 0


def _cmd_deciles(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    pipeline = _load_pipeline(args, cfg)
    model = lda.load_model(args.model)
    report = harness.decile_report(episodes, model, pipeline)
    out = _out_dir(args)
    harness.write_deciles_csv(report, out / harness.DECILES_CSV)
    print(f"wrote {out / harness.DECILES_CSV}")
    return 0


def _cmd_wer_curve(args) -> int:
    cfg = load_config(args.config, args.seed)
    episodes = load_corpus(args.corpus)
    conf = confusion.ConfusionModel.load(args.confusion) if args.confusion else None
    vocab = Dictionary.load(args.dictionary).id_to_term if args.dictionary else None
    points = harness.beta_wer_curve(episodes, conf, cfg.sweep, vocab=vocab)
    out = _out_dir(args)
    harness.write_wer_curve_csv(points, out / harness.WER_CURVE_CSV)
    print(f"wrote {out / harness.WER_CURVE_CSV}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="override all seeds")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicnoise",
        description="Measure topic-vector robustness to transcription noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a topic model on episode transcripts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("grid", help="coherence grid search over hyperparameters")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("build-confusion", help="learn a confusion model from ref/hyp pairs")
    p.add_argument("--pairs", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_build_confusion)

    p = sub.add_parser("inject", help="write a noisy copy of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--strategy", choices=noise.STRATEGIES, required=True)
    p.add_argument("--dictionary", default=None)
    p.add_argument("--confusion", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_inject)

    p = sub.add_parser("filter", help="report baseline description/transcript similarity")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dictionary", required=True)
    p.add_argument("--threshold", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("sweep", help="run the noise sweep and export CSV/SVG")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dictionary", required=True)
    p.add_argument("--confusion", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--svg", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("deciles", help="baseline-similarity decile report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dictionary", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_deciles)

    p = sub.add_parser("wer-curve", help="word error rate as a function of beta")
    p.add_argument("--corpus", required=True)
    p.add_argument("--confusion", default=None)
    p.add_argument("--dictionary", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_wer_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
