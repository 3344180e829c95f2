"""Experiment orchestration: filtering, noise sweeps, deciles, WER curves.

The sweep pairs each episode's fixed reference text (author description or
raw transcript) against noisy transcripts, repeating every (strategy, beta)
cell over independent trials. RNG streams are derived per (master seed,
strategy, beta index, trial, episode id), so results do not depend on
evaluation order and trials parallelize without changing any output byte.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .confusion import ConfusionModel
from .corpus import Episode, TextPipeline, extended_description
from .lda import LdaModel, infer
from .metrics import aggregate_scores, cosine, similarity, wer
from .noise import STRATEGIES, NoiseSpec, derive_rng, inject

EXPERIMENT_DESC = "description_vs_noisy_transcript"
EXPERIMENT_RAW = "raw_vs_noisy_transcript"

EXPERIMENTS = (EXPERIMENT_DESC, EXPERIMENT_RAW)

DEFAULT_BETA_GRID = tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class SweepConfig:
    """Grid, repetition count, strategies, experiment design, and seed."""

    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    trials: int = 50
    strategies: tuple[str, ...] = STRATEGIES
    experiment: str = EXPERIMENT_DESC
    filter_threshold: float = 0.5
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not self.beta_grid:
            raise ValueError("beta_grid must be nonempty")
        previous = -1.0
        for beta in self.beta_grid:
            if not 0.0 <= beta <= 1.0:
                raise ValueError("beta values must be in [0, 1]")
            if beta <= previous:
                raise ValueError("beta_grid must be strictly ascending")
            previous = beta
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.strategies:
            raise ValueError("need at least one strategy")
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise ValueError(f"unknown strategy {strategy!r}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies")
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")


@dataclass(frozen=True)
class SweepRow:
    beta: float
    strategy: str
    trial: int
    pair_id: str
    similarity: float


@dataclass(frozen=True)
class SweepAggregate:
    beta: float
    strategy: str
    mean_cs: float
    stderr: float
    n: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    aggregates: tuple[SweepAggregate, ...]


@dataclass(frozen=True)
class FilterReport:
    """Baseline-similarity filter outcome: (id, score) for both sides."""

    retained: tuple[tuple[str, float], ...]
    dropped: tuple[tuple[str, float], ...]
    threshold: float


def baseline_similarity(episode: Episode, model: LdaModel, pipeline: TextPipeline) -> float:
    """Similarity between the extended description and the raw transcript."""
    return similarity(extended_description(episode), episode.transcript, model, pipeline)


def filter_pairs(
    episodes: Sequence[Episode],
    model: LdaModel,
    pipeline: TextPipeline,
    threshold: float = 0.5,
) -> tuple[list[Episode], FilterReport]:
    """Keep episodes whose baseline similarity is strictly above threshold."""
    kept: list[Episode] = []
    retained: list[tuple[str, float]] = []
    dropped: list[tuple[str, float]] = []
    for episode in episodes:
        score = baseline_similarity(episode, model, pipeline)
        if score > threshold:
            kept.append(episode)
            retained.append((episode.id, score))
        else:
            dropped.append((episode.id, score))
    report = FilterReport(
        retained=tuple(retained), dropped=tuple(dropped), threshold=threshold
    )
    return kept, report


def _raw_tokens(episode: Episode) -> list[str]:
    return episode.transcript.lower().split()


def run_sweep(
    episodes: Sequence[Episode],
    model: LdaModel,
    pipeline: TextPipeline,
    confusion: ConfusionModel | None,
    cfg: SweepConfig,
    workers: int | None = None,
) -> SweepResult:
    """Run the noise sweep over every (strategy, beta, trial) cell.

    Experiment 1 compares extended descriptions against noisy transcripts
    and first applies the baseline filter at cfg.filter_threshold;
    experiment 2 compares raw transcripts against their own noisy versions
    and uses the corpus as given. Per cell, every episode's transcript is
    injected with a stream derived from (master_seed, strategy, beta index,
    trial, episode id) and scored against the episode's cached reference
    vector. workers > 1 fans cells out to a thread pool; outputs are
    identical either way.
    """
    if "statistics_confusion" in cfg.strategies and confusion is None:
        raise ValueError("statistics_confusion requires a confusion model")
    episodes = list(episodes)
    if cfg.experiment == EXPERIMENT_DESC:
        episodes, _ = filter_pairs(episodes, model, pipeline, cfg.filter_threshold)
    if not episodes:
        raise ValueError("no episodes to sweep after filtering")

    if cfg.experiment == EXPERIMENT_DESC:
        reference_texts = [extended_description(ep) for ep in episodes]
    else:
        reference_texts = [ep.transcript for ep in episodes]
    reference_vectors = [infer(pipeline.bow(text), model) for text in reference_texts]
    raw_tokens = [_raw_tokens(ep) for ep in episodes]
    model.exp_elog_beta  # force the cache before any thread fan-out

    def run_cell(strategy: str, beta_idx: int, trial: int) -> list[float]:
        beta = cfg.beta_grid[beta_idx]
        spec = NoiseSpec(beta=beta, strategy=strategy, seed=cfg.master_seed)
        sims: list[float] = []
        for episode, tokens, ref_vec in zip(episodes, raw_tokens, reference_vectors):
            rng = derive_rng(cfg.master_seed, strategy, beta_idx, trial, episode.id)
            noisy = inject(
                tokens,
                spec,
                vocab=pipeline.dictionary,
                confusion=confusion,
                rng=rng,
            )
            noisy_vec = infer(pipeline.bow(" ".join(noisy)), model)
            sims.append(cosine(ref_vec, noisy_vec))
        return sims

    cells = [
        (strategy, beta_idx, trial)
        for strategy in cfg.strategies
        for beta_idx in range(len(cfg.beta_grid))
        for trial in range(cfg.trials)
    ]
    results: dict[tuple[str, int, int], list[float]] = {}
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {cell: pool.submit(run_cell, *cell) for cell in cells}
            for cell, future in futures.items():
                results[cell] = future.result()
    else:
        for cell in cells:
            results[cell] = run_cell(*cell)

    rows: list[SweepRow] = []
    aggregates: list[SweepAggregate] = []
    for strategy in cfg.strategies:
        for beta_idx, beta in enumerate(cfg.beta_grid):
            trial_means: list[float] = []
            for trial in range(cfg.trials):
                sims = results[(strategy, beta_idx, trial)]
                for episode, value in zip(episodes, sims):
                    rows.append(
                        SweepRow(
                            beta=beta,
                            strategy=strategy,
                            trial=trial,
                            pair_id=episode.id,
                            similarity=value,
                        )
                    )
                trial_means.append(sum(sims) / len(sims))
            stats = aggregate_scores(trial_means)
            aggregates.append(
                SweepAggregate(
                    beta=beta,
                    strategy=strategy,
                    mean_cs=stats.mean,
                    stderr=stats.stderr,
                    n=cfg.trials,
                )
            )
    return SweepResult(rows=tuple(rows), aggregates=tuple(aggregates))


def recompute_aggregates(rows: Sequence[SweepRow], trials: int | None = None) -> list[SweepAggregate]:
    """Rebuild aggregates from raw rows (the determinism cross-check).

    Trial means are recomputed per (strategy, beta) in first-seen order.
    """
    order: list[tuple[str, float]] = []
    per_cell: dict[tuple[str, float], dict[int, list[float]]] = {}
    for row in rows:
        key = (row.strategy, row.beta)
        if key not in per_cell:
            per_cell[key] = {}
            order.append(key)
        per_cell[key].setdefault(row.trial, []).append(row.similarity)
    aggregates: list[SweepAggregate] = []
    for strategy, beta in order:
        by_trial = per_cell[(strategy, beta)]
        trial_means = [sum(vals) / len(vals) for _, vals in sorted(by_trial.items())]
        stats = aggregate_scores(trial_means)
        aggregates.append(
            SweepAggregate(
                beta=beta,
                strategy=strategy,
                mean_cs=stats.mean,
                stderr=stats.stderr,
                n=len(trial_means),
            )
        )
    return aggregates


@dataclass(frozen=True)
class DecileReport:
    """Episodes bucketed by ascending baseline similarity."""

    deciles: tuple[tuple[str, ...], ...]
    unique_show_counts: tuple[int, ...]
    dominant_show: tuple[tuple[str, int], ...]
    mean_similarity: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.deciles) != 10:
            raise ValueError("exactly 10 deciles required")
        sizes = [len(bucket) for bucket in self.deciles]
        if max(sizes) - min(sizes) > 1:
            raise ValueError("bucket sizes may differ by at most 1")


def decile_partition(items: Sequence[str], buckets: int = 10) -> list[list[str]]:
    """Split an ordered sequence into near-equal buckets, first ones larger."""
    n = len(items)
    if n < buckets:
        raise ValueError(f"need at least {buckets} items, got {n}")
    base, remainder = divmod(n, buckets)
    out: list[list[str]] = []
    start = 0
    for b in range(buckets):
        size = base + (1 if b < remainder else 0)
        out.append(list(items[start : start + size]))
        start += size
    return out


def decile_report(
    episodes: Sequence[Episode],
    model: LdaModel,
    pipeline: TextPipeline,
) -> DecileReport:
    """Bucket episodes into 10 deciles of ascending baseline similarity.

    Ties in score break by episode id so the partition is deterministic.
    Per bucket: distinct show count and the dominant show (most episodes,
    ties toward the lexicographically smaller show id).
    """
    episodes = list(episodes)
    if len(episodes) < 10:
        raise ValueError(f"need at least 10 episodes, got {len(episodes)}")
    scored = sorted(
        ((baseline_similarity(ep, model, pipeline), ep) for ep in episodes),
        key=lambda item: (item[0], item[1].id),
    )
    by_id = {ep.id: ep for _, ep in scored}
    score_by_id = {ep.id: score for score, ep in scored}
    buckets = decile_partition([ep.id for _, ep in scored])
    unique_counts: list[int] = []
    dominant: list[tuple[str, int]] = []
    means: list[float] = []
    for bucket in buckets:
        shows: dict[str, int] = {}
        for ep_id in bucket:
            show = by_id[ep_id].show_id
            shows[show] = shows.get(show, 0) + 1
        unique_counts.append(len(shows))
        best = min(shows.items(), key=lambda item: (-item[1], item[0]))
        dominant.append(best)
        means.append(sum(score_by_id[ep_id] for ep_id in bucket) / len(bucket))
    return DecileReport(
        deciles=tuple(tuple(bucket) for bucket in buckets),
        unique_show_counts=tuple(unique_counts),
        dominant_show=tuple(dominant),
        mean_similarity=tuple(means),
    )


@dataclass(frozen=True)
class WerCurvePoint:
    strategy: str
    beta: float
    mean_wer: float
    stderr: float


def beta_wer_curve(
    episodes: Sequence[Episode],
    confusion: ConfusionModel | None,
    cfg: SweepConfig,
    vocab: Sequence[str] | None = None,
) -> list[WerCurvePoint]:
    """Mean word error rate of injected transcripts per (strategy, beta).

    Per trial the WER is averaged over episodes; the reported mean and
    standard error are over trials. Errors are measured on the raw token
    stream, before any topic-model preprocessing. The uniform strategy
    needs vocab (the replacement pool).
    """
    episodes = list(episodes)
    if not episodes:
        raise ValueError("need at least one episode")
    raw_tokens = [_raw_tokens(ep) for ep in episodes]
    for episode, tokens in zip(episodes, raw_tokens):
        if not tokens:
            raise ValueError(f"episode {episode.id!r} has an empty transcript")
    if "statistics_confusion" in cfg.strategies and confusion is None:
        raise ValueError("statistics_confusion requires a confusion model")
    if "uniform_vocab" in cfg.strategies and vocab is None:
        raise ValueError("uniform_vocab requires a vocabulary")
    points: list[WerCurvePoint] = []
    for strategy in cfg.strategies:
        for beta_idx, beta in enumerate(cfg.beta_grid):
            spec = NoiseSpec(beta=beta, strategy=strategy, seed=cfg.master_seed)
            trial_means: list[float] = []
            for trial in range(cfg.trials):
                values: list[float] = []
                for episode, tokens in zip(episodes, raw_tokens):
                    rng = derive_rng(cfg.master_seed, strategy, beta_idx, trial, episode.id)
                    noisy = inject(tokens, spec, vocab=vocab, confusion=confusion, rng=rng)
                    values.append(wer(tokens, noisy).wer)
                trial_means.append(sum(values) / len(values))
            stats = aggregate_scores(trial_means)
            points.append(
                WerCurvePoint(
                    strategy=strategy, beta=beta, mean_wer=stats.mean, stderr=stats.stderr
                )
            )
    return points


ROWS_CSV = "sweep_rows.csv"
AGG_CSV = "sweep_agg.csv"
SWEEP_SVG = "sweep.svg"
DECILES_CSV = "deciles.csv"
WER_CURVE_CSV = "wer_curve.csv"

_ROWS_HEADER = ("beta", "strategy", "trial", "pair_id", "similarity")
_AGG_HEADER = ("beta", "strategy", "mean_cs", "stderr", "n")
_DECILES_HEADER = (
    "decile",
    "size",
    "mean_similarity",
    "unique_shows",
    "dominant_show_id",
    "dominant_show_episodes",
)
_WER_HEADER = ("strategy", "beta", "mean_wer", "stderr")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    # repr round-trips floats exactly, keeping CSVs byte-deterministic
    return repr(float(value))


def export(result: SweepResult, out_dir: str | Path, svg: bool = False) -> list[Path]:
    """Write sweep_rows.csv and sweep_agg.csv (plus an SVG on request)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_path = out_dir / ROWS_CSV
    agg_path = out_dir / AGG_CSV
    _write_csv(
        rows_path,
        _ROWS_HEADER,
        [
            (_fmt(r.beta), r.strategy, r.trial, r.pair_id, _fmt(r.similarity))
            for r in result.rows
        ],
    )
    _write_csv(
        agg_path,
        _AGG_HEADER,
        [
            (_fmt(a.beta), a.strategy, _fmt(a.mean_cs), _fmt(a.stderr), a.n)
            for a in result.aggregates
        ],
    )
    written = [rows_path, agg_path]
    if svg:
        svg_path = out_dir / SWEEP_SVG
        svg_path.write_text(render_sweep_svg(result), encoding="utf-8")
        written.append(svg_path)
    return written


def read_sweep_rows(path: str | Path) -> list[SweepRow]:
    rows: list[SweepRow] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != _ROWS_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for record in reader:
            beta, strategy, trial, pair_id, value = record
            rows.append(
                SweepRow(
                    beta=float(beta),
                    strategy=strategy,
                    trial=int(trial),
                    pair_id=pair_id,
                    similarity=float(value),
                )
            )
    return rows


def write_deciles_csv(report: DecileReport, path: str | Path) -> None:
    _write_csv(
        Path(path),
        _DECILES_HEADER,
        [
            (
                index + 1,
                len(report.deciles[index]),
                _fmt(report.mean_similarity[index]),
                report.unique_show_counts[index],
                report.dominant_show[index][0],
                report.dominant_show[index][1],
            )
            for index in range(10)
        ],
    )


def write_wer_curve_csv(points: Sequence[WerCurvePoint], path: str | Path) -> None:
    _write_csv(
        Path(path),
        _WER_HEADER,
        [(p.strategy, _fmt(p.beta), _fmt(p.mean_wer), _fmt(p.stderr)) for p in points],
    )


_SVG_WIDTH = 640
_SVG_HEIGHT = 420
_SVG_MARGIN = 50
_STRATEGY_COLORS = {
    "uniform_vocab": "#c0392b",
    "statistics_confusion": "#2470a0",
}


def _svg_x(beta: float, beta_lo: float, beta_hi: float) -> float:
    span = beta_hi - beta_lo or 1.0
    plot = _SVG_WIDTH - 2 * _SVG_MARGIN
    return _SVG_MARGIN + (beta - beta_lo) / span * plot


def _svg_y(value: float) -> float:
    plot = _SVG_HEIGHT - 2 * _SVG_MARGIN
    clamped = min(1.0, max(0.0, value))
    return _SVG_HEIGHT - _SVG_MARGIN - clamped * plot


def render_sweep_svg(result: SweepResult) -> str:
    """Line chart of mean corpus similarity per strategy with stderr bands.

    Output is a deterministic function of the aggregates: fixed ordering,
    fixed 3-decimal coordinates, no timestamps.
    """
    strategies: list[str] = []
    for agg in result.aggregates:
        if agg.strategy not in strategies:
            strategies.append(agg.strategy)
    betas = sorted({agg.beta for agg in result.aggregates})
    beta_lo = betas[0] if betas else 0.0
    beta_hi = betas[-1] if betas else 1.0
    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_WIDTH}" '
        f'height="{_SVG_HEIGHT}" viewBox="0 0 {_SVG_WIDTH} {_SVG_HEIGHT}">'
    )
    parts.append(f'<rect width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" fill="white"/>')
    axis = (
        f'<line x1="{_SVG_MARGIN}" y1="{_SVG_HEIGHT - _SVG_MARGIN}" '
        f'x2="{_SVG_WIDTH - _SVG_MARGIN}" y2="{_SVG_HEIGHT - _SVG_MARGIN}" stroke="black"/>'
        f'<line x1="{_SVG_MARGIN}" y1="{_SVG_MARGIN}" '
        f'x2="{_SVG_MARGIN}" y2="{_SVG_HEIGHT - _SVG_MARGIN}" stroke="black"/>'
    )
    parts.append(axis)
    for strategy in strategies:
        aggs = sorted(
            (a for a in result.aggregates if a.strategy == strategy), key=lambda a: a.beta
        )
        color = _STRATEGY_COLORS.get(strategy, "#555555")
        upper = [(a.beta, a.mean_cs + a.stderr) for a in aggs]
        lower = [(a.beta, a.mean_cs - a.stderr) for a in reversed(aggs)]
        band_points = " ".join(
            f"{_svg_x(b, beta_lo, beta_hi):.3f},{_svg_y(v):.3f}" for b, v in upper + lower
        )
        parts.append(f'<polygon points="{band_points}" fill="{color}" opacity="0.2"/>')
        line_points = " ".join(
            f"{_svg_x(a.beta, beta_lo, beta_hi):.3f},{_svg_y(a.mean_cs):.3f}" for a in aggs
        )
        parts.append(
            f'<polyline points="{line_points}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
    for index, strategy in enumerate(strategies):
        color = _STRATEGY_COLORS.get(strategy, "#555555")
        y = _SVG_MARGIN + 16 * index
        parts.append(
            f'<rect x="{_SVG_WIDTH - 230}" y="{y}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_SVG_WIDTH - 212}" y="{y + 11}" font-size="12" '
            f'font-family="sans-serif">{strategy}</text>'
        )
    parts.append(
        f'<text x="{_SVG_WIDTH // 2}" y="{_SVG_HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">noise rate</text>'
    )
    parts.append(
        f'<text x="14" y="{_SVG_HEIGHT // 2}" font-size="13" text-anchor="middle" '
        f'font-family="sans-serif" transform="rotate(-90 14 {_SVG_HEIGHT // 2})">'
        "corpus similarity</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
