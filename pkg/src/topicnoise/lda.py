"""Latent Dirichlet Allocation via batch variational Bayes.

Training alternates a per-document E-step (coordinate ascent on the
variational parameters phi and gamma) with a corpus-level M-step that
updates the topic-word parameter lambda. The evidence lower bound is
tracked per pass so callers can assert convergence behaviour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln, psi

from .corpus import BowVector

FORMAT_VERSION = 1

# Stop E-step iterations once the mean absolute change in gamma drops
# below this default.
GAMMA_THRESHOLD = 1e-3


class TrainingError(ValueError):
    """Training inputs are unusable (no documents, no terms, bad ids)."""


class ModelFormatError(ValueError):
    """A serialized model file is malformed or inconsistent."""


class DimensionMismatchError(ValueError):
    """A bag-of-words vector refers to term ids outside the model."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters and schedule for variational training.

    alpha left as None resolves to 1/num_topics at train time.
    """

    num_topics: int = 30
    alpha: float | None = None
    eta: float = 0.1
    vb_iterations: int = 20
    em_passes: int = 10
    seed: int = 0
    gamma_threshold: float = GAMMA_THRESHOLD

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.vb_iterations < 1:
            raise ValueError("vb_iterations must be >= 1")
        if self.em_passes < 1:
            raise ValueError("em_passes must be >= 1")
        if self.gamma_threshold <= 0:
            raise ValueError("gamma_threshold must be positive")

    def resolved_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 1.0 / self.num_topics


@dataclass(eq=False)
class LdaModel:
    """Trained topic model: lambda holds the K x V topic-word parameters."""

    lam: np.ndarray
    alpha: float
    eta: float
    training_elbo: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.lam = np.asarray(self.lam, dtype=np.float64)
        if self.lam.ndim != 2:
            raise ValueError("lambda must be a 2-d array")
        if self.alpha <= 0 or self.eta <= 0:
            raise ValueError("alpha and eta must be positive")
        self._exp_elog_beta: np.ndarray | None = None

    @property
    def num_topics(self) -> int:
        return self.lam.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.lam.shape[1]

    @property
    def elog_beta(self) -> np.ndarray:
        return _dirichlet_expectation(self.lam)

    @property
    def exp_elog_beta(self) -> np.ndarray:
        if self._exp_elog_beta is None:
            self._exp_elog_beta = np.exp(self.elog_beta)
        return self._exp_elog_beta

    def topic_term_probs(self) -> np.ndarray:
        """Posterior mean topic-word distributions, rows on the simplex."""
        return self.lam / self.lam.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class TopicVector:
    """Normalized variational gamma: a document's topic-mixture estimate."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("topic vector must be nonempty")
        if any(w < 0 for w in self.weights):
            raise ValueError("topic weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("topic weights must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)


def _dirichlet_expectation(a: np.ndarray) -> np.ndarray:
    """E[log x] for x ~ Dirichlet(a), rows treated as independent."""
    if a.ndim == 1:
        return psi(a) - psi(np.sum(a))
    return psi(a) - psi(np.sum(a, axis=1))[:, np.newaxis]


def _doc_e_step(
    ids: np.ndarray,
    counts: np.ndarray,
    gamma: np.ndarray,
    exp_elog_beta_doc: np.ndarray,
    vb_iterations: int,
    gamma_threshold: float,
    alpha: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate ascent for one document.

    Returns the converged gamma (length K) and phi-weighted counts
    (K x len(ids)) for the M-step sufficient statistics.
    """
    exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
    # phi_norm[v] = sum_k exp_elog_theta[k] * exp_elog_beta[k, v]
    phi_norm = exp_elog_theta @ exp_elog_beta_doc + 1e-100
    for _ in range(vb_iterations):
        last_gamma = gamma
        gamma = alpha + exp_elog_theta * ((counts / phi_norm) @ exp_elog_beta_doc.T)
        exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
        phi_norm = exp_elog_theta @ exp_elog_beta_doc + 1e-100
        if np.mean(np.abs(gamma - last_gamma)) < gamma_threshold:
            break
    sstats = np.outer(exp_elog_theta, counts / phi_norm) * exp_elog_beta_doc
    return gamma, sstats


def _bow_arrays(bow: BowVector) -> tuple[np.ndarray, np.ndarray]:
    if bow.is_empty():
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.float64)
    ids = np.fromiter((term_id for term_id, _ in bow.entries), dtype=np.intp)
    counts = np.fromiter((count for _, count in bow.entries), dtype=np.float64)
    return ids, counts


def _elbo(
    docs: list[tuple[np.ndarray, np.ndarray]],
    gammas: np.ndarray,
    lam: np.ndarray,
    alpha: float,
    eta: float,
) -> float:
    """Evidence lower bound for the corpus under the current parameters."""
    num_topics, vocab_size = lam.shape
    elog_theta = _dirichlet_expectation(gammas)
    elog_beta = _dirichlet_expectation(lam)
    score = 0.0
    for d, (ids, counts) in enumerate(docs):
        if ids.size == 0:
            continue
        # log sum_k exp(Elogtheta_dk + Elogbeta_kv), stabilized per word
        phi_dv = elog_theta[d][:, np.newaxis] + elog_beta[:, ids]
        max_dv = phi_dv.max(axis=0)
        score += float(np.dot(counts, np.log(np.sum(np.exp(phi_dv - max_dv), axis=0)) + max_dv))
    # E[log p(theta | alpha)] - E[log q(theta | gamma)]
    score += float(np.sum((alpha - gammas) * elog_theta))
    score += float(np.sum(gammaln(gammas) - gammaln(alpha)))
    score += float(np.sum(gammaln(alpha * num_topics) - gammaln(np.sum(gammas, axis=1))))
    # E[log p(beta | eta)] - E[log q(beta | lambda)]
    score += float(np.sum((eta - lam) * elog_beta))
    score += float(np.sum(gammaln(lam) - gammaln(eta)))
    score += float(np.sum(gammaln(eta * vocab_size) - gammaln(np.sum(lam, axis=1))))
    return score


def train(bows: list[BowVector], cfg: TrainConfig, vocab_size: int | None = None) -> LdaModel:
    """Fit an LDA model with batch variational EM.

    vocab_size defaults to one past the highest term id seen. Documents with
    empty bags contribute nothing to the topic-word statistics but still get
    a gamma row. The returned model records the per-pass ELBO trace.
    """
    if not bows:
        raise TrainingError("no documents to train on")
    max_id = -1
    for bow in bows:
        if bow.entries:
            max_id = max(max_id, bow.entries[-1][0])
    if vocab_size is None:
        if max_id < 0:
            raise TrainingError("all documents are empty and no vocab_size given")
        vocab_size = max_id + 1
    if vocab_size < 1:
        raise TrainingError("vocab_size must be >= 1")
    if max_id >= vocab_size:
        raise TrainingError(f"term id {max_id} outside vocabulary of size {vocab_size}")

    alpha = cfg.resolved_alpha()
    num_topics = cfg.num_topics
    docs = [_bow_arrays(bow) for bow in bows]

    rng = np.random.default_rng(cfg.seed)
    lam = cfg.eta * rng.gamma(100.0, 0.01, (num_topics, vocab_size))
    gammas = np.full((len(docs), num_topics), alpha, dtype=np.float64)
    for d, (_, counts) in enumerate(docs):
        gammas[d] += counts.sum() / num_topics

    elbo_trace: list[float] = []
    for _ in range(cfg.em_passes):
        exp_elog_beta = np.exp(_dirichlet_expectation(lam))
        sstats = np.zeros_like(lam)
        for d, (ids, counts) in enumerate(docs):
            if ids.size == 0:
                gammas[d] = alpha
                continue
            gamma, doc_sstats = _doc_e_step(
                ids,
                counts,
                gammas[d],
                exp_elog_beta[:, ids],
                cfg.vb_iterations,
                cfg.gamma_threshold,
                alpha,
            )
            gammas[d] = gamma
            sstats[:, ids] += doc_sstats
        lam = cfg.eta + sstats
        elbo_trace.append(_elbo(docs, gammas, lam, alpha, cfg.eta))

    return LdaModel(lam=lam, alpha=alpha, eta=cfg.eta, training_elbo=elbo_trace)


def infer(
    bow: BowVector,
    model: LdaModel,
    vb_iterations: int = 20,
    gamma_threshold: float = GAMMA_THRESHOLD,
) -> TopicVector:
    """Infer a document's topic mixture under a trained model.

    An empty bag yields the uniform mixture: with no evidence the posterior
    keeps the symmetric prior, and normalizing it is uniform.
    """
    num_topics = model.num_topics
    if bow.is_empty():
        return TopicVector(tuple([1.0 / num_topics] * num_topics))
    ids, counts = _bow_arrays(bow)
    if int(ids[-1]) >= model.vocab_size:
        raise DimensionMismatchError(
            f"term id {int(ids[-1])} outside model vocabulary of size {model.vocab_size}"
        )
    gamma = np.full(num_topics, model.alpha + counts.sum() / num_topics, dtype=np.float64)
    gamma, _ = _doc_e_step(
        ids,
        counts,
        gamma,
        model.exp_elog_beta[:, ids],
        vb_iterations,
        gamma_threshold,
        model.alpha,
    )
    weights = gamma / gamma.sum()
    return TopicVector(tuple(float(w) for w in weights))


def top_words(model: LdaModel, topic: int, n: int = 10) -> list[int]:
    """Term ids of the n most probable words in a topic.

    Ties break toward the smaller term id so the ordering is total.
    """
    if not 0 <= topic < model.num_topics:
        raise ValueError(f"topic {topic} out of range for {model.num_topics} topics")
    if n < 1:
        raise ValueError("n must be >= 1")
    row = model.lam[topic]
    # lexsort uses the last key as primary: descending weight, then term id
    order = np.lexsort((np.arange(row.size), -row))
    return [int(term_id) for term_id in order[:n]]


def save_model(model: LdaModel, path: str | Path) -> None:
    """Write a model as a JSON header plus an adjacent raw float64 matrix.

    The header stores shape and hyperparameters along with the relative
    names of both the binary and the text serialization of lambda. The
    binary file holds the K x V matrix row-major as little-endian float64;
    the text file holds one row per line of repr'd floats.
    """
    path = Path(path)
    bin_name = path.stem + ".lambda.bin"
    txt_name = path.stem + ".lambda.txt"
    header = {
        "format_version": FORMAT_VERSION,
        "K": model.num_topics,
        "V": model.vocab_size,
        "alpha": model.alpha,
        "eta": model.eta,
        "lambda_bin": bin_name,
        "lambda_txt": txt_name,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(header, fh)
    lam = np.ascontiguousarray(model.lam, dtype="<f8")
    (path.parent / bin_name).write_bytes(lam.tobytes())
    with open(path.parent / txt_name, "w", encoding="utf-8") as fh:
        for row in model.lam:
            fh.write(" ".join(repr(float(value)) for value in row))
            fh.write("\n")


def load_model(path: str | Path) -> LdaModel:
    """Load a model saved by save_model.

    Prefers the binary lambda when present, falling back to the text form.
    Raises ModelFormatError when neither exists or shapes disagree with the
    header.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            header = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"invalid model header: {exc.msg}") from exc
    for key in ("format_version", "K", "V", "alpha", "eta"):
        if key not in header:
            raise ModelFormatError(f"model header missing {key!r}")
    if header["format_version"] != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {header['format_version']!r}")
    num_topics = int(header["K"])
    vocab_size = int(header["V"])
    bin_path = path.parent / header.get("lambda_bin", path.stem + ".lambda.bin")
    txt_path = path.parent / header.get("lambda_txt", path.stem + ".lambda.txt")
    if bin_path.exists():
        raw = np.frombuffer(bin_path.read_bytes(), dtype="<f8")
        if raw.size != num_topics * vocab_size:
            raise ModelFormatError(
                f"binary lambda holds {raw.size} values, header implies {num_topics * vocab_size}"
            )
        lam = raw.reshape(num_topics, vocab_size).astype(np.float64)
    elif txt_path.exists():
        rows = []
        with open(txt_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append([float(value) for value in line.split()])
        lam = np.asarray(rows, dtype=np.float64)
        if lam.shape != (num_topics, vocab_size):
            raise ModelFormatError(
                f"text lambda has shape {lam.shape}, header implies {(num_topics, vocab_size)}"
            )
    else:
        raise ModelFormatError(f"no lambda data found next to {path}")
    return LdaModel(lam=lam, alpha=float(header["alpha"]), eta=float(header["eta"]))
