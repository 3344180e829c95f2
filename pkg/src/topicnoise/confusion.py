"""Word-level ASR error model learned from reference/hypothesis pairs.

Each pair is aligned with a minimum-edit-distance word alignment; the
substitution evidence is accumulated into a table counting how often each
reference word was transcribed as each candidate. Insert runs directly
after a substitute merge into that candidate, so a single reference word
can map to a multi-word candidate ("nogensinde" -> "nogen sinde").
Correct matches are never stored: the table is purely an error model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CorpusFormatError

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"

# Above this many DP cells the alignment switches from the pure Python
# table fill to the vectorized one.
_NUMPY_CUTOFF = 4096


class UnknownWordError(KeyError):
    """The confusion model has no candidates for a word."""


@dataclass(frozen=True)
class AlignmentOp:
    """One edit step: match and substitute carry both words, insert only
    the hypothesis word, delete only the reference word."""

    kind: str
    ref_word: str | None = None
    hyp_word: str | None = None

    def __post_init__(self) -> None:
        if self.kind in (MATCH, SUBSTITUTE):
            if self.ref_word is None or self.hyp_word is None:
                raise ValueError(f"{self.kind} must carry both words")
            if self.kind == MATCH and self.ref_word != self.hyp_word:
                raise ValueError("match words must be identical")
        elif self.kind == INSERT:
            if self.ref_word is not None or self.hyp_word is None:
                raise ValueError("insert carries only hyp_word")
        elif self.kind == DELETE:
            if self.ref_word is None or self.hyp_word is not None:
                raise ValueError("delete carries only ref_word")
        else:
            raise ValueError(f"unknown op kind {self.kind!r}")


def _suffix_costs_python(ref: list[str], hyp: list[str]) -> list[list[int]]:
    n, m = len(ref), len(hyp)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    table[n] = [m - j for j in range(m + 1)]
    for i in range(n - 1, -1, -1):
        row = table[i]
        below = table[i + 1]
        row[m] = n - i
        for j in range(m - 1, -1, -1):
            diag = below[j + 1] + (0 if ref[i] == hyp[j] else 1)
            row[j] = min(diag, below[j] + 1, row[j + 1] + 1)
    return table


def _suffix_costs_numpy(ref: list[str], hyp: list[str]) -> np.ndarray:
    n, m = len(ref), len(hyp)
    hyp_arr = np.array(hyp, dtype=object)
    table = np.empty((n + 1, m + 1), dtype=np.int32)
    table[n] = np.arange(m, -1, -1, dtype=np.int32)
    for i in range(n - 1, -1, -1):
        below = table[i + 1]
        # candidate cost at column j ignoring the within-row insert choice
        t = np.empty(m + 1, dtype=np.int32)
        t[m] = n - i
        sub_cost = (hyp_arr != ref[i]).astype(np.int32)
        t[:m] = np.minimum(below[1:] + sub_cost, below[:m] + 1)
        # row[j] = min_{k>=j} t[k] + (k - j): suffix min of t[k] + k, shifted
        u = t + np.arange(m + 1, dtype=np.int32)
        suffix_min = np.minimum.accumulate(u[::-1])[::-1]
        table[i] = suffix_min - np.arange(m + 1, dtype=np.int32)
    return table


def align(ref: list[str], hyp: list[str]) -> list[AlignmentOp]:
    """Minimum-cost word alignment with unit substitute/insert/delete costs.

    Among equal-cost alignments the result prefers, at each step from the
    left, match over substitute over delete over insert. The walk follows
    a suffix-cost table, so the preference applies to the leftmost choice
    first.
    """
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    if n * m > _NUMPY_CUTOFF:
        table = _suffix_costs_numpy(ref, hyp)
    else:
        table = _suffix_costs_python(ref, hyp)
    ops: list[AlignmentOp] = []
    i = j = 0
    while i < n or j < m:
        here = int(table[i][j])
        if i < n and j < m and ref[i] == hyp[j] and int(table[i + 1][j + 1]) == here:
            ops.append(AlignmentOp(MATCH, ref_word=ref[i], hyp_word=hyp[j]))
            i += 1
            j += 1
        elif i < n and j < m and int(table[i + 1][j + 1]) + 1 == here:
            ops.append(AlignmentOp(SUBSTITUTE, ref_word=ref[i], hyp_word=hyp[j]))
            i += 1
            j += 1
        elif i < n and int(table[i + 1][j]) + 1 == here:
            ops.append(AlignmentOp(DELETE, ref_word=ref[i]))
            i += 1
        else:
            ops.append(AlignmentOp(INSERT, hyp_word=hyp[j]))
            j += 1
    return ops


@dataclass(frozen=True)
class ConfusionModel:
    """Reference word -> {candidate -> count}, plus the number of pairs seen.

    Candidates are space-joined word sequences. Counts are integers so
    models stay exactly mergeable.
    """

    table: dict[str, dict[str, int]]
    total_pairs: int

    def __post_init__(self) -> None:
        for word, candidates in self.table.items():
            if not candidates:
                raise ValueError(f"word {word!r} has an empty candidate set")
            for candidate, count in candidates.items():
                if not candidate:
                    raise ValueError(f"empty candidate for {word!r}")
                if candidate == word:
                    raise ValueError(f"identity candidate stored for {word!r}")
                if count < 1:
                    raise ValueError(f"count for {word!r} -> {candidate!r} must be >= 1")

    def __contains__(self, word: str) -> bool:
        return word in self.table

    def vocabulary(self) -> set[str]:
        return set(self.table)

    def save(self, path: str | Path) -> None:
        payload = {
            "total_pairs": self.total_pairs,
            "table": {
                word: [
                    {"candidate": candidate, "count": count}
                    for candidate, count in _canonical_candidates(self.table[word])
                ]
                for word in sorted(self.table)
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "ConfusionModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        table = {
            word: {entry["candidate"]: int(entry["count"]) for entry in entries}
            for word, entries in payload["table"].items()
        }
        return cls(table=table, total_pairs=int(payload["total_pairs"]))


def _canonical_candidates(candidates: dict[str, int]) -> list[tuple[str, int]]:
    """Deterministic candidate order: descending count, then lexicographic."""
    return sorted(candidates.items(), key=lambda item: (-item[1], item[0]))


def accumulate(pairs: list[tuple[list[str], list[str]]]) -> ConfusionModel:
    """Build a confusion model from (reference, hypothesis) token pairs.

    Per pair: align, then walk the ops merging every maximal insert run
    that immediately follows a substitute into that substitute's candidate.
    Matches, deletes, and inserts next to matches add nothing. The result
    does not depend on pair order.
    """
    table: dict[str, dict[str, int]] = {}
    for ref, hyp in pairs:
        ops = align(list(ref), list(hyp))
        idx = 0
        while idx < len(ops):
            op = ops[idx]
            idx += 1
            if op.kind != SUBSTITUTE:
                continue
            words = [op.hyp_word]
            while idx < len(ops) and ops[idx].kind == INSERT:
                words.append(ops[idx].hyp_word)
                idx += 1
            candidate = " ".join(words)
            if candidate == op.ref_word:
                # a multi-word merge can in principle reproduce the
                # reference word; skip rather than store an identity
                continue
            slot = table.setdefault(op.ref_word, {})
            slot[candidate] = slot.get(candidate, 0) + 1
    return ConfusionModel(table=table, total_pairs=len(pairs))


def merge(models: list[ConfusionModel]) -> ConfusionModel:
    """Additively combine models built from disjoint pair sets."""
    table: dict[str, dict[str, int]] = {}
    total = 0
    for model in models:
        total += model.total_pairs
        for word, candidates in model.table.items():
            slot = table.setdefault(word, {})
            for candidate, count in candidates.items():
                slot[candidate] = slot.get(candidate, 0) + count
    return ConfusionModel(table=table, total_pairs=total)


def candidate_distribution(model: ConfusionModel, word: str) -> list[tuple[str, float]]:
    """Normalized candidate probabilities for a known word.

    Candidates come back in the canonical order (descending count, then
    lexicographic) with probability count / total. Raises UnknownWordError
    for words the model has never seen mistranscribed; callers implement
    the deletion rule.
    """
    if word not in model.table:
        raise UnknownWordError(word)
    ordered = _canonical_candidates(model.table[word])
    total = sum(count for _, count in ordered)
    return [(candidate, count / total) for candidate, count in ordered]


def sample_candidate(model: ConfusionModel, word: str, rng: np.random.Generator) -> str | None:
    """Draw a replacement candidate, or None when the word is unknown.

    None is the deletion signal. Sampling is inverse-CDF over the
    canonical candidate order using integer count accumulation, so a given
    generator state maps to exactly one candidate.
    """
    if word not in model.table:
        return None
    ordered = _canonical_candidates(model.table[word])
    total = sum(count for _, count in ordered)
    threshold = rng.integers(0, total)
    running = 0
    for candidate, count in ordered:
        running += count
        if threshold < running:
            return candidate
    raise AssertionError("unreachable: thresholds cover all counts")


def unknown_fraction(model: ConfusionModel, tokens: list[str]) -> float:
    """Fraction of tokens with no entry in the model's table."""
    if not tokens:
        return 0.0
    unknown = sum(1 for token in tokens if token not in model.table)
    return unknown / len(tokens)


def load_pairs(path: str | Path) -> list[tuple[list[str], list[str]]]:
    """Read line-delimited JSON {ref, hyp} records into lowercase token pairs."""
    pairs: list[tuple[list[str], list[str]]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "ref" not in record or "hyp" not in record:
                raise CorpusFormatError(f"line {lineno}: expected keys 'ref' and 'hyp'")
            ref, hyp = record["ref"], record["hyp"]
            if not isinstance(ref, str) or not isinstance(hyp, str):
                raise CorpusFormatError(f"line {lineno}: 'ref' and 'hyp' must be strings")
            pairs.append((ref.lower().split(), hyp.lower().split()))
    return pairs
