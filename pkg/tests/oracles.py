"""Independent reference implementations used to check the package.

Everything here is written for clarity over speed and shares no code with
the package: edit distance by memoized recursion over suffix tuples,
candidate recounting with Counter and Fraction, coherence by direct
double loops, cosine with plain math.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

_DIST_MEMO: dict[tuple[tuple[str, ...], tuple[str, ...]], int] = {}


def edit_distance(ref: tuple[str, ...], hyp: tuple[str, ...]) -> int:
    """Word-level edit distance by recursion on suffixes, globally memoized."""
    key = (ref, hyp)
    cached = _DIST_MEMO.get(key)
    if cached is not None:
        return cached
    if not ref:
        value = len(hyp)
    elif not hyp:
        value = len(ref)
    else:
        diag = edit_distance(ref[1:], hyp[1:]) + (0 if ref[0] == hyp[0] else 1)
        value = min(diag, edit_distance(ref[1:], hyp) + 1, edit_distance(ref, hyp[1:]) + 1)
    _DIST_MEMO[key] = value
    return value


def oracle_align(ref: tuple[str, ...], hyp: tuple[str, ...]) -> list[tuple[str, str | None, str | None]]:
    """Minimum-cost alignment with the match > substitute > delete > insert
    preference, realized by recursive distance lookups instead of a table."""
    ops: list[tuple[str, str | None, str | None]] = []
    while ref or hyp:
        here = edit_distance(ref, hyp)
        if ref and hyp and ref[0] == hyp[0] and edit_distance(ref[1:], hyp[1:]) == here:
            ops.append(("match", ref[0], hyp[0]))
            ref, hyp = ref[1:], hyp[1:]
        elif ref and hyp and edit_distance(ref[1:], hyp[1:]) + 1 == here:
            ops.append(("substitute", ref[0], hyp[0]))
            ref, hyp = ref[1:], hyp[1:]
        elif ref and edit_distance(ref[1:], hyp) + 1 == here:
            ops.append(("delete", ref[0], None))
            ref = ref[1:]
        else:
            ops.append(("insert", None, hyp[0]))
            hyp = hyp[1:]
    return ops


def oracle_accumulate(
    pairs: list[tuple[list[str], list[str]]],
) -> dict[str, Counter[str]]:
    """Recount confusion candidates straight from oracle alignments."""
    table: dict[str, Counter[str]] = {}
    for ref, hyp in pairs:
        ops = oracle_align(tuple(ref), tuple(hyp))
        for k, (kind, ref_word, hyp_word) in enumerate(ops):
            if kind != "substitute":
                continue
            words = [hyp_word]
            for later_kind, _, later_hyp in ops[k + 1 :]:
                if later_kind != "insert":
                    break
                words.append(later_hyp)
            candidate = " ".join(words)
            if candidate == ref_word:
                continue
            table.setdefault(ref_word, Counter())[candidate] += 1
    return table


def oracle_distribution(counts: dict[str, int]) -> dict[str, Fraction]:
    total = sum(counts.values())
    return {candidate: Fraction(count, total) for candidate, count in counts.items()}


def oracle_umass(
    lam: list[list[float]],
    doc_sets: list[set[str]],
    id_to_term: list[str],
    top_n: int,
) -> tuple[list[float], float]:
    """Direct double-loop coherence over per-topic top words.

    Loop order mirrors the contract (rank m against every earlier rank l),
    and counts are recomputed by scanning the documents each time.
    """
    per_topic: list[float] = []
    for row in lam:
        top = sorted(range(len(row)), key=lambda v: (-row[v], v))[:top_n]
        words = [id_to_term[v] for v in top]
        score = 0.0
        for m in range(1, len(words)):
            for l in range(m):
                d_l = sum(1 for doc in doc_sets if words[l] in doc)
                d_ml = sum(1 for doc in doc_sets if words[l] in doc and words[m] in doc)
                score += math.log((d_ml + 1) / d_l)
        per_topic.append(score)
    return per_topic, sum(per_topic) / len(per_topic)


def oracle_cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    return dot / (norm_a * norm_b)


def oracle_mean_stderr(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    variance = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance / n)
