"""Corpus ingestion, text preprocessing, and bag-of-words construction.

Episodes come in as line-delimited JSON. The preprocessing pipeline strips
punctuation and digits, lowercases, filters tokens through a lemma lexicon
(keeping adjectives, nouns and verbs), and optionally appends bigrams over
the surviving lemmas. Documents are then vectorized against a pruned
dictionary.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

KEPT_POS = frozenset({"ADJ", "NOUN", "VERB"})
VALID_POS = frozenset({"ADJ", "NOUN", "VERB", "OTHER"})

STRICT = "strict"
PERMISSIVE = "permissive"

# Deletes everything that is neither a word character nor whitespace, plus
# digits and underscores. Applied before tokenization, so hyphenated or
# apostrophized forms collapse into a single token ("don't" -> "dont").
_STRIP_RE = re.compile(r"[^\w\s]|[\d_]")


class CorpusFormatError(ValueError):
    """A corpus or pair file violates the line-delimited JSON schema."""


class LexiconFormatError(ValueError):
    """A lexicon TSV file is malformed."""


class EmptyDictionaryError(ValueError):
    """Frequency pruning removed every term."""


@dataclass(frozen=True)
class Episode:
    """One podcast episode: ASR transcript plus author metadata."""

    id: str
    transcript: str = ""
    description: str = ""
    episode_title: str = ""
    show_title: str = ""
    show_description: str = ""
    category: str = ""
    show_id: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("episode id must be nonempty")


_EPISODE_FIELDS = (
    "id",
    "transcript",
    "description",
    "episode_title",
    "show_title",
    "show_description",
    "category",
    "show_id",
)


def load_corpus(path: str | Path) -> list[Episode]:
    """Read a line-delimited JSON corpus file into Episodes, order preserved.

    Absent keys default to the empty string. Raises CorpusFormatError naming
    the offending line for malformed records and for duplicate episode ids.
    """
    episodes: list[Episode] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {lineno}: expected a JSON object")
            kwargs = {}
            for key in _EPISODE_FIELDS:
                value = record.get(key, "")
                if not isinstance(value, str):
                    raise CorpusFormatError(f"line {lineno}: field {key!r} must be a string")
                kwargs[key] = value
            if not kwargs["id"]:
                raise CorpusFormatError(f"line {lineno}: missing or empty id")
            if kwargs["id"] in seen:
                raise CorpusFormatError(f"line {lineno}: duplicate episode id {kwargs['id']!r}")
            seen.add(kwargs["id"])
            episodes.append(Episode(**kwargs))
    return episodes


def episode_to_record(episode: Episode) -> dict[str, str]:
    return {key: getattr(episode, key) for key in _EPISODE_FIELDS}


def save_corpus(episodes: list[Episode], path: str | Path) -> None:
    """Write episodes back out in the same line-delimited JSON schema."""
    with open(path, "w", encoding="utf-8") as fh:
        for episode in episodes:
            fh.write(json.dumps(episode_to_record(episode), ensure_ascii=False))
            fh.write("\n")


def extended_description(episode: Episode) -> str:
    """Author description extended with titles, show description and category."""
    parts = (
        episode.description,
        episode.episode_title,
        episode.show_title,
        episode.show_description,
        episode.category,
    )
    return " ".join(part for part in parts if part)


@dataclass(frozen=True)
class Lexicon:
    """Surface form -> (lemma, POS) lookup used in place of a tagger."""

    entries: dict[str, tuple[str, str]]

    def __post_init__(self) -> None:
        for surface, (lemma, pos) in self.entries.items():
            if not surface or surface != surface.lower():
                raise ValueError(f"surface form {surface!r} must be nonempty lowercase")
            if not lemma or lemma != lemma.lower():
                raise ValueError(f"lemma {lemma!r} must be nonempty lowercase")
            if pos not in VALID_POS:
                raise ValueError(f"invalid POS {pos!r} for {surface!r}")

    def get(self, token: str) -> tuple[str, str] | None:
        return self.entries.get(token)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Lexicon":
        """Load a TSV lexicon (surface_form, lemma, pos). Later rows override."""
        entries: dict[str, tuple[str, str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                columns = line.split("\t")
                if len(columns) != 3:
                    raise LexiconFormatError(
                        f"line {lineno}: expected 3 tab-separated columns, got {len(columns)}"
                    )
                surface, lemma, pos = columns
                if pos not in VALID_POS:
                    raise LexiconFormatError(f"line {lineno}: invalid POS {pos!r}")
                if not surface or surface != surface.lower() or not lemma or lemma != lemma.lower():
                    raise LexiconFormatError(
                        f"line {lineno}: surface form and lemma must be nonempty lowercase"
                    )
                entries[surface] = (lemma, pos)
        return cls(entries)


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for preprocessing and dictionary pruning."""

    use_bigrams: bool = False
    min_doc_freq: int = 10
    max_doc_fraction: float = 0.9
    lexicon_mode: str = STRICT

    def __post_init__(self) -> None:
        if self.min_doc_freq < 1:
            raise ValueError("min_doc_freq must be >= 1")
        if not 0.0 < self.max_doc_fraction <= 1.0:
            raise ValueError("max_doc_fraction must be in (0, 1]")
        if self.lexicon_mode not in (STRICT, PERMISSIVE):
            raise ValueError(f"unknown lexicon_mode {self.lexicon_mode!r}")


@dataclass(frozen=True)
class ProcessedDoc:
    id: str
    tokens: tuple[str, ...]


def preprocess(text: str, lexicon: Lexicon, cfg: PipelineConfig) -> list[str]:
    """Run the full token pipeline on raw text.

    Steps, in order: delete punctuation/special characters/digits, split on
    whitespace, lowercase, POS-filter through the lexicon (strict mode drops
    unknown tokens, permissive passes them through unchanged), lemmatize,
    and, when configured, append bigrams over adjacent surviving lemmas.
    """
    cleaned = _STRIP_RE.sub("", text).lower()
    lemmas: list[str] = []
    for token in cleaned.split():
        entry = lexicon.get(token)
        if entry is None:
            if cfg.lexicon_mode == PERMISSIVE:
                lemmas.append(token)
            continue
        lemma, pos = entry
        if pos in KEPT_POS:
            lemmas.append(lemma)
    if cfg.use_bigrams and len(lemmas) >= 2:
        lemmas = lemmas + [f"{a}_{b}" for a, b in zip(lemmas, lemmas[1:])]
    return lemmas


@dataclass
class Dictionary:
    """Pruned token vocabulary with dense ids in lexicographic term order."""

    term_to_id: dict[str, int]
    id_to_term: list[str]
    doc_freq: list[int]
    num_docs: int

    def __len__(self) -> int:
        return len(self.id_to_term)

    def save(self, path: str | Path) -> None:
        payload = {
            "num_docs": self.num_docs,
            "terms": [
                {"term": term, "doc_freq": freq}
                for term, freq in zip(self.id_to_term, self.doc_freq)
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "Dictionary":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        id_to_term = [entry["term"] for entry in payload["terms"]]
        doc_freq = [int(entry["doc_freq"]) for entry in payload["terms"]]
        return cls(
            term_to_id={term: idx for idx, term in enumerate(id_to_term)},
            id_to_term=id_to_term,
            doc_freq=doc_freq,
            num_docs=int(payload["num_docs"]),
        )


def build_dictionary(docs: list[ProcessedDoc], cfg: PipelineConfig) -> Dictionary:
    """Count document frequencies, prune rare and ubiquitous terms, assign ids.

    Terms present in fewer than cfg.min_doc_freq documents or in more than
    cfg.max_doc_fraction of them are removed. Surviving terms get dense ids
    in lexicographic order, so construction is deterministic.
    """
    if not docs:
        raise ValueError("cannot build a dictionary from zero documents")
    num_docs = len(docs)
    freq: Counter[str] = Counter()
    for doc in docs:
        freq.update(set(doc.tokens))
    ceiling = cfg.max_doc_fraction * num_docs
    retained = sorted(
        term for term, count in freq.items() if cfg.min_doc_freq <= count <= ceiling
    )
    if not retained:
        raise EmptyDictionaryError(
            f"pruning with min_doc_freq={cfg.min_doc_freq}, "
            f"max_doc_fraction={cfg.max_doc_fraction} removed all terms"
        )
    return Dictionary(
        term_to_id={term: idx for idx, term in enumerate(retained)},
        id_to_term=retained,
        doc_freq=[freq[term] for term in retained],
        num_docs=num_docs,
    )


@dataclass(frozen=True)
class BowVector:
    """Sparse term-count vector; entries are (term_id, count) with ids ascending."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        previous = -1
        for term_id, count in self.entries:
            if term_id <= previous:
                raise ValueError("term ids must be strictly increasing")
            if count < 1:
                raise ValueError("counts must be >= 1")
            previous = term_id

    @property
    def total_count(self) -> int:
        return sum(count for _, count in self.entries)

    def is_empty(self) -> bool:
        return not self.entries


def vectorize(doc: ProcessedDoc | list[str], dictionary: Dictionary) -> BowVector:
    """Count in-dictionary terms; out-of-dictionary tokens are dropped."""
    tokens = doc.tokens if isinstance(doc, ProcessedDoc) else doc
    counts: Counter[int] = Counter()
    for token in tokens:
        term_id = dictionary.term_to_id.get(token)
        if term_id is not None:
            counts[term_id] += 1
    return BowVector(tuple(sorted(counts.items())))


@dataclass(frozen=True)
class TextPipeline:
    """Bundles lexicon, pipeline config, and dictionary for text -> bow."""

    lexicon: Lexicon
    config: PipelineConfig
    dictionary: Dictionary

    def tokens(self, text: str) -> list[str]:
        return preprocess(text, self.lexicon, self.config)

    def bow(self, text: str) -> BowVector:
        return vectorize(self.tokens(text), self.dictionary)
