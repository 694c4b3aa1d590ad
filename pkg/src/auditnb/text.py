"""Keyword-count features for message corpora."""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import AttributeSchema, DatasetError, LabeledDataset, SchemaError

TOKEN_RE = re.compile(r"[a-z0-9]+")
LABEL_COLUMN = "_label"  # cannot collide with a token


def tokenize(message: str) -> list[str]:
    """Lowercase, then split on every run of characters outside [a-z0-9]."""
    return TOKEN_RE.findall(message.lower())


def default_stopwords() -> frozenset[str]:
    text = resources.files("auditnb").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return read_stopwords(text.splitlines())


def read_stopwords(lines: Iterable[str]) -> frozenset[str]:
    words = set()
    for line in lines:
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


@dataclass(frozen=True)
class KeywordDictionary:
    keywords: tuple[str, ...]
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.keywords:
            raise DatasetError("keyword dictionary is empty")
        if set(self.keywords) & self.stopwords:
            raise DatasetError("keywords and stopwords overlap")
        if len(set(self.keywords)) != len(self.keywords):
            raise DatasetError("duplicate keywords")

    def __len__(self) -> int:
        return len(self.keywords)

    def to_dict(self) -> dict:
        return {"keywords": list(self.keywords), "stopwords": sorted(self.stopwords)}

    @classmethod
    def from_dict(cls, d: dict) -> "KeywordDictionary":
        return cls(tuple(d["keywords"]), frozenset(d.get("stopwords", ())))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "KeywordDictionary":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _ranked(counter: Counter) -> list[tuple[str, int]]:
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def build_dictionary(
    corpus: Sequence[str], stopwords: frozenset[str] | None = None, min_count: int = 2
) -> KeywordDictionary:
    if not corpus:
        raise DatasetError("corpus is empty")
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    freq = Counter(tok for msg in corpus for tok in tokenize(msg))
    kept = [tok for tok, n in _ranked(freq) if n >= min_count and tok not in stop]
    if not kept:
        raise DatasetError(f"no token reaches min_count={min_count} outside the stopword list")
    return KeywordDictionary(tuple(kept), stop)


@dataclass(frozen=True)
class TokenCounts:
    keywords: tuple[str, ...]
    counts: np.ndarray  # (messages, keywords), integers

    def aggregate(self, rows: Sequence[int] | None = None) -> np.ndarray:
        sub = self.counts if rows is None else self.counts[list(rows)]
        return sub.sum(axis=0)


def vectorize(messages: Sequence[str], dictionary: KeywordDictionary) -> TokenCounts:
    pos = {tok: j for j, tok in enumerate(dictionary.keywords)}
    counts = np.zeros((len(messages), len(pos)), dtype=np.int64)
    for i, msg in enumerate(messages):
        for tok in tokenize(msg):
            j = pos.get(tok)
            if j is not None:
                counts[i, j] += 1
    return TokenCounts(dictionary.keywords, counts)


def to_dataset(tc: TokenCounts, labels: Sequence[str], ids: Sequence[str] = ()) -> LabeledDataset:
    schema = AttributeSchema.build(count=tc.keywords, label_column=LABEL_COLUMN)
    return LabeledDataset(schema, tc.counts.astype(np.float64), tuple(labels), tuple(ids))


def top_keywords(tc: TokenCounts, k: int, rows: Sequence[int] | None = None) -> list[tuple[str, int]]:
    """Top-k tokens by aggregate count over ``rows`` (all rows by default); ties lexicographic."""
    if k < 1:
        raise ValueError("k must be >= 1")
    totals = tc.aggregate(rows)
    ranked = _ranked(Counter({tok: int(n) for tok, n in zip(tc.keywords, totals)}))
    return ranked[:k]


def ranking_preserved(reference: Sequence[tuple[str, int]], other: Sequence[tuple[str, int]]) -> bool:
    """True when both rankings list the same tokens in the same order."""
    return [t for t, _ in reference] == [t for t, _ in other]


@dataclass(frozen=True)
class Corpus:
    messages: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.messages) != len(self.labels):
            raise DatasetError("messages and labels differ in length")
        if not self.messages:
            raise DatasetError("empty corpus")


def load_corpus_csv(path: str | Path, label_column: str = "label", text_column: str = "text") -> Corpus:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or label_column not in reader.fieldnames or text_column not in reader.fieldnames:
            raise SchemaError(f"corpus needs columns {label_column!r} and {text_column!r}")
        rows = list(reader)
    return Corpus(tuple(r[text_column] for r in rows), tuple(r[label_column] for r in rows))


def load_corpus_lines(text_path: str | Path, labels_path: str | Path) -> Corpus:
    """One message per line, with a sidecar file holding one label per line."""
    messages = Path(text_path).read_text(encoding="utf-8").splitlines()
    labels = Path(labels_path).read_text(encoding="utf-8").splitlines()
    return Corpus(tuple(messages), tuple(label.strip() for label in labels))
