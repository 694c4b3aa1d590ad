"""Labeled audit populations: schema, CSV/JSON-lines loading and seeded splits."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CONTINUOUS = "continuous"
COUNT = "count"
KINDS = (CONTINUOUS, COUNT)

_MASK64 = (1 << 64) - 1


class DatasetError(Exception):
    pass


class SchemaError(DatasetError):
    pass


class RowError(DatasetError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class AttributeSchema:
    columns: tuple[tuple[str, str], ...]
    label_column: str
    id_column: str | None = None

    def __post_init__(self):
        columns = tuple((str(name), str(kind)) for name, kind in self.columns)
        object.__setattr__(self, "columns", columns)
        if not columns:
            raise SchemaError("schema needs at least one attribute column")
        names = [name for name, _ in columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate attribute column names")
        for name, kind in columns:
            if kind not in KINDS:
                raise SchemaError(f"column {name!r}: unknown kind {kind!r}")
        if self.label_column in names:
            raise SchemaError("label column must not be an attribute column")
        if self.id_column is not None and self.id_column in names + [self.label_column]:
            raise SchemaError("id column must differ from attribute and label columns")

    @classmethod
    def build(cls, continuous=(), count=(), label_column="label", id_column=None):
        cols = [(c, CONTINUOUS) for c in continuous] + [(c, COUNT) for c in count]
        return cls(tuple(cols), label_column, id_column)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(kind for _, kind in self.columns)

    @property
    def n(self) -> int:
        return len(self.columns)

    def indices_of(self, kind: str) -> np.ndarray:
        return np.array([i for i, k in enumerate(self.kinds) if k == kind], dtype=int)

    def to_dict(self) -> dict:
        return {
            "columns": [[name, kind] for name, kind in self.columns],
            "label_column": self.label_column,
            "id_column": self.id_column,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttributeSchema":
        return cls(tuple(tuple(c) for c in d["columns"]), d["label_column"], d.get("id_column"))


@dataclass(frozen=True)
class Record:
    values: np.ndarray
    id: str


@dataclass(frozen=True)
class LabeledDataset:
    """N records of n attributes with one class label each.

    ``values`` is an (N, n) float array; count columns hold integral values.
    The array is made read-only on construction.
    """

    schema: AttributeSchema
    values: np.ndarray
    labels: tuple[str, ...]
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1 and self.schema.n == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[1] != self.schema.n:
            raise SchemaError(
                f"values must have shape (N, {self.schema.n}), got {values.shape}"
            )
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != values.shape[0]:
            raise DatasetError("records and labels differ in length")
        if len(labels) == 0:
            raise DatasetError("empty dataset")
        ids = tuple(str(i) for i in self.ids) if self.ids else tuple(str(i) for i in range(len(labels)))
        if len(ids) != len(labels):
            raise DatasetError("ids and labels differ in length")
        counts = values[:, self.schema.indices_of(COUNT)]
        if counts.size and (np.any(counts < 0) or np.any(counts != np.floor(counts))):
            raise DatasetError("count attributes must be non-negative integers")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def N(self) -> int:
        return len(self.labels)

    @property
    def label_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def record(self, i: int) -> Record:
        return Record(self.values[i], self.ids[i])

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = list(indices)
        return LabeledDataset(
            self.schema,
            self.values[idx] if idx else np.empty((0, self.schema.n)),
            tuple(self.labels[i] for i in idx),
            tuple(self.ids[i] for i in idx),
        )


def _require_two_labels(data: LabeledDataset) -> LabeledDataset:
    if len(data.label_set) < 2:
        raise DatasetError("need >= 2 distinct class labels")
    return data


def _parse_cell(text: str, kind: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RowError(row, f"column {column!r}: cannot parse {text!r}") from None
    if not math.isfinite(value):
        raise RowError(row, f"column {column!r}: non-finite value {text!r}")
    if kind == COUNT and (value < 0 or value != math.floor(value)):
        raise RowError(row, f"column {column!r}: count must be a non-negative integer, got {text!r}")
    return value


def _from_rows(rows: Iterable[dict], schema: AttributeSchema) -> LabeledDataset:
    values, labels, ids = [], [], []
    for row_no, row in enumerate(rows, start=1):
        vec = []
        for name, kind in schema.columns:
            cell = row.get(name)
            if cell is None or (isinstance(cell, str) and cell.strip() == ""):
                raise RowError(row_no, f"missing value in column {name!r}")
            vec.append(_parse_cell(str(cell), kind, row_no, name))
        label = row.get(schema.label_column)
        if label is None or str(label) == "":
            raise RowError(row_no, "missing class label")
        values.append(vec)
        labels.append(str(label))
        if schema.id_column is not None:
            ids.append(str(row[schema.id_column]))
    if not labels:
        raise DatasetError("empty dataset")
    data = LabeledDataset(schema, np.array(values, dtype=np.float64), tuple(labels), tuple(ids))
    if schema.id_column is not None and len(set(data.ids)) != len(data.ids):
        raise DatasetError("duplicate record ids")
    return _require_two_labels(data)


def _check_header(header: Sequence[str] | None, schema: AttributeSchema) -> None:
    if not header:
        raise DatasetError("empty dataset")
    required = list(schema.names) + [schema.label_column]
    if schema.id_column is not None:
        required.append(schema.id_column)
    missing = [name for name in required if name not in header]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")


def load_csv(path: str | Path, schema: AttributeSchema) -> LabeledDataset:
    """Read a comma-separated, double-quoted UTF-8 file with a header row."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, schema)
        return _from_rows(reader, schema)


def load_jsonl(path: str | Path, schema: AttributeSchema) -> LabeledDataset:
    def rows():
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise RowError(line_no, f"invalid JSON: {exc.msg}") from None
                _check_header(list(obj), schema)
                yield obj

    return _from_rows(rows(), schema)


def _format_value(value: float, kind: str) -> str:
    if kind == COUNT:
        return str(int(value))
    return repr(float(value))


def to_csv(data: LabeledDataset) -> str:
    """Serialize in the same dialect ``load_csv`` reads; floats use ``repr`` so they round-trip."""
    schema = data.schema
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ([schema.id_column] if schema.id_column else []) + list(schema.names) + [schema.label_column]
    writer.writerow(header)
    for i in range(len(data)):
        row = [data.ids[i]] if schema.id_column else []
        row += [_format_value(v, k) for v, k in zip(data.values[i], schema.kinds)]
        row.append(data.labels[i])
        writer.writerow(row)
    return buf.getvalue()


def write_csv(data: LabeledDataset, path: str | Path) -> None:
    Path(path).write_text(to_csv(data), encoding="utf-8")


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood); identical streams on every platform."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        # multiply-shift reduction of a 64-bit draw to [0, bound)
        return (self.next() * bound) >> 64


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates: for i = n-1 .. 1 swap position i with a draw j in [0, i]."""
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def train_size(self, n: int) -> int:
        # round half up
        return int(math.floor(self.train_fraction * n + 0.5))


def split(data: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Unstratified seeded split. Both parts keep the original row order."""
    if len(data) < 2:
        raise DatasetError("need N >= 2 to split")
    order = shuffled_indices(len(data), spec.seed)
    k = min(max(spec.train_size(len(data)), 1), len(data) - 1)
    train_idx = sorted(order[:k])
    test_idx = sorted(order[k:])
    return data.subset(train_idx), data.subset(test_idx)


def class_members(data: LabeledDataset, label: str) -> list[int]:
    if label not in set(data.labels):
        raise DatasetError(f"unknown class label {label!r}")
    return [i for i, lab in enumerate(data.labels) if lab == label]
