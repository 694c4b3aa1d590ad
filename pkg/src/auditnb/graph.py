"""Transaction multigraphs: degree centrality with parallel edges, clustering
coefficients, and binning of vertices into risk classes.

Edges are read as (source, target) pairs; direction is dropped, repeated
transfers between the same two accounts raise the pair's multiplicity.
Multiplicity counts toward degree only. The clustering coefficient is taken on
the underlying simple graph, so it always lies in [0, 1].
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np

from .dataset import CONTINUOUS, AttributeSchema, LabeledDataset


class GraphError(Exception):
    pass


class MultiGraph:
    def __init__(self, edges: Iterable[tuple[str, str]] = (), vertices: Iterable[str] = ()):
        self._adj: dict[str, Counter] = {}
        for v in vertices:
            self.add_vertex(v)
        for a, b in edges:
            self.add_edge(a, b)

    def add_vertex(self, v: str) -> None:
        self._adj.setdefault(str(v), Counter())

    def add_edge(self, a: str, b: str, multiplicity: int = 1) -> None:
        a, b = str(a), str(b)
        if a == b:
            raise GraphError(f"self-loop on vertex {a!r}")
        if multiplicity < 1:
            raise GraphError("edge multiplicity must be >= 1")
        self.add_vertex(a)
        self.add_vertex(b)
        self._adj[a][b] += multiplicity
        self._adj[b][a] += multiplicity

    @property
    def vertices(self) -> list[str]:
        return sorted(self._adj)

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def neighbors(self, v: str) -> Counter:
        try:
            return self._adj[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def multiplicity(self, a: str, b: str) -> int:
        return self.neighbors(a)[b]

    def edges(self) -> list[tuple[str, str, int]]:
        """Each unordered pair once, as (u, v, multiplicity) with u < v."""
        return sorted((u, v, m) for u, nbrs in self._adj.items() for v, m in nbrs.items() if u < v)

    def total_multiplicity(self) -> int:
        return sum(m for _, _, m in self.edges())


def load_edges(path: str | Path) -> MultiGraph:
    """Read ``source,target`` lines (comma or whitespace separated).

    Blank lines and ``#`` comments are skipped; a leading ``source,target``
    header is allowed.
    """
    g = MultiGraph()
    first = True
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = next(csv.reader([line])) if "," in line else line.split()
            parts = [p.strip() for p in parts]
            if len(parts) != 2 or not all(parts):
                raise GraphError(f"line {line_no}: expected 'source,target', got {line!r}")
            if first and [p.lower() for p in parts] == ["source", "target"]:
                first = False
                continue
            first = False
            if parts[0] == parts[1]:
                raise GraphError(f"line {line_no}: self-loop on vertex {parts[0]!r}")
            g.add_edge(parts[0], parts[1])
    return g


def write_edges(g: MultiGraph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target"])
        for u, v, m in g.edges():
            for _ in range(m):
                w.writerow([u, v])


def degree_centrality(g: MultiGraph, v: str) -> int:
    return sum(g.neighbors(v).values())


def clustering_coefficient(g: MultiGraph, v: str) -> float:
    nbrs = list(g.neighbors(v))
    k = len(nbrs)
    if k < 2:
        return 0.0
    closed = sum(1 for a, b in combinations(nbrs, 2) if b in g.neighbors(a))
    return 2.0 * closed / (k * (k - 1))


@dataclass(frozen=True)
class VertexFeatures:
    degree: int
    clustering: float


def vertex_features(g: MultiGraph) -> dict[str, VertexFeatures]:
    return {v: VertexFeatures(degree_centrality(g, v), clustering_coefficient(g, v)) for v in g.vertices}


@dataclass(frozen=True)
class BinRow:
    d_low: float
    d_high: float  # exclusive; math.inf for the last row
    c_low: float
    c_high: float  # inclusive
    label: str


@dataclass(frozen=True)
class ClassBinning:
    rows: tuple[BinRow, ...]

    def __post_init__(self):
        if not self.rows:
            raise GraphError("binning needs at least one row")
        edge = 0.0
        for row in self.rows:
            if row.d_low != edge or not row.d_high > row.d_low:
                raise GraphError("degree intervals must partition [0, inf) in order")
            if not 0 <= row.c_low <= row.c_high <= 1:
                raise GraphError("clustering intervals must lie within [0, 1]")
            edge = row.d_high
        if edge != math.inf:
            raise GraphError("last degree interval must be open-ended")

    @classmethod
    def table3(cls) -> "ClassBinning":
        """Default five-class risk binning by degree and clustering."""
        return cls((
            BinRow(0, 2, 0, 1, "1"),
            BinRow(2, 4, 0, 1, "2"),
            BinRow(4, 6, 0, 0.417, "3"),
            BinRow(6, 10, 0, 0.367, "4"),
            BinRow(10, math.inf, 0, 0.28, "5"),
        ))

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"degree": [r.d_low, None if r.d_high == math.inf else r.d_high],
                 "clustering": [r.c_low, r.c_high], "class": r.label}
                for r in self.rows
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassBinning":
        rows = []
        for r in d["rows"]:
            lo, hi = r["degree"]
            rows.append(BinRow(float(lo), math.inf if hi is None else float(hi),
                               float(r["clustering"][0]), float(r["clustering"][1]), str(r["class"])))
        return cls(tuple(rows))

    @classmethod
    def load(cls, path: str | Path) -> "ClassBinning":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def classify(self, f: VertexFeatures) -> str | None:
        """Match on degree first; a clustering value outside that row's range is out-of-binning (None)."""
        for row in self.rows:
            if row.d_low <= f.degree < row.d_high:
                return row.label if row.c_low <= f.clustering <= row.c_high else None
        return None


@dataclass(frozen=True)
class BinningResult:
    labels: dict[str, str]  # binned vertices only
    out_of_binning: tuple[str, ...]

    def counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.labels.values()).items()))


def bin_vertices(features: dict[str, VertexFeatures], binning: ClassBinning) -> BinningResult:
    labels, out = {}, []
    for v in sorted(features):
        lab = binning.classify(features[v])
        if lab is None:
            out.append(v)
        else:
            labels[v] = lab
    return BinningResult(labels, tuple(out))


FEATURE_COLUMNS = ("D", "c")


def write_features_csv(features: dict[str, VertexFeatures], result: BinningResult, path: str | Path) -> None:
    """Columns vertex,D,c,class; ``class`` is empty for out-of-binning vertices."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex", "D", "c", "class"])
        for v in sorted(features):
            f = features[v]
            w.writerow([v, f.degree, repr(f.clustering), result.labels.get(v, "")])


def features_dataset(features: dict[str, VertexFeatures], result: BinningResult) -> LabeledDataset:
    """Binned vertices as a dataset with continuous D and c attributes."""
    schema = AttributeSchema(tuple((c, CONTINUOUS) for c in FEATURE_COLUMNS), "class", "vertex")
    verts = sorted(result.labels)
    values = np.array([[features[v].degree, features[v].clustering] for v in verts], dtype=np.float64)
    return LabeledDataset(schema, values.reshape(len(verts), 2), tuple(result.labels[v] for v in verts), tuple(verts))
