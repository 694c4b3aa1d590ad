"""Drawing audit evidence from one class of a classified population.

Three strategies are provided:

* user-based: members whose posterior rank falls inside a central percentile
  window of the class (rank-midpoint rule, each of the m members owns mass
  1/m centred at (r - 0.5)/m);
* item-based: members whose posterior clears a threshold, optionally extended
  to pairs and larger groups scored by their joint posterior and searched
  level by level with Apriori pruning;
* hybrid: the item-based filter applied inside the user-based window.

Joint group scores can exceed 1 (their upper bound is 1 / prior**(k-1)), so
they are reported as scores, not probabilities.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .classifier import PosteriorTable
from .dataset import LabeledDataset, class_members
from .metrics import mid_mass, representativeness_index

log = logging.getLogger(__name__)

DEFAULT_MAX_K = 3
DEFAULT_CANDIDATE_CAP = 10**6


class SamplingError(Exception):
    pass


class GroupSearchOverflow(SamplingError):
    pass


@dataclass(frozen=True)
class ClassPosteriorDistribution:
    label: str
    prior: float
    member_indices: tuple[int, ...]  # ascending by score, ties by record index
    scores: np.ndarray
    normalized_cdf: np.ndarray
    ids: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.member_indices)

    @cached_property
    def _ranks(self) -> dict[int, int]:
        return {idx: r for r, idx in enumerate(self.member_indices, start=1)}

    def rank_of(self) -> dict[int, int]:
        """Record index -> 1-based ascending rank within the class."""
        return self._ranks

    @cached_property
    def mid_mass(self) -> np.ndarray:
        """Midpoint of each member's slice of the normalized score mass."""
        return mid_mass(self.scores)

    def score_of(self) -> dict[int, float]:
        return dict(zip(self.member_indices, self.scores.tolist()))


@dataclass(frozen=True)
class PercentileBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0 <= self.lower < 100 and 0 < self.upper <= 100 and self.lower < self.upper):
            raise ValueError(f"invalid percentile bounds ({self.lower}, {self.upper})")

    @classmethod
    def from_confidence(cls, confidence: float) -> "PercentileBounds":
        if not 0 < confidence <= 100:
            raise ValueError("confidence must lie in (0, 100]")
        half = confidence / 2
        return cls(50 - half, 50 + half)

    @property
    def confidence(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class Thresholds:
    """sigma1 filters single members, sigma2 pairs, sigma3 groups of 3 or more.

    A ``None`` sigma2/sigma3 switches the corresponding search levels off.
    """

    sigma1: float
    sigma2: float | None = None
    sigma3: float | None = None

    def __post_init__(self):
        if not 0 < self.sigma1 <= 1:
            raise ValueError("sigma1 must lie in (0, 1]")
        for name in ("sigma2", "sigma3"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be > 0")

    def for_level(self, k: int) -> float | None:
        if k == 1:
            return self.sigma1
        if k == 2:
            return self.sigma2
        return self.sigma3


@dataclass(frozen=True)
class EvidenceSet:
    strategy: str  # user | item | item-pair | item-kwise | hybrid
    label: str
    indices: tuple[int, ...]
    scores: tuple[float, ...]
    params: dict = field(default_factory=dict)
    ri: float | None = None
    ids: tuple[str, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.indices

    def __len__(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "class": self.label,
            "params": self.params,
            "size": len(self.indices),
            "empty": self.empty,
            "indices": list(self.indices),
            "record_ids": list(self.ids),
            "posteriors": list(self.scores),
            "ri": self.ri,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceSet":
        return cls(
            strategy=d["strategy"],
            label=d["class"],
            indices=tuple(d["indices"]),
            scores=tuple(d["posteriors"]),
            params=d.get("params", {}),
            ri=d.get("ri"),
            ids=tuple(d.get("record_ids", ())),
        )


def build_distribution(
    table: PosteriorTable, data: LabeledDataset, label: str, members: Sequence[int] | None = None
) -> ClassPosteriorDistribution:
    """Sort the class members by Pr(label | x) and accumulate the normalized score mass.

    ``members`` overrides class membership (e.g. predicted rather than true
    labels); by default the dataset labels decide.
    """
    if len(table) != len(data):
        raise SamplingError("posterior table and dataset differ in length")
    idx = list(members) if members is not None else class_members(data, label)
    if not idx:
        raise SamplingError(f"class {label!r} has no members")
    col = table.column(label)
    order = sorted(idx, key=lambda i: (col[i], i))
    scores = np.array([col[i] for i in order], dtype=np.float64)
    total = scores.sum()
    if total > 0:
        cdf = np.cumsum(scores) / total
    else:
        cdf = np.arange(1, len(order) + 1) / len(order)
    return ClassPosteriorDistribution(
        label=label,
        prior=table.prior(label),
        member_indices=tuple(order),
        scores=scores,
        normalized_cdf=cdf,
        ids=tuple(data.ids[i] for i in order),
    )


def _evidence(dist, strategy, chosen: Iterable[int], params, with_ri=True) -> EvidenceSet:
    """Build an EvidenceSet from record indices, kept in the class's ascending-score order."""
    rank = dist.rank_of()
    ranks = sorted(rank[i] - 1 for i in set(chosen))
    indices = tuple(dist.member_indices[r] for r in ranks)
    scores = tuple(float(dist.scores[r]) for r in ranks)
    ids = tuple(dist.ids[r] for r in ranks) if dist.ids else ()
    ri = None
    if indices and with_ri:
        ri = representativeness_index(dist, indices)
    if not indices:
        log.warning("%s evidence for class %r is empty; thresholds or bounds too strict", strategy, dist.label)
    return EvidenceSet(strategy, dist.label, indices, scores, dict(params), ri, ids)


def user_based_mask(m: int, bounds: PercentileBounds) -> np.ndarray:
    r = np.arange(1, m + 1)
    # lower/100 < (r - 0.5)/m <= upper/100, cross-multiplied to stay exact
    mid = (2 * r - 1) * 50.0
    return (mid > bounds.lower * m) & (mid <= bounds.upper * m)


def user_based_sample(dist: ClassPosteriorDistribution, bounds: PercentileBounds) -> EvidenceSet:
    mask = user_based_mask(dist.size, bounds)
    chosen = [i for i, keep in zip(dist.member_indices, mask) if keep]
    params = {"lower": bounds.lower, "upper": bounds.upper, "confidence": bounds.confidence}
    return _evidence(dist, "user", chosen, params)


def item_based_sample(dist: ClassPosteriorDistribution, sigma1: float) -> EvidenceSet:
    if not 0 < sigma1 <= 1:
        raise ValueError("sigma1 must lie in (0, 1]")
    chosen = [i for i, s in zip(dist.member_indices, dist.scores) if s >= sigma1]
    return _evidence(dist, "item", chosen, {"sigma1": sigma1})


def _check_prior(prior: float) -> None:
    if not 0 < prior < 1:
        raise SamplingError(f"class prior must lie in (0, 1), got {prior}")


def joint_posterior_pair(p_a: float, p_b: float, prior: float) -> float:
    """Pr(C | a and b) = Pr(C|a) Pr(C|b) / Pr(C); bounded above by 1 / Pr(C)."""
    _check_prior(prior)
    return p_a * p_b / prior


def joint_posterior_kwise(scores: Sequence[float], prior: float) -> float:
    """prod Pr(C|x_i) / Pr(C)**(k-1); bounded above by 1 / Pr(C)**(k-1)."""
    _check_prior(prior)
    if len(scores) < 2:
        raise SamplingError("k-wise joint posterior needs k >= 2 scores")
    return math.prod(scores) / prior ** (len(scores) - 1)


def group_score(scores: Sequence[float], prior: float) -> float:
    if len(scores) == 1:
        return float(scores[0])
    if len(scores) == 2:
        return joint_posterior_pair(scores[0], scores[1], prior)
    return joint_posterior_kwise(scores, prior)


@dataclass(frozen=True)
class GroupLevel:
    k: int
    threshold: float
    groups: tuple[tuple[int, ...], ...]  # record indices, each tuple ascending
    scores: tuple[float, ...]


def _candidates(prev: Sequence[tuple[int, ...]], cap: int, k: int) -> list[tuple[int, ...]]:
    """Apriori join of sorted (k-1)-tuples sharing a (k-2)-prefix, then subset pruning."""
    survivors = set(prev)
    by_prefix: dict[tuple[int, ...], list[int]] = {}
    for g in prev:
        by_prefix.setdefault(g[:-1], []).append(g[-1])
    out = []
    for prefix, tails in by_prefix.items():
        tails.sort()
        for a, b in combinations(tails, 2):
            cand = prefix + (a, b)
            if all(sub in survivors for sub in combinations(cand, k - 1)):
                out.append(cand)
                if len(out) > cap:
                    raise GroupSearchOverflow(f"level {k} exceeds {cap} candidates")
    return out


def group_search_levels(
    dist: ClassPosteriorDistribution,
    thresholds: Thresholds,
    max_k: int = DEFAULT_MAX_K,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[GroupLevel]:
    """Level-wise search. A k-group survives when its score clears the level's
    threshold and (k > 1) every (k-1)-subgroup survived the previous level."""
    if max_k < 2:
        raise ValueError("max_k must be >= 2")
    score = dist.score_of()
    level1 = tuple(sorted((i,) for i in dist.member_indices if score[i] >= thresholds.sigma1))
    levels = [GroupLevel(1, thresholds.sigma1, level1, tuple(score[g[0]] for g in level1))]
    prev = list(level1)
    for k in range(2, max_k + 1):
        sigma = thresholds.for_level(k)
        if sigma is None or not prev:
            break
        kept, kept_scores = [], []
        for cand in _candidates(prev, candidate_cap, k):
            s = group_score([score[i] for i in cand], dist.prior)
            if s >= sigma:
                kept.append(cand)
                kept_scores.append(s)
        order = sorted(range(len(kept)), key=lambda j: kept[j])
        levels.append(GroupLevel(k, sigma, tuple(kept[j] for j in order), tuple(kept_scores[j] for j in order)))
        if not kept:
            break
        prev = [kept[j] for j in order]
    return levels


def item_based_group_search(
    dist: ClassPosteriorDistribution,
    thresholds: Thresholds,
    max_k: int = DEFAULT_MAX_K,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[EvidenceSet]:
    """One EvidenceSet per surviving group, levels in order, groups sorted by record index."""
    out = []
    for level in group_search_levels(dist, thresholds, max_k, candidate_cap):
        strategy = {1: "item", 2: "item-pair"}.get(level.k, "item-kwise")
        for group, s in zip(level.groups, level.scores):
            params = {"level": level.k, "threshold": level.threshold, "group_score": s}
            if level.k > 1:
                params["score_kind"] = "joint posterior score (may exceed 1)"
            out.append(_evidence(dist, strategy, group, params))
    return out


def group_union(groups: Iterable[EvidenceSet], dist: ClassPosteriorDistribution, level: int | None = None):
    """Merge group evidence (optionally one level only) into a single evidence set."""
    chosen: set[int] = set()
    for g in groups:
        if level is None or g.params.get("level") == level:
            chosen.update(g.indices)
    strategy = {1: "item", 2: "item-pair"}.get(level, "item-kwise")
    return _evidence(dist, strategy, chosen, {"level": level, "groups": "union"})


def hybrid_sample(
    dist: ClassPosteriorDistribution, bounds: PercentileBounds, thresholds: Thresholds
) -> EvidenceSet:
    window = user_based_sample(dist, bounds)
    inside = set(window.indices)
    chosen = [i for i, s in zip(dist.member_indices, dist.scores) if i in inside and s >= thresholds.sigma1]
    params = {
        "lower": bounds.lower,
        "upper": bounds.upper,
        "confidence": bounds.confidence,
        "sigma1": thresholds.sigma1,
    }
    return _evidence(dist, "hybrid", chosen, params)
