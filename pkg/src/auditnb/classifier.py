"""Naive Bayes with Gaussian likelihoods for continuous columns and a
multinomial over count columns.

All products are evaluated as sums of logs and normalized with log-sum-exp,
so a record with thousands of tokens still gets a proper probability vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .dataset import CONTINUOUS, COUNT, AttributeSchema, LabeledDataset, Record

MODEL_FORMAT = "auditnb.naive-bayes"
MODEL_VERSION = 1

VARIANCE_REL_FLOOR = 1e-9
VARIANCE_ABS_FLOOR = 1e-12


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class NaiveBayesModel:
    schema: AttributeSchema
    labels: tuple[str, ...]
    log_priors: np.ndarray  # (K,)
    means: np.ndarray  # (K, n_continuous)
    variances: np.ndarray  # (K, n_continuous)
    token_log_probs: np.ndarray  # (K, n_count)
    alpha: float = 1.0

    @property
    def priors(self) -> np.ndarray:
        return np.exp(self.log_priors)

    def prior(self, label: str) -> float:
        return float(self.priors[self.labels.index(label)])

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "schema": self.schema.to_dict(),
            "labels": list(self.labels),
            "log_priors": self.log_priors.tolist(),
            "gaussian": {"mean": self.means.tolist(), "variance": self.variances.tolist()},
            "multinomial": {"token_log_probs": self.token_log_probs.tolist(), "alpha": self.alpha},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ModelError("unsupported model document")
        schema = AttributeSchema.from_dict(d["schema"])
        k = len(d["labels"])
        nc = len(schema.indices_of(CONTINUOUS))
        nm = len(schema.indices_of(COUNT))

        def arr(x, cols):
            return np.array(x, dtype=np.float64).reshape(k, cols)

        return cls(
            schema=schema,
            labels=tuple(d["labels"]),
            log_priors=np.array(d["log_priors"], dtype=np.float64),
            means=arr(d["gaussian"]["mean"], nc),
            variances=arr(d["gaussian"]["variance"], nc),
            token_log_probs=arr(d["multinomial"]["token_log_probs"], nm),
            alpha=float(d["multinomial"]["alpha"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "NaiveBayesModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PosteriorTable:
    labels: tuple[str, ...]
    probs: np.ndarray  # (N, K), rows sum to 1
    predicted: tuple[str, ...]
    ids: tuple[str, ...]
    priors: np.ndarray  # (K,)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def column(self, label: str) -> np.ndarray:
        return self.probs[:, self.labels.index(label)]

    def prior(self, label: str) -> float:
        return float(self.priors[self.labels.index(label)])


def fit(train: LabeledDataset, alpha: float = 1.0) -> NaiveBayesModel:
    if alpha <= 0:
        raise ValueError("smoothing alpha must be > 0")
    labels = train.label_set
    if len(labels) < 2:
        raise ModelError("need >= 2 classes to fit")
    y = np.array(train.labels)
    X = train.values
    cont = train.schema.indices_of(CONTINUOUS)
    cnt = train.schema.indices_of(COUNT)

    Xc = X[:, cont]
    if len(cont):
        spread = Xc.max(axis=0) - Xc.min(axis=0)
        floor = np.maximum(VARIANCE_REL_FLOOR * spread**2, VARIANCE_ABS_FLOOR)
    else:
        floor = np.zeros(0)

    counts = np.array([(y == c).sum() for c in labels], dtype=np.float64)
    if np.any(counts == 0):
        raise ModelError("every class needs at least one training record")
    log_priors = np.log(counts / counts.sum())

    means = np.empty((len(labels), len(cont)))
    variances = np.empty((len(labels), len(cont)))
    token_log_probs = np.empty((len(labels), len(cnt)))
    for k, c in enumerate(labels):
        rows = y == c
        if len(cont):
            means[k] = Xc[rows].mean(axis=0)
            variances[k] = np.maximum(Xc[rows].var(axis=0), floor)
        if len(cnt):
            totals = X[rows][:, cnt].sum(axis=0) + alpha
            token_log_probs[k] = np.log(totals) - np.log(totals.sum())
    return NaiveBayesModel(train.schema, labels, log_priors, means, variances, token_log_probs, float(alpha))


def _check_schema(model: NaiveBayesModel, X: np.ndarray) -> None:
    if X.shape[1] != model.schema.n:
        raise ModelError(f"record has {X.shape[1]} attributes, model expects {model.schema.n}")


def joint_log_likelihood(model: NaiveBayesModel, X: np.ndarray) -> np.ndarray:
    """log Pr(C) + sum_k log Pr(x_k | C) for each row of X, shape (N, K)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _check_schema(model, X)
    cont = model.schema.indices_of(CONTINUOUS)
    cnt = model.schema.indices_of(COUNT)
    jll = np.tile(model.log_priors, (X.shape[0], 1))
    if len(cont):
        xc = X[:, cont][:, None, :]
        var = model.variances[None, :, :]
        jll += (-0.5 * np.log(2 * math.pi * var) - (xc - model.means[None]) ** 2 / (2 * var)).sum(axis=2)
    if len(cnt):
        jll += X[:, cnt] @ model.token_log_probs.T
    return jll


def _normalize(jll: np.ndarray) -> np.ndarray:
    # shift by the row max first: subtracting logsumexp directly loses digits at |jll| ~ 1e11
    shifted = jll - jll.max(axis=1, keepdims=True)
    return np.exp(shifted - logsumexp(shifted, axis=1, keepdims=True))


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, Record) else np.asarray(x, dtype=np.float64)


def posterior(model: NaiveBayesModel, x: Record | np.ndarray) -> np.ndarray:
    return _normalize(joint_log_likelihood(model, _values(x).reshape(1, -1)))[0]


def _argmax_first(jll: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximal index, which is the documented tie-break
    return np.argmax(jll, axis=1)


def predict(model: NaiveBayesModel, x: Record | np.ndarray) -> str:
    jll = joint_log_likelihood(model, _values(x).reshape(1, -1))
    return model.labels[int(_argmax_first(jll)[0])]


def classify_all(model: NaiveBayesModel, data: LabeledDataset) -> PosteriorTable:
    if data.schema.columns != model.schema.columns:
        raise ModelError("dataset columns do not match the model schema")
    jll = joint_log_likelihood(model, data.values)
    probs = _normalize(jll)
    probs.setflags(write=False)
    predicted = tuple(model.labels[i] for i in _argmax_first(jll))
    return PosteriorTable(model.labels, probs, predicted, data.ids, model.priors)
