"""Naive Bayes classification as an audit-sampling tool.

Train a classifier on a labeled population, then draw audit evidence from a
class by posterior-percentile windows (user-based), posterior thresholds and
joint-posterior group search (item-based), or both (hybrid).
"""

from .classifier import NaiveBayesModel, PosteriorTable, classify_all, fit, posterior, predict
from .dataset import AttributeSchema, LabeledDataset, SplitSpec, class_members, load_csv, split
from .metrics import (
    binary_metrics,
    confusion,
    ks_statistic,
    macro_metrics,
    representativeness_index,
    roc_auc,
    variability,
)
from .sampling import (
    PercentileBounds,
    Thresholds,
    build_distribution,
    hybrid_sample,
    item_based_group_search,
    item_based_sample,
    joint_posterior_kwise,
    joint_posterior_pair,
    user_based_sample,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeSchema",
    "LabeledDataset",
    "NaiveBayesModel",
    "PercentileBounds",
    "PosteriorTable",
    "SplitSpec",
    "Thresholds",
    "binary_metrics",
    "build_distribution",
    "class_members",
    "classify_all",
    "confusion",
    "fit",
    "hybrid_sample",
    "item_based_group_search",
    "item_based_sample",
    "joint_posterior_kwise",
    "joint_posterior_pair",
    "ks_statistic",
    "load_csv",
    "macro_metrics",
    "posterior",
    "predict",
    "representativeness_index",
    "roc_auc",
    "split",
    "user_based_sample",
    "variability",
]
