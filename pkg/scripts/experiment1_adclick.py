"""Tabular experiment: classify, draw user- and item-based evidence, compare distributions.

    python scripts/experiment1_adclick.py                       # bundled synthetic table
    python scripts/experiment1_adclick.py --data advertising.csv --real

``--real`` switches to the public ad-click column names, with "Clicked on Ad" as
the label (1 = clicked).
"""

from __future__ import annotations

import argparse
import json
from importlib import resources

import numpy as np

from auditnb import metrics, sampling
from auditnb.classifier import classify_all, fit
from auditnb.dataset import AttributeSchema, SplitSpec, load_csv, split

SYNTHETIC = (["daily_time_on_site", "age", "area_income", "daily_internet_usage"], "clicked", "Clicked")
REAL = (["Daily Time Spent on Site", "Age", "Area Income", "Daily Internet Usage"], "Clicked on Ad", "1")


def run(path, columns, label_column, positive, seed, confidence, sigma1, sigma2):
    data = load_csv(path, AttributeSchema.build(continuous=columns, label_column=label_column))
    train, test = split(data, SplitSpec(2 / 3, seed))
    model = fit(train)
    held_out = classify_all(model, test)
    cm = metrics.confusion(held_out, test.labels)
    out = {
        "metrics": metrics.binary_metrics(cm, positive).to_dict(),
        "auc": metrics.roc_auc(held_out.column(positive), np.array(test.labels) == positive).auc,
        "confusion_normalized": cm.normalized().round(4).tolist(),
    }

    table = classify_all(model, data)
    bounds = sampling.PercentileBounds.from_confidence(confidence)
    user, drawn = {}, []
    for label in model.labels:
        dist = sampling.build_distribution(table, data, label)
        ev = sampling.user_based_sample(dist, bounds)
        user[label] = {"size": len(ev), "ri": ev.ri}
        drawn += ev.indices
    out["user_based"] = user
    ks = metrics.ks_multivariate(data.values, data.values[drawn], data.schema.names)
    out["ks"] = {"d_max": ks.d, "critical": ks.to_dict()["critical"]}
    last = data.schema.names[-1]
    out["variability"] = {
        "population": metrics.variability(data.values[:, -1]).to_dict(),
        "evidence": metrics.variability(data.values[drawn, -1]).to_dict(),
        "attribute": last,
    }

    dist = sampling.build_distribution(table, data, positive)
    groups = sampling.group_search_levels(dist, sampling.Thresholds(sigma1, sigma2), max_k=2)
    pair_members = {i for g in groups[-1].groups for i in g} if len(groups) > 1 else set()
    out["item_based"] = {
        "sigma1": sigma1,
        "sigma2": sigma2,
        "level1": len(groups[0].groups),
        "pairs": len(groups[1].groups) if len(groups) > 1 else 0,
        "records_in_pairs": len(pair_members),
    }
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data")
    ap.add_argument("--real", action="store_true", help="public dataset column names")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--confidence", type=float, default=50)
    ap.add_argument("--sigma1", type=float, default=0.999)
    ap.add_argument("--sigma2", type=float, default=1.9999)
    args = ap.parse_args()
    columns, label_column, positive = REAL if args.real else SYNTHETIC
    path = args.data or resources.files("auditnb").joinpath("data/adclick_synthetic.csv")
    result = run(path, columns, label_column, positive, args.seed, args.confidence, args.sigma1, args.sigma2)
    print(json.dumps(result, indent=2, default=float))


if __name__ == "__main__":
    main()
