"""Graph experiment: degree/clustering features, five risk classes, hybrid draw on class 5.

    python scripts/experiment3_graph.py                    # bundled 30-vertex multigraph
    python scripts/experiment3_graph.py --edges edges.csv
"""

from __future__ import annotations

import argparse
import json
from importlib import resources

from auditnb import graph, metrics, sampling
from auditnb.classifier import classify_all, fit
from auditnb.dataset import SplitSpec, split


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--edges")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--confidence", type=float, default=75)
    ap.add_argument("--risky-class", default="5")
    args = ap.parse_args()

    path = args.edges or resources.files("auditnb").joinpath("data/multigraph30.csv")
    g = graph.load_edges(path)
    feats = graph.vertex_features(g)
    binned = graph.bin_vertices(feats, graph.ClassBinning.table3())
    data = graph.features_dataset(feats, binned)

    train, test = split(data, SplitSpec(0.8, args.seed))
    model = fit(train)
    held_out = classify_all(model, test)
    cm = metrics.confusion(held_out, test.labels)

    table = classify_all(model, data)
    bounds = sampling.PercentileBounds.from_confidence(args.confidence)
    per_class = {}
    for label in model.labels:
        dist = sampling.build_distribution(table, data, label)
        ev = sampling.user_based_sample(dist, bounds)
        per_class[label] = {"members": dist.size, "window": len(ev), "ri": ev.ri}
    risky = sampling.build_distribution(table, data, args.risky_class)
    hybrid = sampling.hybrid_sample(risky, bounds, sampling.Thresholds(1.0))

    result = {
        "vertices": len(g),
        "class_counts": binned.counts(),
        "out_of_binning": list(binned.out_of_binning),
        "confusion_normalized": cm.normalized().round(4).tolist(),
        "macro": metrics.macro_metrics(cm).to_dict(),
        "windows": per_class,
        "hybrid": {"class": args.risky_class, "drawn": list(hybrid.ids), "ri": hybrid.ri},
    }
    print(json.dumps(result, indent=2, default=float))


if __name__ == "__main__":
    main()
