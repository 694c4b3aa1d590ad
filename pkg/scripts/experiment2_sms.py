"""Text experiment: keyword counts, spam classification, 75% window on the spam class.

    python scripts/experiment2_sms.py                      # bundled 40-message corpus
    python scripts/experiment2_sms.py --data sms.csv       # CSV with label,text columns
"""

from __future__ import annotations

import argparse
import json
from importlib import resources

import numpy as np

from auditnb import metrics, sampling, text
from auditnb.classifier import classify_all, fit
from auditnb.dataset import SplitSpec, split


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--confidence", type=float, default=75)
    ap.add_argument("--top-k", type=int, default=20)
    ap.add_argument("--min-count", type=int, default=2)
    args = ap.parse_args()

    path = args.data or resources.files("auditnb").joinpath("data/sms_mini.csv")
    corpus = text.load_corpus_csv(path)
    dictionary = text.build_dictionary(corpus.messages, min_count=args.min_count)
    tc = text.vectorize(corpus.messages, dictionary)
    data = text.to_dataset(tc, corpus.labels)

    train, test = split(data, SplitSpec(0.75, args.seed))
    model = fit(train)
    held_out = classify_all(model, test)
    cm = metrics.confusion(held_out, test.labels)

    table = classify_all(model, data)
    dist = sampling.build_distribution(table, data, "spam")
    ev = sampling.user_based_sample(dist, sampling.PercentileBounds.from_confidence(args.confidence))
    class_top = text.top_keywords(tc, args.top_k, dist.member_indices)
    evidence_top = text.top_keywords(tc, args.top_k, ev.indices)

    result = {
        "dictionary_size": len(dictionary),
        "metrics": metrics.binary_metrics(cm, "spam").to_dict(),
        "auc": metrics.roc_auc(held_out.column("spam"), np.array(test.labels) == "spam").auc,
        "spam_members": dist.size,
        "evidence_size": len(ev),
        "ri": ev.ri,
        "ranking_preserved": text.ranking_preserved(class_top, evidence_top),
        "top_keywords": {"class": class_top, "evidence": evidence_top},
    }
    print(json.dumps(result, indent=2, default=float))


if __name__ == "__main__":
    main()
