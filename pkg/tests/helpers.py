import numpy as np

from auditnb.classifier import PosteriorTable
from auditnb.dataset import AttributeSchema, LabeledDataset
from auditnb.sampling import build_distribution


def distribution(scores, prior=0.5, label="C"):
    """Class distribution for members 0..m-1 with the given Pr(label | x), plus one non-member."""
    scores = [float(s) for s in scores]
    n = len(scores) + 1
    probs = np.array([[s, 1 - s] for s in scores] + [[0.0, 1.0]])
    labels = tuple([label] * len(scores) + ["Z"])
    table = PosteriorTable((label, "Z"), probs, labels, tuple(map(str, range(n))), np.array([prior, 1 - prior]))
    data = LabeledDataset(AttributeSchema.build(continuous=["x"]), np.zeros((n, 1)), labels)
    return build_distribution(table, data, label)
