"""Regenerate the bundled offline fixtures in src/auditnb/data/.

    python scripts/make_fixtures.py

* adclick_synthetic.csv  1000 rows, 4 continuous attributes, 500/500 classes
* sms_mini.csv           40 labeled messages (12 spam, 28 ham)
* multigraph30.csv       30-vertex transaction multigraph
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parents[1] / "src" / "auditnb" / "data"

# per-class (mean, std) of each attribute; well separated on every axis
ADCLICK_COLUMNS = ("daily_time_on_site", "age", "area_income", "daily_internet_usage")
ADCLICK_PARAMS = {
    "Clicked": ((42.0, 8.0), (42.0, 7.0), (45000.0, 9000.0), (140.0, 20.0)),
    "Not clicked": ((72.0, 8.0), (31.0, 7.0), (62000.0, 9000.0), (215.0, 20.0)),
}


def make_adclick(path: Path, seed: int = 20231016) -> None:
    rng = np.random.default_rng(seed)
    rows = []
    for label, params in ADCLICK_PARAMS.items():
        cols = [rng.normal(mu, sd, 500) for mu, sd in params]
        for vals in zip(*cols):
            rows.append([round(float(v), 2) for v in vals] + [label])
    order = rng.permutation(len(rows))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ADCLICK_COLUMNS) + ["clicked"])
        for i in order:
            w.writerow(rows[i])


SPAM_WORDS = ["free", "win", "prize", "claim", "cash", "call", "txt", "urgent", "offer", "reply", "now", "mobile"]
HAM_WORDS = ["home", "dinner", "later", "ok", "see", "tomorrow", "love", "work", "meeting", "lunch", "now", "call"]
FILLER = ["to", "and", "the", "you", "a", "for", "is", "your", "in", "at"]


def make_sms(path: Path, seed: int = 7) -> None:
    rng = np.random.default_rng(seed)
    rows = []
    for label, vocab, n in (("spam", SPAM_WORDS, 12), ("ham", HAM_WORDS, 28)):
        for _ in range(n):
            words = list(rng.choice(vocab, size=int(rng.integers(4, 9))))
            words += list(rng.choice(FILLER, size=int(rng.integers(2, 5))))
            rng.shuffle(words)
            msg = " ".join(words)
            if label == "spam":
                msg = msg.upper() if rng.random() < 0.3 else msg.capitalize() + "!"
            rows.append((label, msg))
    order = rng.permutation(len(rows))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "text"])
        for i in order:
            w.writerow(rows[i])


def make_multigraph(path: Path, seed: int = 30) -> None:
    """Hand-placed motifs plus a seeded random block.

    v01-v03  isolated triangle (c = 1 everywhere)
    v04-v05  one pair joined by a repeated transfer (D = 2 each)
    v06, v07 hubs paying a dozen accounts each (D >= 10, sparse neighbourhoods)
    v08-v30  random extra edges, some repeated; every vertex gets at least one
    """
    rng = np.random.default_rng(seed)
    v = [f"v{i:02d}" for i in range(1, 31)]
    edges = [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
    edges += [(v[3], v[4]), (v[4], v[3])]
    edges += [(v[5], v[k]) for k in range(7, 19)]
    edges += [(v[6], v[k]) for k in range(17, 29)]
    edges += [(v[6], v[8]), (v[6], v[8])]
    pool = v[7:]
    for _ in range(26):
        a, b = rng.choice(len(pool), size=2, replace=False)
        edges.append((pool[a], pool[b]))
        if rng.random() < 0.25:
            edges.append((pool[b], pool[a]))
    touched = {x for e in edges for x in e}
    for x in v:
        if x not in touched:
            edges.append((x, pool[int(rng.integers(len(pool)))]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target"])
        w.writerows(edges)


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    make_adclick(DATA / "adclick_synthetic.csv")
    make_sms(DATA / "sms_mini.csv")
    make_multigraph(DATA / "multigraph30.csv")
    print(f"fixtures written to {DATA}")
