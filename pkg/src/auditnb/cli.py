"""Command-line entry point: ``auditnb <command> --config run.toml``.

Exit codes: 0 success, 1 runtime error, 2 usage or config error. Failures
print a single ``auditnb: error[<category>]: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import graph, text
from .classifier import ModelError, NaiveBayesModel, classify_all, fit
from .config import ConfigError, RunConfig, load_config, parse_override
from .dataset import (
    AttributeSchema,
    DatasetError,
    LabeledDataset,
    SchemaError,
    SplitSpec,
    load_csv,
    load_jsonl,
    split,
    to_csv,
)
from .metrics import (
    MetricError,
    binary_metrics,
    confusion,
    ks_multivariate,
    macro_metrics,
    roc_auc_ovr,
    variability,
)
from .sampling import (
    EvidenceSet,
    SamplingError,
    build_distribution,
    hybrid_sample,
    item_based_group_search,
    item_based_sample,
    user_based_sample,
)

SCHEMA_VERSION = "1.0"
HIST_BINS = 20

log = logging.getLogger("auditnb")


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output helpers


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return None if math.isnan(value) or math.isinf(value) else value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_report(path: Path, kind: str, body: dict, started: float) -> None:
    """JSON report; everything except the ``timestamp`` block is a function of config and seed."""
    doc = {"schema_version": SCHEMA_VERSION, "report": kind, **body}
    doc["timestamp"] = {
        "utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "elapsed_seconds": round(time.perf_counter() - started, 6),
    }
    path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _out_dir(cfg: RunConfig) -> Path:
    out = cfg.path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ------------------------------------------------------------------ populations


def _tabular_schema(cfg: RunConfig) -> AttributeSchema:
    if not cfg.continuous and not cfg.count:
        raise ConfigError("tabular mode needs 'continuous' and/or 'count' column lists")
    try:
        return AttributeSchema.build(cfg.continuous, cfg.count, cfg.label_column, cfg.id_column)
    except SchemaError as exc:
        raise ConfigError(str(exc)) from None


def _require(cfg: RunConfig, key: str) -> Path:
    value = getattr(cfg, key)
    if value is None:
        raise ConfigError(f"config key {key!r} is required in {cfg.mode} mode")
    return cfg.path(value)


def _load_corpus(cfg: RunConfig) -> text.Corpus:
    data = _require(cfg, "data")
    if cfg.labels_file is not None:
        return text.load_corpus_lines(data, cfg.path(cfg.labels_file))
    return text.load_corpus_csv(data, cfg.label_column, cfg.text_column)


def _dictionary(cfg: RunConfig, corpus: text.Corpus, model: NaiveBayesModel | None) -> text.KeywordDictionary:
    if model is not None:
        return text.KeywordDictionary(model.schema.names)
    stop = None
    if cfg.stopwords is not None:
        stop = text.read_stopwords(cfg.path(cfg.stopwords).read_text(encoding="utf-8").splitlines())
    return text.build_dictionary(corpus.messages, stop, cfg.min_count)


def load_population(cfg: RunConfig, model: NaiveBayesModel | None = None) -> LabeledDataset:
    if cfg.mode == "tabular":
        path = _require(cfg, "data")
        schema = model.schema if model is not None else _tabular_schema(cfg)
        loader = load_jsonl if path.suffix in (".jsonl", ".ndjson") else load_csv
        return loader(path, schema)
    if cfg.mode == "text":
        corpus = _load_corpus(cfg)
        tc = text.vectorize(corpus.messages, _dictionary(cfg, corpus, model))
        return text.to_dataset(tc, corpus.labels)
    g = graph.load_edges(_require(cfg, "edges"))
    binning = graph.ClassBinning.load(cfg.path(cfg.binning)) if cfg.binning else graph.ClassBinning.table3()
    feats = graph.vertex_features(g)
    return graph.features_dataset(feats, graph.bin_vertices(feats, binning))


def _load_model(path: Path) -> NaiveBayesModel:
    try:
        return NaiveBayesModel.load(path)
    except FileNotFoundError:
        raise UsageError(f"model file not found: {path}") from None
    except (KeyError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None


# ------------------------------------------------------------------ commands


def _classification_section(model, data: LabeledDataset, positive: str | None):
    table = classify_all(model, data)
    cm = confusion(table, data.labels)
    section = {
        "records": len(data),
        "confusion": cm.to_dict(),
        "per_class": {lab: binary_metrics(cm, lab).to_dict() for lab in cm.labels},
        "macro": macro_metrics(cm).to_dict(),
    }
    curves = {}
    try:
        curves, macro_auc = roc_auc_ovr(table, data.labels)
        section["auc_macro_ovr"] = macro_auc
        section["auc_per_class"] = {lab: c.auc for lab, c in curves.items()}
    except MetricError as exc:
        section["auc_macro_ovr"] = None
        section["auc_note"] = str(exc)
    if positive is not None:
        if positive not in model.labels:
            raise ConfigError(f"positive class {positive!r} is not a model label")
        section["positive"] = positive
        section["binary"] = binary_metrics(cm, positive).to_dict()
        if positive in curves:
            section["auc"] = curves[positive].auc
    return table, section, curves


def _write_roc(path: Path, curves) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "fpr", "tpr"])
        for lab, curve in curves.items():
            for fpr, tpr in curve.points():
                w.writerow([lab, repr(fpr), repr(tpr)])


def cmd_train(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    cfg.validate()
    data = load_population(cfg)
    train, test = split(data, SplitSpec(cfg.train_fraction, cfg.seed))
    model = fit(train, cfg.alpha)
    out = _out_dir(cfg)
    model.save(out / "model.json")
    _, section, curves = _classification_section(model, test, cfg.positive)
    _write_roc(out / "roc.csv", curves)
    body = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "split": {"train_fraction": cfg.train_fraction, "train": len(train), "test": len(test)},
        "model": {
            "labels": list(model.labels),
            "priors": model.priors.tolist(),
            "attributes": [list(c) for c in model.schema.columns],
            "alpha": model.alpha,
        },
        "test": section,
    }
    write_report(out / "train_report.json", "train", body, started)
    return 0


def _model_path(cfg: RunConfig, args) -> Path:
    return Path(args.model) if args.model else cfg.path(cfg.out) / "model.json"


def cmd_classify(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    cfg.validate()
    model = _load_model(_model_path(cfg, args))
    data = load_population(cfg, model)
    table, section, curves = _classification_section(model, data, cfg.positive)
    out = _out_dir(cfg)
    with open(out / "posteriors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", "predicted"] + [f"p_{lab}" for lab in table.labels])
        for i in range(len(table)):
            w.writerow([data.ids[i], data.labels[i], table.predicted[i]] + [repr(float(p)) for p in table.probs[i]])
    _write_roc(out / "roc_population.csv", curves)
    write_report(out / "classify_report.json", "classify", {"mode": cfg.mode, "population": section}, started)
    return 0


def _members(cfg: RunConfig, data: LabeledDataset, table, label: str):
    if cfg.membership == "predicted":
        return [i for i, p in enumerate(table.predicted) if p == label]
    return None


def cmd_sample(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    cfg.validate(strategy_needed=True)
    model = _load_model(_model_path(cfg, args))
    data = load_population(cfg, model)
    table = classify_all(model, data)
    classes = cfg.classes or [lab for lab in model.labels if lab in set(data.labels)]
    evidence, groups = [], []
    for label in classes:
        if label not in model.labels:
            raise ConfigError(f"class {label!r} is not a model label")
        dist = build_distribution(table, data, label, _members(cfg, data, table, label))
        if cfg.strategy == "user":
            ev = user_based_sample(dist, cfg.bounds())
        elif cfg.strategy == "item":
            ev = item_based_sample(dist, cfg.sigma1)
            if cfg.sigma2 is not None:
                groups += [g for g in item_based_group_search(dist, cfg.thresholds(), cfg.max_k) if g.params["level"] > 1]
        else:
            ev = hybrid_sample(dist, cfg.bounds(), cfg.thresholds())
        evidence.append(ev)
    out = _out_dir(cfg)
    body = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "strategy": cfg.strategy,
        "membership": cfg.membership,
        "population": len(data),
        "evidence": [ev.to_dict() for ev in evidence],
        "groups": [g.to_dict() for g in groups],
        "total_drawn": len({i for ev in evidence for i in ev.indices}),
        "empty_classes": [ev.label for ev in evidence if ev.empty],
    }
    write_report(out / "evidence.json", "evidence", body, started)
    return 0


def _evidence_indices(paths: list[Path], data: LabeledDataset) -> list[int]:
    chosen = set()
    for p in paths:
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise UsageError(f"evidence file not found: {p}") from None
        for d in doc.get("evidence", []):
            ev = EvidenceSet.from_dict(d)
            for i, rid in zip(ev.indices, ev.ids or [None] * len(ev.indices)):
                if not 0 <= i < len(data) or (rid is not None and data.ids[i] != rid):
                    raise DatasetError(f"evidence record {i} does not match the population")
                chosen.add(i)
    return sorted(chosen)


def _histograms(path: Path, data: LabeledDataset, idx: list[int]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["attribute", "bin_left", "bin_right", "population", "evidence"])
        for j, name in enumerate(data.schema.names):
            col = data.values[:, j]
            edges = np.histogram_bin_edges(col, bins=HIST_BINS)
            pop, _ = np.histogram(col, edges)
            evi, _ = np.histogram(col[idx], edges)
            for k in range(HIST_BINS):
                w.writerow([name, repr(float(edges[k])), repr(float(edges[k + 1])), int(pop[k]), int(evi[k])])


def _variability_table(values: np.ndarray, names) -> dict:
    out = {}
    for j, name in enumerate(names):
        try:
            out[name] = variability(values[:, j]).to_dict()
        except MetricError as exc:
            out[name] = {"error": str(exc)}
    return out


def cmd_evaluate(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    cfg.validate()
    model = _load_model(Path(args.model)) if args.model else None
    if model is None and cfg.mode == "text":
        model_path = cfg.path(cfg.out) / "model.json"
        model = _load_model(model_path) if model_path.exists() else None
    data = load_population(cfg, model)
    paths = [Path(p) for p in args.evidence] if args.evidence else [cfg.path(cfg.out) / "evidence.json"]
    idx = _evidence_indices(paths, data)
    if not idx:
        raise SamplingError("evidence is empty; nothing to evaluate")
    names = data.schema.names
    ks = ks_multivariate(data.values, data.values[idx], names)
    out = _out_dir(cfg)
    _histograms(out / "histograms.csv", data, idx)
    body = {
        "mode": cfg.mode,
        "population": len(data),
        "evidence": len(idx),
        "ks": ks.to_dict(),
        "variability": {
            "population": _variability_table(data.values, names),
            "evidence": _variability_table(data.values[idx], names),
        },
    }
    write_report(out / "evaluate_report.json", "evaluate", body, started)
    return 0


def cmd_graph_features(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    edges = Path(args.edges) if args.edges else _require(cfg, "edges")
    binning_path = Path(args.binning) if args.binning else cfg.path(cfg.binning)
    binning = graph.ClassBinning.load(binning_path) if binning_path else graph.ClassBinning.table3()
    g = graph.load_edges(edges)
    feats = graph.vertex_features(g)
    result = graph.bin_vertices(feats, binning)
    out = _out_dir(cfg)
    graph.write_features_csv(feats, result, out / "features.csv")
    body = {
        "vertices": len(g),
        "edge_multiplicity": g.total_multiplicity(),
        "degree_sum": sum(f.degree for f in feats.values()),
        "binning": binning.to_dict(),
        "class_counts": result.counts(),
        "out_of_binning": list(result.out_of_binning),
    }
    write_report(out / "graph_report.json", "graph-features", body, started)
    return 0


def cmd_text_features(cfg: RunConfig, args) -> int:
    started = time.perf_counter()
    corpus = _load_corpus(cfg)
    dictionary = _dictionary(cfg, corpus, None)
    tc = text.vectorize(corpus.messages, dictionary)
    out = _out_dir(cfg)
    dictionary.save(out / "dictionary.json")
    (out / "counts.csv").write_text(to_csv(text.to_dataset(tc, corpus.labels)), encoding="utf-8")
    by_class = {}
    for lab in sorted(set(corpus.labels)):
        rows = [i for i, x in enumerate(corpus.labels) if x == lab]
        by_class[lab] = [[t, n] for t, n in text.top_keywords(tc, cfg.top_k, rows)]
    body = {
        "messages": len(corpus.messages),
        "dictionary_size": len(dictionary),
        "top_k": cfg.top_k,
        "top_keywords": [[t, n] for t, n in text.top_keywords(tc, cfg.top_k)],
        "top_keywords_by_class": by_class,
    }
    write_report(out / "keywords_report.json", "text-features", body, started)
    return 0


COMMANDS = {
    "train": cmd_train,
    "classify": cmd_classify,
    "sample": cmd_sample,
    "evaluate": cmd_evaluate,
    "graph-features": cmd_graph_features,
    "text-features": cmd_text_features,
}

# CLI flag -> config key, for flags that override the config file
_FLAG_KEYS = ("seed", "out", "data", "mode", "strategy", "confidence", "lower", "upper",
              "sigma1", "sigma2", "sigma3", "max_k", "positive", "train_fraction")
_PATH_KEYS = ("out", "data")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="auditnb", description="Naive Bayes audit-evidence sampling")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat TOML run configuration")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--data")
        s.add_argument("--mode", choices=("tabular", "text", "graph"))
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
        if name in ("train", "classify", "evaluate"):
            s.add_argument("--positive")
        if name == "train":
            s.add_argument("--train-fraction", type=float)
        if name in ("classify", "sample", "evaluate"):
            s.add_argument("--model")
        if name == "sample":
            s.add_argument("--strategy", choices=("user", "item", "hybrid"))
            s.add_argument("--confidence", type=float)
            s.add_argument("--lower", type=float)
            s.add_argument("--upper", type=float)
            s.add_argument("--sigma1", type=float)
            s.add_argument("--sigma2", type=float)
            s.add_argument("--sigma3", type=float)
            s.add_argument("--max-k", type=int)
        if name == "evaluate":
            s.add_argument("--evidence", action="append", help="evidence JSON (repeatable)")
        if name == "graph-features":
            s.add_argument("--edges")
            s.add_argument("--binning", help="JSON class binning (default: five-class degree/clustering table)")
    return p


def _overrides(args) -> dict:
    over = {}
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in _PATH_KEYS:
            value = str(Path(value).resolve())
        over[key] = value
    for item in args.set:
        k, v = parse_override(item)
        over[k] = v
    return over


def _category(exc: Exception) -> tuple[str, int]:
    if isinstance(exc, UsageError):
        return "usage", 2
    if isinstance(exc, ConfigError):
        return "config", 2
    if isinstance(exc, SchemaError):
        return "schema", 2
    if isinstance(exc, DatasetError):
        return "data", 1
    if isinstance(exc, ModelError):
        return "model", 1
    if isinstance(exc, (SamplingError, MetricError)):
        return "sampling", 1
    if isinstance(exc, graph.GraphError):
        return "graph", 1
    if isinstance(exc, OSError):
        return "io", 1
    return "runtime", 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="auditnb: %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        over = _overrides(args)
        if args.command in ("graph-features", "text-features"):
            over.setdefault("seed", 0)  # no randomness in these commands
        elif args.config is None and "seed" not in over:
            raise ConfigError("seed is mandatory (--seed or config file)")
        cfg = load_config(args.config, over)
        return COMMANDS[args.command](cfg, args)
    except Exception as exc:  # noqa: BLE001 - every failure maps to one line and an exit code
        category, code = _category(exc)
        message = str(exc).replace("\n", " ")
        print(f"auditnb: error[{category}]: {message}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
