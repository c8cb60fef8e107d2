"""Conflict-detection experiments: train, inject conflict, evaluate, report."""

import csv
import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import (SyntheticSpec, generate_synthetic, inject_conflict, load_feature_csv,
                   stratified_split)
from .fusion import METHODS
from .metrics import accuracy, roc_auc
from .train import TrainConfig, read_key_values, train


METRICS = ("clean_accuracy", "conflict_accuracy", "clean_u_mean", "clean_u_std",
           "conflict_u_mean", "conflict_u_std", "auc")
HIST_BINS = 30


@dataclass
class Evaluation:
    metrics: dict
    clean_u: np.ndarray
    conflict_u: np.ndarray


def evaluate(network, clean, conflict, method="dbf", lam=1.0):
    """Accuracy and fused uncertainty on a clean set and its conflicted copy.

    The AUC scores fused uncertainty as a detector of conflict flags over the
    union of both sets.
    """
    _, clean_u = network.fuse(clean.features, method, lam)
    _, conflict_u = network.fuse(conflict.features, method, lam)
    scores = np.concatenate([clean_u, conflict_u])
    flags = np.concatenate([clean.conflict_flags, conflict.conflict_flags])
    metrics = {
        "clean_accuracy": accuracy(network.predict(clean.features, method, lam), clean.class_ids),
        "conflict_accuracy": accuracy(network.predict(conflict.features, method, lam),
                                      conflict.class_ids),
        "clean_u_mean": float(clean_u.mean()),
        "clean_u_std": float(clean_u.std()),
        "conflict_u_mean": float(conflict_u.mean()),
        "conflict_u_std": float(conflict_u.std()),
        "auc": roc_auc(scores, flags),
    }
    return Evaluation(metrics, clean_u, conflict_u)


# ---------------------------------------------------------------------------
# configuration


def _floats(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def _ints(text):
    out = []
    for part in str(text).replace(",", " ").split():
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one ``bench run`` needs.

    Data come from CSV files when ``features`` is set, otherwise from the
    synthetic generator.
    """

    methods: tuple = ("gbaf", "dbf")
    seeds: tuple = (0, 1, 2, 3, 4)
    conflict_rate: float = 1.0
    lambdas: tuple = ()
    n_classes: int = 4
    n_views: int = 3
    dim: int = 8
    separation: float = 6.0
    noise: float = 1.0
    n_samples: int = 2000
    test_fraction: float = 0.2
    features: tuple = ()
    labels: str = ""
    workers: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be drawn from {METHODS}, got {list(self.methods)}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if not 0.0 < self.conflict_rate <= 1.0:
            raise ValueError("conflict_rate must lie in (0, 1]")
        if self.features and not self.labels:
            raise ValueError("features given without labels")

    @classmethod
    def from_mapping(cls, mapping):
        mapping = dict(mapping)
        own, train_keys = {}, {}
        train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
        parsers = {
            "methods": lambda t: tuple(str(t).replace(",", " ").split()),
            "seeds": lambda t: tuple(_ints(t)),
            "lambdas": lambda t: tuple(_floats(t)),
            "features": lambda t: tuple(str(t).replace(",", " ").split()),
            "conflict_rate": float, "separation": float, "noise": float,
            "test_fraction": float, "labels": str, "n_classes": int, "n_views": int,
            "dim": int, "n_samples": int, "workers": int,
        }
        for key, value in mapping.items():
            if key in parsers:
                own[key] = parsers[key](value)
            elif key in train_fields:
                train_keys[key] = value
            else:
                raise ValueError(f"unknown config key {key!r}")
        train_keys.pop("fusion", None)
        return cls(train=TrainConfig.from_mapping(train_keys), **own)

    @classmethod
    def from_file(cls, path):
        return cls.from_mapping(read_key_values(path))

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["train"] = dataclasses.asdict(self.train)
        return out

    def synthetic_spec(self, seed):
        return SyntheticSpec.uniform(self.n_classes, self.n_views, self.dim, self.separation,
                                     self.noise, self.n_samples, seed, self.test_fraction)


def load_split(config, seed):
    """Train and test batches for one seed."""
    if not config.features:
        return generate_synthetic(config.synthetic_spec(seed))
    raw = load_feature_csv(config.features, config.labels)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = stratified_split(raw.class_ids, config.test_fraction, rng)
    # reload so standardisation uses training rows only
    full = load_feature_csv(config.features, config.labels, train_index=train_idx)
    return full.subset(train_idx), full.subset(test_idx)


# ---------------------------------------------------------------------------
# running


def _run_seed(config, seed):
    """Train every method on one seed's data and evaluate it."""
    train_set, test_set = load_split(config, seed)
    conflict_set = inject_conflict(test_set, config.conflict_rate, seed=seed)
    results = {}
    for method in config.methods:
        tc = dataclasses.replace(config.train, fusion=method, seed=seed)
        network, history = train(train_set, tc)
        ev = evaluate(network, test_set, conflict_set, method, tc.lam)
        sweep = {}
        if config.lambdas and method == _sweep_method(config):
            for lam in config.lambdas:
                sweep[lam] = evaluate(network, test_set, conflict_set, "dbf", lam).metrics
        results[method] = {"eval": ev, "history": history, "sweep": sweep}
    return seed, results


def _sweep_method(config):
    return "dbf" if "dbf" in config.methods else config.methods[0]


def _aggregate(values):
    values = np.asarray(values, dtype=np.float64)
    return {"mean": float(values.mean()), "std": float(values.std()), "per_seed": values.tolist()}


@dataclass
class ExperimentReport:
    config: dict
    methods: dict
    lambda_sweep: dict
    wall_time: float
    uncertainties: dict = field(default_factory=dict, repr=False)
    histories: dict = field(default_factory=dict, repr=False)

    def mean(self, method, metric):
        return self.methods[method][metric]["mean"]

    def to_dict(self):
        return {"config": self.config, "methods": self.methods,
                "lambda_sweep": self.lambda_sweep, "wall_time": self.wall_time}

    def write(self, out_dir):
        """``report.json``, ``report.csv``, histograms and loss histories."""
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
        with open(os.path.join(out_dir, "report.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "metric", "mean", "std"])
            for method, stats in self.methods.items():
                for metric in METRICS:
                    writer.writerow([method, metric, stats[metric]["mean"], stats[metric]["std"]])
        for method, (clean_u, conflict_u) in self.uncertainties.items():
            write_histogram_svg(clean_u, conflict_u, method,
                                os.path.join(out_dir, f"uncertainty_{method}.svg"))
        for seed, per_method in self.histories.items():
            rows = [{"method": method, "epoch": epoch, **h.row()}
                    for method, history in per_method.items()
                    for epoch, h in enumerate(history)]
            with open(os.path.join(out_dir, f"loss_history_{seed}.csv"), "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)


def run_experiment(config, out_dir=None):
    """Train each method on every seed, evaluate, aggregate and optionally write."""
    if isinstance(config, str):
        config = ExperimentConfig.from_file(config)
    elif isinstance(config, dict):
        config = ExperimentConfig.from_mapping(config)
    start = time.perf_counter()
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            outcomes = list(pool.map(_run_seed, [config] * len(config.seeds), config.seeds))
    else:
        outcomes = [_run_seed(config, seed) for seed in config.seeds]
    outcomes.sort(key=lambda item: config.seeds.index(item[0]))

    methods, uncertainties, histories = {}, {}, {}
    for method in config.methods:
        evals = [res[method]["eval"] for _, res in outcomes]
        methods[method] = {m: _aggregate([e.metrics[m] for e in evals]) for m in METRICS}
        uncertainties[method] = (np.concatenate([e.clean_u for e in evals]),
                                 np.concatenate([e.conflict_u for e in evals]))
    for seed, res in outcomes:
        histories[seed] = {m: res[m]["history"] for m in config.methods}

    lambda_sweep = {}
    if config.lambdas:
        model = _sweep_method(config)
        lambda_sweep = {"model": model, "lambdas": list(config.lambdas)}
        for metric in ("conflict_u_mean", "clean_u_mean", "auc"):
            lambda_sweep[metric] = [
                float(np.mean([res[model]["sweep"][lam][metric] for _, res in outcomes]))
                for lam in config.lambdas]

    report = ExperimentReport(config.to_dict(), methods, lambda_sweep,
                              time.perf_counter() - start, uncertainties, histories)
    if out_dir is not None:
        report.write(out_dir)
    return report


def write_histogram_svg(clean_u, conflict_u, title, path):
    """Overlaid 30-bin histograms of clean and conflicting uncertainties."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    bins = np.linspace(0.0, 1.0, HIST_BINS + 1)
    with matplotlib.rc_context({"svg.hashsalt": "evfusion"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.hist(clean_u, bins=bins, alpha=0.5, label="clean")
        ax.hist(conflict_u, bins=bins, alpha=0.5, label="conflict")
        ax.set_xlim(0, 1)
        ax.set_xlabel("fused uncertainty")
        ax.set_ylabel("samples")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
