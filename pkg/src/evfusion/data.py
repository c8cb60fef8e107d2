"""Multimodal datasets: synthetic generation, conflict injection, CSV I/O."""

import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MultimodalBatch:
    """Per-view feature matrices with shared one-hot labels and conflict flags."""

    features: tuple
    labels: np.ndarray
    conflict_flags: np.ndarray = None

    def __post_init__(self):
        features = tuple(np.asarray(x, dtype=np.float64) for x in self.features)
        labels = np.asarray(self.labels, dtype=np.float64)
        if not features:
            raise DataError("a batch needs at least one view")
        n = labels.shape[0]
        for v, x in enumerate(features):
            if x.ndim != 2 or x.shape[0] != n:
                raise DataError(f"view {v} has shape {x.shape}, expected ({n}, d)")
        if labels.ndim != 2 or not (np.all((labels == 0) | (labels == 1))
                                    and np.all(labels.sum(axis=1) == 1)):
            raise DataError("labels must be one-hot rows")
        flags = (np.zeros(n, dtype=bool) if self.conflict_flags is None
                 else np.asarray(self.conflict_flags, dtype=bool))
        if flags.shape != (n,):
            raise DataError("conflict flags must have one entry per sample")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "conflict_flags", flags)

    @property
    def n_samples(self):
        return self.labels.shape[0]

    @property
    def n_views(self):
        return len(self.features)

    @property
    def n_classes(self):
        return self.labels.shape[1]

    @property
    def class_ids(self):
        return self.labels.argmax(axis=1)

    @property
    def dims(self):
        return [x.shape[1] for x in self.features]

    def subset(self, index):
        return MultimodalBatch(tuple(x[index] for x in self.features),
                               self.labels[index], self.conflict_flags[index])

    @classmethod
    def concatenate(cls, batches):
        views = zip(*(b.features for b in batches))
        return cls(tuple(np.concatenate(v) for v in views),
                   np.concatenate([b.labels for b in batches]),
                   np.concatenate([b.conflict_flags for b in batches]))


def one_hot(class_ids, n_classes):
    class_ids = np.asarray(class_ids, dtype=int)
    out = np.zeros((class_ids.size, n_classes))
    out[np.arange(class_ids.size), class_ids] = 1.0
    return out


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 4
    n_views: int = 3
    dims: tuple = (8, 8, 8)
    separation: tuple = (6.0, 6.0, 6.0)
    noise: tuple = (1.0, 1.0, 1.0)
    n_samples: int = 2000
    seed: int = 0
    test_fraction: float = 0.2

    @classmethod
    def uniform(cls, n_classes=4, n_views=3, dim=8, separation=6.0, noise=1.0,
                n_samples=2000, seed=0, test_fraction=0.2):
        """Same dimension, separation and noise for every view."""
        return cls(n_classes, n_views, (dim,) * n_views, (float(separation),) * n_views,
                   (float(noise),) * n_views, n_samples, seed, test_fraction)

    def validate(self):
        if self.n_classes < 2:
            raise DataError("need at least 2 classes")
        if self.n_views < 1:
            raise DataError("need at least 1 view")
        for name in ("dims", "separation", "noise"):
            if len(getattr(self, name)) != self.n_views:
                raise DataError(f"{name} must have one entry per view")
        if any(s <= 0 for s in self.separation):
            raise DataError("separation must be positive")
        if any(s < 0 for s in self.noise):
            raise DataError("noise must be non-negative")
        if not 0 < self.test_fraction < 1:
            raise DataError("test fraction must lie in (0, 1)")


def class_centers(n_classes, dim, separation, rng):
    """Gaussian-drawn centres rescaled so the closest pair is ``separation`` apart."""
    while True:
        centers = rng.normal(size=(n_classes, dim))
        diff = centers[:, None] - centers[None, :]
        closest = np.sqrt((diff ** 2).sum(-1))[np.triu_indices(n_classes, 1)].min()
        if closest > 1e-6:
            return centers * (separation / closest)


def stratified_split(class_ids, test_fraction, rng):
    """Per-class shuffled split; returns sorted (train_index, test_index)."""
    train, test = [], []
    for c in np.unique(class_ids):
        idx = rng.permutation(np.flatnonzero(class_ids == c))
        n_test = int(round(test_fraction * idx.size))
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(train), np.sort(test)


def generate_synthetic(spec):
    """Class-conditional Gaussian clusters per view; returns ``(train, test)``.

    Classes are balanced.  Each view gets its own centres, so views carry
    independent evidence about the shared label.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    class_ids = rng.permutation(np.arange(spec.n_samples) % spec.n_classes)
    features = []
    for dim, sep, noise in zip(spec.dims, spec.separation, spec.noise):
        centers = class_centers(spec.n_classes, dim, sep, rng)
        features.append(centers[class_ids] + noise * rng.normal(size=(spec.n_samples, dim)))
        features[-1].setflags(write=False)
    batch = MultimodalBatch(tuple(features), one_hot(class_ids, spec.n_classes))
    train, test = stratified_split(class_ids, spec.test_fraction, rng)
    return batch.subset(train), batch.subset(test)


def inject_conflict(batch, rate, seed=0):
    """Replace one random view of a ``round(rate * N)`` sample subset.

    The replacement comes from the same view of a uniformly drawn sample of
    a different class in the original batch.  Labels stay unchanged; the
    modified samples are flagged.
    """
    if not 0.0 <= rate <= 1.0:
        raise DataError(f"conflict rate must lie in [0, 1], got {rate}")
    ids = batch.class_ids
    counts = np.bincount(ids, minlength=batch.n_classes)
    if np.any(counts == 1):
        raise DataError("every class present needs at least 2 samples")
    rng = np.random.default_rng(seed)
    n = batch.n_samples
    chosen = rng.permutation(n)[:int(round(rate * n))]
    features = [x.copy() for x in batch.features]
    flags = batch.conflict_flags.copy()
    for i in chosen:
        view = rng.integers(batch.n_views)
        donors = np.flatnonzero(ids != ids[i])
        if donors.size == 0:
            raise DataError("conflict injection needs at least two classes")
        donor = donors[rng.integers(donors.size)]
        features[view][i] = batch.features[view][donor]
        flags[i] = True
    return MultimodalBatch(tuple(features), batch.labels, flags)


# ---------------------------------------------------------------------------
# CSV


def _read_matrix(path):
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                if line_no == 1 and not rows:
                    continue  # header
                raise DataError(f"{path}: row {line_no} has a non-numeric cell") from None
            rows.append((line_no, values))
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0][1])
    for line_no, values in rows:
        if len(values) != width:
            raise DataError(f"{path}: row {line_no} has {len(values)} columns, expected {width}")
        for col, value in enumerate(values, start=1):
            if not math.isfinite(value):
                raise DataError(f"{path}: non-finite value at row {line_no}, column {col}")
    return np.array([values for _, values in rows])


def standardize(batches, reference):
    """Scale every view to zero mean / unit variance using ``reference`` statistics."""
    mean = [x.mean(axis=0) for x in reference.features]
    std = [np.where(x.std(axis=0) > 0, x.std(axis=0), 1.0) for x in reference.features]
    return [
        replace(b, features=tuple((x - m) / s for x, m, s in zip(b.features, mean, std)))
        for b in batches
    ]


def load_feature_csv(feature_paths, label_path, train_index=None):
    """Read one CSV per view plus a label CSV of integer class ids.

    Features are standardised with statistics from the rows in
    ``train_index`` (all rows when omitted).
    """
    features = [_read_matrix(p) for p in feature_paths]
    raw_labels = _read_matrix(label_path)
    if raw_labels.shape[1] != 1:
        raise DataError(f"{label_path}: expected a single label column")
    raw_labels = raw_labels[:, 0]
    n = raw_labels.size
    for path, x in zip(feature_paths, features):
        if x.shape[0] != n:
            raise DataError(f"{path} has {x.shape[0]} rows but {label_path} has {n}")
    if np.any(raw_labels != np.round(raw_labels)) or raw_labels.min() < 0:
        raise DataError(f"{label_path}: labels must be non-negative integer class ids")
    ids = raw_labels.astype(int)
    n_classes = ids.max() + 1
    missing = np.setdiff1d(np.arange(n_classes), ids)
    if missing.size:
        raise DataError(f"{label_path}: class ids {missing.tolist()} never occur")
    batch = MultimodalBatch(tuple(features), one_hot(ids, n_classes))
    reference = batch if train_index is None else batch.subset(train_index)
    return standardize([batch], reference)[0]


def write_feature_csv(batch, out_dir, prefix):
    """Write ``<prefix>_view<v>.csv`` per view and ``<prefix>_labels.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for v, x in enumerate(batch.features):
        path = os.path.join(out_dir, f"{prefix}_view{v}.csv")
        np.savetxt(path, x, delimiter=",", fmt="%.17g")
        paths.append(path)
    label_path = os.path.join(out_dir, f"{prefix}_labels.csv")
    np.savetxt(label_path, batch.class_ids, fmt="%d")
    return paths, label_path
