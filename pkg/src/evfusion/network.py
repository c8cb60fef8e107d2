"""Per-view two-layer evidential classifiers."""

import json

import numpy as np

from . import autodiff as ad
from .fusion import fuse_arrays

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(dims, n_classes, hidden, rng):
    """Glorot-uniform weights and zero biases for every view."""
    params = []
    for d in dims:
        lim1 = np.sqrt(6.0 / (d + hidden))
        lim2 = np.sqrt(6.0 / (hidden + n_classes))
        params.append({
            "W1": rng.uniform(-lim1, lim1, size=(d, hidden)),
            "b1": np.zeros(hidden),
            "W2": rng.uniform(-lim2, lim2, size=(hidden, n_classes)),
            "b2": np.zeros(n_classes),
        })
    return params


def view_evidence(p, x):
    """Evidence of one view: capped_exp(relu(x W1 + b1) W2 + b2).

    ``p`` may hold arrays or tensors.
    """
    hidden = ad.relu(x @ p["W1"] + p["b1"])
    return ad.capped_exp(hidden @ p["W2"] + p["b2"])


def opinions_from_evidence(evidence, n_classes):
    """Stacked evidence ``(V, N, K)`` -> beliefs, uncertainties, base rates."""
    s = evidence.sum(axis=-1, keepdims=True) + n_classes
    b = evidence / s
    u = n_classes / s
    a = np.full(ad.value_of(b).shape, 1.0 / n_classes)
    return b, u, a


class EvidentialNetwork:
    """One two-layer network per view, mapping features to class evidence."""

    def __init__(self, params, n_classes):
        self.params = [{name: np.array(p[name], dtype=np.float64) for name in PARAM_NAMES}
                       for p in params]
        for p in self.params:
            for arr in p.values():
                arr.setflags(write=False)
        self.n_classes = int(n_classes)

    @classmethod
    def initialize(cls, dims, n_classes, hidden=64, seed=0):
        return cls(init_params(dims, n_classes, hidden, np.random.default_rng(seed)), n_classes)

    @property
    def n_views(self):
        return len(self.params)

    @property
    def hidden(self):
        return self.params[0]["W1"].shape[1]

    @property
    def dims(self):
        return [p["W1"].shape[0] for p in self.params]

    def evidence(self, features):
        """Stacked per-view evidence, shape ``(V, N, K)``."""
        self._check(features)
        return np.stack([view_evidence(p, np.asarray(x, dtype=np.float64))
                         for p, x in zip(self.params, features)])

    def view_opinions(self, features):
        return opinions_from_evidence(self.evidence(features), self.n_classes)

    def fuse(self, features, method="dbf", lam=1.0):
        """Fused beliefs ``(N, K)`` and uncertainties ``(N,)``."""
        b, u, a = self.view_opinions(features)
        fb, fu = fuse_arrays(method, b, u, a, lam)
        return fb, fu[..., 0]

    def predict(self, features, method="dbf", lam=1.0):
        """Class ids from the fused projected probabilities."""
        fb, fu = self.fuse(features, method, lam)
        return np.argmax(fb + fu[:, None] / self.n_classes, axis=1)

    def _check(self, features):
        if len(features) != self.n_views:
            raise ValueError(f"expected {self.n_views} views, got {len(features)}")
        for v, (x, d) in enumerate(zip(features, self.dims)):
            if np.ndim(x) != 2 or np.shape(x)[1] != d:
                raise ValueError(f"view {v}: expected (N, {d}) features, got {np.shape(x)}")

    def to_dict(self):
        return {
            "format": "evfusion-network",
            "n_classes": self.n_classes,
            "views": [
                {name: {"shape": list(p[name].shape), "data": p[name].ravel().tolist()}
                 for name in PARAM_NAMES}
                for p in self.params
            ],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "evfusion-network":
            raise ValueError("not an evfusion network dump")
        params = [
            {name: np.array(view[name]["data"], dtype=np.float64).reshape(view[name]["shape"])
             for name in PARAM_NAMES}
            for view in data["views"]
        ]
        return cls(params, data["n_classes"])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
