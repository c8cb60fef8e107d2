"""Training of multi-view evidential networks through a fusion operator."""

import configparser
import csv
import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .fusion import METHODS, fuse_arrays
from .losses import annealing_coef, consistency_kernel, loss_ace, loss_kl
from .network import PARAM_NAMES, EvidentialNetwork, opinions_from_evidence, view_evidence

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


def read_key_values(path_or_text):
    """Parse a plain ``key = value`` file (``#`` comments) into a dict of strings."""
    try:
        with open(path_or_text) as fh:
            text = fh.read()
    except (OSError, ValueError):
        text = path_or_text
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ValueError(f"cannot parse config: {exc}") from None
    return dict(parser["config"])


def _parse_bool(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    weight_decay: float = 1e-5
    annealing_step: int = 10
    gamma: float = 0.5
    beta: float = 1.0
    lam: float = 1.0
    epochs: int = 50
    batch_size: int = 64
    hidden: int = 64
    seed: int = 0
    fusion: str = "dbf"
    optimizer: str = "gd"
    detach_fusion: bool = False

    def __post_init__(self):
        if self.annealing_step < 1:
            raise ValueError("annealing_step must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.fusion not in METHODS:
            raise ValueError(f"fusion must be one of {METHODS}, got {self.fusion!r}")
        if self.optimizer not in ("gd", "adam"):
            raise ValueError("optimizer must be 'gd' or 'adam'")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.epochs < 0 or self.batch_size < 1 or self.hidden < 1:
            raise ValueError("epochs, batch_size and hidden must be positive")

    @classmethod
    def from_mapping(cls, mapping, strict=True):
        """Build from string values; unknown keys raise unless ``strict=False``."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(mapping) - set(fields)
        if strict and unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for name, value in mapping.items():
            if name not in fields:
                continue
            kind = type(getattr(cls, name))
            kwargs[name] = _parse_bool(value) if kind is bool else kind(value)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        return cls.from_mapping(read_key_values(path))

    def to_text(self):
        return "".join(f"{k} = {v}\n" for k, v in dataclasses.asdict(self).items())


@dataclass(frozen=True)
class LossBreakdown:
    l_ace_fused: float
    l_kl_fused: float
    l_ace_per_view: tuple
    l_kl_per_view: tuple
    l_con: float
    sigma_t: float
    total: float

    def row(self):
        out = {"l_ace_fused": self.l_ace_fused, "l_kl_fused": self.l_kl_fused}
        for v, value in enumerate(self.l_ace_per_view):
            out[f"l_ace_view{v}"] = value
        for v, value in enumerate(self.l_kl_per_view):
            out[f"l_kl_view{v}"] = value
        out.update(l_con=self.l_con, sigma_t=self.sigma_t, total=self.total)
        return out

    @staticmethod
    def weighted_mean(items, weights):
        w = np.asarray(weights, dtype=np.float64) / np.sum(weights)

        def avg(get):
            return float(sum(wi * get(b) for wi, b in zip(w, items)))

        n_views = len(items[0].l_ace_per_view)
        return LossBreakdown(
            avg(lambda b: b.l_ace_fused),
            avg(lambda b: b.l_kl_fused),
            tuple(avg(lambda b, v=v: b.l_ace_per_view[v]) for v in range(n_views)),
            tuple(avg(lambda b, v=v: b.l_kl_per_view[v]) for v in range(n_views)),
            avg(lambda b: b.l_con),
            items[0].sigma_t,
            avg(lambda b: b.total),
        )


def forward_loss(params, features, labels, method="dbf", beta=1.0, gamma=0.5,
                 sigma_t=1.0, lam=1.0, detach_fusion=False):
    """Total loss averaged over the batch.

    ``params`` is a list of per-view dicts of arrays or tensors.  Returns the
    loss (a tensor when any parameter is one) and its :class:`LossBreakdown`.
    With ``detach_fusion`` the fused term sees the view opinions as constants.
    """
    labels = np.asarray(labels, dtype=np.float64)
    k = labels.shape[1]
    evidence = ad.stack([view_evidence(p, np.asarray(x, dtype=np.float64))
                         for p, x in zip(params, features)])
    b, u, a = opinions_from_evidence(evidence, k)
    if detach_fusion:
        fb, fu = fuse_arrays(method, ad.value_of(b), ad.value_of(u), a, lam)
    else:
        fb, fu = fuse_arrays(method, b, u, a, lam)
    fused_alpha = fb * k / fu + 1.0
    view_alpha = evidence + 1.0

    ace_fused = loss_ace(fused_alpha, labels)
    kl_fused = loss_kl(fused_alpha, labels)
    ace_views = loss_ace(view_alpha, labels)
    kl_views = loss_kl(view_alpha, labels)
    con = consistency_kernel(b, u, a)

    per_sample = (ace_fused + sigma_t * kl_fused
                  + beta * (ace_views + sigma_t * kl_views).sum(axis=0)
                  + gamma * con)
    total = per_sample.mean()

    def mean(x, axis=None):
        return np.asarray(ad.value_of(x)).mean(axis=axis)

    breakdown = LossBreakdown(
        float(mean(ace_fused)), float(mean(kl_fused)),
        tuple(float(x) for x in mean(ace_views, axis=1)),
        tuple(float(x) for x in mean(kl_views, axis=1)),
        float(mean(con)), float(sigma_t), float(ad.value_of(total)))
    return total, breakdown


def total_loss(batch, network, method="dbf", beta=1.0, gamma=0.5, sigma_t=1.0, lam=1.0):
    """Loss breakdown of ``network`` on ``batch`` (no tape recorded)."""
    _, breakdown = forward_loss(network.params, batch.features, batch.labels,
                                method, beta, gamma, sigma_t, lam)
    return breakdown


def loss_and_gradients(network, batch, method="dbf", beta=1.0, gamma=0.5, sigma_t=1.0,
                       lam=1.0, detach_fusion=False):
    """Loss breakdown plus gradients, in the layout of ``network.params``."""
    leaves = [{name: ad.parameter(p[name]) for name in PARAM_NAMES} for p in network.params]
    loss, breakdown = forward_loss(leaves, batch.features, batch.labels, method, beta,
                                   gamma, sigma_t, lam, detach_fusion)
    flat = [leaf[name] for leaf in leaves for name in PARAM_NAMES]
    grads = iter(ad.gradients(loss, flat))
    return breakdown, [{name: next(grads) for name in PARAM_NAMES} for _ in leaves]


class _Adam:
    def __init__(self, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = self.v = None
        self.t = 0

    def step(self, grads):
        if self.m is None:
            self.m = [np.zeros_like(g) for g in grads]
            self.v = [np.zeros_like(g) for g in grads]
        self.t += 1
        steps = []
        for i, g in enumerate(grads):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g * g
            m_hat = self.m[i] / (1 - self.b1 ** self.t)
            v_hat = self.v[i] / (1 - self.b2 ** self.t)
            steps.append(self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return steps


def train(dataset, config, network=None):
    """Mini-batch descent on the total loss.

    Returns the trained :class:`EvidentialNetwork` and one
    :class:`LossBreakdown` per epoch (sample-weighted mean over batches).
    Weight decay is decoupled: ``theta <- theta - lr * (step + wd * theta)``.
    """
    rng = np.random.default_rng(config.seed)
    if network is None:
        network = EvidentialNetwork.initialize(dataset.dims, dataset.n_classes,
                                               config.hidden, config.seed)
    if network.dims != dataset.dims or network.n_classes != dataset.n_classes:
        raise ValueError(f"network expects dims {network.dims} and {network.n_classes} classes, "
                         f"data has {dataset.dims} and {dataset.n_classes}")
    flat = [np.array(p[name]) for p in network.params for name in PARAM_NAMES]
    adam = _Adam(config.learning_rate) if config.optimizer == "adam" else None
    n = dataset.n_samples
    history = []

    def unflatten(arrays):
        it = iter(arrays)
        return [{name: next(it) for name in PARAM_NAMES} for _ in range(network.n_views)]

    for epoch in range(config.epochs):
        sigma_t = annealing_coef(epoch, config.annealing_step)
        order = rng.permutation(n)
        parts, sizes = [], []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            if not all(np.isfinite(x).all() for x in flat):
                raise TrainingError(f"non-finite parameters at epoch {epoch}, batch starting {start}")
            leaves = [ad.parameter(x) for x in flat]
            loss, breakdown = forward_loss(
                unflatten(leaves), [x[idx] for x in dataset.features], dataset.labels[idx],
                config.fusion, config.beta, config.gamma, sigma_t, config.lam,
                config.detach_fusion)
            if not np.isfinite(breakdown.total):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch starting {start}: {breakdown}")
            grads = ad.gradients(loss, leaves)
            steps = adam.step(grads) if adam else [config.learning_rate * g for g in grads]
            for x, step in zip(flat, steps):
                x -= step + config.learning_rate * config.weight_decay * x
            parts.append(breakdown)
            sizes.append(idx.size)
        history.append(LossBreakdown.weighted_mean(parts, sizes))
        log.debug("epoch %d: %s", epoch, history[-1])
    return EvidentialNetwork(unflatten(flat), network.n_classes), history


def write_history_csv(history, path, extra=None):
    """One row per epoch; ``extra`` columns (e.g. method) are prepended."""
    extra = extra or {}
    rows = [{**extra, "epoch": i, **h.row()} for i, h in enumerate(history)]
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
