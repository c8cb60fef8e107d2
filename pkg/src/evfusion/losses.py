"""Evidential classification losses.

Each loss takes Dirichlet parameters ``alpha`` of shape ``(..., K)`` and
one-hot labels broadcastable to it, and returns one value per sample
(shape ``(...)``).  Inputs may be numpy arrays or autodiff tensors.
"""

import math

import numpy as np

from . import autodiff as ad
from .fusion import conflict_kernel, conflict_matrix


def _check_labels(y, k):
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != k:
        raise ValueError(f"labels have {y.shape[-1]} classes, evidence has {k}")
    if not (np.all((y == 0) | (y == 1)) and np.all(y.sum(axis=-1) == 1)):
        raise ValueError("labels must be one-hot")
    return y


def loss_ace(alpha, y):
    """Expected cross-entropy under Dir(alpha): sum_j y_j (psi(S) - psi(alpha_j))."""
    y = _check_labels(y, alpha.shape[-1])
    s = alpha.sum(axis=-1, keepdims=True)
    return (y * (ad.digamma(s) - ad.digamma(alpha))).sum(axis=-1)


def loss_kl(alpha, y):
    """KL(Dir(alpha_tilde) || Dir(1)) after removing the true-class evidence.

    ``alpha_tilde = y + (1 - y) * alpha`` resets the label's parameter to 1,
    so only misleading evidence is penalised.
    """
    k = alpha.shape[-1]
    y = _check_labels(y, k)
    tilde = y + (1.0 - y) * alpha
    s = tilde.sum(axis=-1, keepdims=True)
    log_norm = ad.lgamma(s).sum(axis=-1) - math.lgamma(k) - ad.lgamma(tilde).sum(axis=-1)
    cross = ((tilde - 1.0) * (ad.digamma(tilde) - ad.digamma(s))).sum(axis=-1)
    return log_norm + cross


def annealing_coef(epoch, annealing_step):
    """KL weight ramp ``min(1, t / T)``."""
    if annealing_step < 1:
        raise ValueError("annealing step must be at least 1")
    return min(1.0, max(epoch, 0) / annealing_step)


def consistency_kernel(b, u, a):
    """Per-sample consistency loss on stacked view opinions ``(V, ..., K)``.

    Sum of degree of conflict over ordered pairs, divided by ``V - 1``.
    """
    v = len(u)
    if v < 2:
        return np.zeros(np.shape(ad.value_of(u))[1:-1])
    c = conflict_kernel(b, u, a)
    return c.sum(axis=0).sum(axis=0)[..., 0] * (1.0 / (v - 1))


def loss_consistency(opinions):
    """Consistency loss for a list of per-view opinions of one sample."""
    opinions = list(opinions)
    if len(opinions) < 2:
        return 0.0
    return float(conflict_matrix(opinions).dc.sum()) / (len(opinions) - 1)
