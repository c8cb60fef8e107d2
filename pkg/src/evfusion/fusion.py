"""Belief fusion operators and conflict-based discounting.

Two layers live here.  The ``*_kernel`` functions work on stacked arrays
with views on axis 0, classes on the last axis and any batch axes in
between (beliefs and base rates ``(V, ..., K)``, uncertainties
``(V, ..., 1)``).  They only use arithmetic, ``abs``, ``sum``, ``prod`` and
indexing, so they run on numpy arrays and on :class:`evfusion.autodiff.Tensor`
alike; the trainer differentiates through exactly the code tested here.
Kernels assume every uncertainty is strictly positive.

The opinion-level functions (``fuse_gbaf``, ``fuse_dbf`` ...) take lists of
:class:`SubjectiveOpinion`, apply the dogmatic limit rules and call the
kernels.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import autodiff as ad
from .opinion import EvidenceVector, OpinionError, SubjectiveOpinion, projected_probabilities

METHODS = ("bcf", "cbf", "baf", "gbaf", "dbf")


class FusionError(ValueError):
    pass


class TotalConflictError(FusionError):
    """Dempster's rule is undefined when the two opinions fully conflict."""


# ---------------------------------------------------------------------------
# array kernels


def projected_kernel(b, u, a):
    return b + a * u


def gbaf_kernel(b, u):
    """Generalised belief averaging of V opinions.

    Dividing numerator and denominator of the product form by prod(u) gives
    weights 1/u_v; the fused uncertainty is then the harmonic mean.
    """
    inv = 1.0 / u
    denom = inv.sum(axis=0)
    return (b * inv).sum(axis=0) / denom, len(u) / denom


def cbf_kernel(b, u):
    """Cumulative fusion of V opinions (evidence addition)."""
    inv = 1.0 / u
    denom = inv.sum(axis=0) - (len(u) - 1)
    return (b * inv).sum(axis=0) / denom, 1.0 / denom


def baf_pair_kernel(b1, u1, b2, u2):
    s = u1 + u2
    return (b1 * u2 + b2 * u1) / s, 2.0 * u1 * u2 / s


def bcf_norm_kernel(b1, u1, b2, u2):
    """``1 - conflict`` for Dempster's rule, conflict = sum_{i != j} b1_i b2_j.

    Uses sum(b) = 1 - u to avoid cancelling two numbers close to one.
    """
    return u1 + u2 - u1 * u2 + (b1 * b2).sum(axis=-1, keepdims=True)


def bcf_pair_kernel(b1, u1, b2, u2):
    """Dempster's rule in opinion form; ``1 - conflict`` must be positive."""
    norm = bcf_norm_kernel(b1, u1, b2, u2)
    return (b1 * b2 + b1 * u2 + b2 * u1) / norm, u1 * u2 / norm


def conflict_kernel(b, u, a):
    """Pairwise degree of conflict, shape ``(V, V, ..., 1)``."""
    p = projected_kernel(b, u, a)
    distance = abs(p[:, None] - p[None, :]).sum(axis=-1, keepdims=True) * 0.5
    certainty = (1.0 - u)[:, None] * (1.0 - u)[None, :]
    return distance * certainty


def agreement_kernel(c, lam=1.0):
    if lam == 1.0:
        return 1.0 - c
    return (1.0 - c ** lam) ** (1.0 / lam)


def discount_kernel(b, u, eta, one_minus_eta=None):
    """``b' = eta b``, ``u' = 1 - eta + eta u``.

    Pass ``one_minus_eta`` when it is known more accurately than ``1 - eta``.
    """
    if one_minus_eta is None:
        one_minus_eta = 1.0 - eta
    return b * eta, one_minus_eta + eta * u


def discount_factor_kernel(c, lam=1.0):
    """Row products of the agreement matrix, and their complements.

    Computed in log space, ``log A = log1p(-C**lam) / lam``, so that
    ``1 - eta`` keeps full precision when the conflict is tiny.
    """
    cl = c if lam == 1.0 else c ** lam
    log_eta = ad.log1p(-cl).sum(axis=1) * (1.0 / lam)
    return ad.exp(log_eta), -ad.expm1(log_eta)


def dbf_kernel(b, u, a, lam=1.0):
    """Discounted belief fusion; returns (beliefs, uncertainty, eta)."""
    c = conflict_kernel(b, u, a)
    eta, one_minus_eta = discount_factor_kernel(c, lam)
    db, du = discount_kernel(b, u, eta, one_minus_eta)
    fb, fu = gbaf_kernel(db, du)
    return fb, fu, eta


def fuse_arrays(method, b, u, a, lam=1.0):
    """Dispatch a kernel by method name on stacked arrays.

    Pairwise operators (``baf``, ``bcf``) are folded left to right.
    """
    if method == "gbaf":
        return gbaf_kernel(b, u)
    if method == "dbf":
        fb, fu, _ = dbf_kernel(b, u, a, lam)
        return fb, fu
    if method == "cbf":
        return cbf_kernel(b, u)
    if method in ("baf", "bcf"):
        pair = baf_pair_kernel if method == "baf" else bcf_pair_kernel
        fb, fu = b[0], u[0]
        for v in range(1, len(u)):
            fb, fu = pair(fb, fu, b[v], u[v])
        return fb, fu
    raise FusionError(f"unknown fusion method {method!r}; expected one of {METHODS}")


# ---------------------------------------------------------------------------
# diagnostics types


@dataclass(frozen=True, eq=False)
class ConflictMatrix:
    dc: np.ndarray

    def __post_init__(self):
        dc = np.array(self.dc, dtype=np.float64)
        if dc.ndim != 2 or dc.shape[0] != dc.shape[1]:
            raise FusionError("conflict matrix must be square")
        if not np.allclose(dc, dc.T, atol=1e-12) or np.any(np.diag(dc) != 0):
            raise FusionError("conflict matrix must be symmetric with zero diagonal")
        if dc.min() < 0 or dc.max() > 1:
            raise FusionError("conflict entries must lie in [0, 1]")
        dc.setflags(write=False)
        object.__setattr__(self, "dc", dc)


@dataclass(frozen=True, eq=False)
class AgreementMatrix:
    a: np.ndarray
    lam: float


@dataclass(frozen=True, eq=False)
class DiscountFactors:
    eta: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    conflict: ConflictMatrix
    agreement: AgreementMatrix
    discount: DiscountFactors

    def to_dict(self):
        return {
            "conflict_matrix": self.conflict.dc.tolist(),
            "agreement_matrix": self.agreement.a.tolist(),
            "lambda": self.agreement.lam,
            "discount_factors": self.discount.eta.tolist(),
        }


# ---------------------------------------------------------------------------
# opinion-level operators


def _stack(opinions, minimum=1):
    opinions = list(opinions)
    if len(opinions) < minimum:
        raise FusionError(f"need at least {minimum} opinion(s), got {len(opinions)}")
    k = opinions[0].k
    if any(o.k != k for o in opinions):
        raise OpinionError("opinions have different numbers of classes")
    b = np.stack([o.beliefs for o in opinions])
    u = np.array([[o.uncertainty] for o in opinions])
    a = np.stack([o.base_rates for o in opinions])
    return b, u, a


def _opinion(b, u, a):
    return SubjectiveOpinion(np.asarray(b).reshape(-1), float(np.asarray(u).reshape(())), a)


def _dogmatic_limit(b, u, a):
    """Limit of averaging/cumulative fusion when some inputs have u = 0.

    Non-dogmatic inputs carry vanishing weight, so the result is the mean
    belief of the dogmatic subset with zero uncertainty.
    """
    dogmatic = u[:, 0] == 0.0
    return _opinion(b[dogmatic].mean(axis=0), 0.0, a.mean(axis=0))


def degree_of_conflict(first, second):
    """Projected distance, conjunctive certainty and their product."""
    if first.k != second.k:
        raise OpinionError("opinions have different numbers of classes")
    p1 = projected_probabilities(first).probs
    p2 = projected_probabilities(second).probs
    pd = min(0.5 * float(np.abs(p1 - p2).sum()), 1.0)
    cc = (1.0 - first.uncertainty) * (1.0 - second.uncertainty)
    return pd, cc, pd * cc


def fuse_baf_pair(first, second):
    """Belief averaging of two opinions; base rates are averaged."""
    b, u, a = _stack([first, second], minimum=2)
    if np.any(u == 0):
        return _dogmatic_limit(b, u, a)
    fb, fu = baf_pair_kernel(b[0], u[0], b[1], u[1])
    return _opinion(fb, fu, a.mean(axis=0))


def fuse_baf_sequential(opinions):
    """Left fold of :func:`fuse_baf_pair` in the given order.

    Averaging is not associative: earlier inputs are halved at every later
    step, so the result depends on the order.
    """
    opinions = list(opinions)
    if len(opinions) < 2:
        raise FusionError("sequential averaging needs at least 2 opinions")
    return reduce(fuse_baf_pair, opinions)


def baf_evidence_sequential(evidences):
    """Sequential averaging carried out on evidence: ``e <- (e + e_next) / 2``."""
    evidences = [e if isinstance(e, EvidenceVector) else EvidenceVector(e) for e in evidences]
    if len(evidences) < 2:
        raise FusionError("sequential averaging needs at least 2 evidence vectors")
    if len({e.k for e in evidences}) != 1:
        raise OpinionError("evidence vectors have different numbers of classes")
    fused = evidences[0].evidence
    for e in evidences[1:]:
        fused = (fused + e.evidence) / 2
    return EvidenceVector(fused)


def gbaf_evidence(evidences):
    """Generalised averaging on evidence: the arithmetic mean."""
    evidences = [e if isinstance(e, EvidenceVector) else EvidenceVector(e) for e in evidences]
    if not evidences:
        raise FusionError("need at least 1 evidence vector")
    if len({e.k for e in evidences}) != 1:
        raise OpinionError("evidence vectors have different numbers of classes")
    return EvidenceVector(np.mean([e.evidence for e in evidences], axis=0))


def fuse_gbaf(opinions):
    """Order-invariant belief averaging of any number of opinions."""
    b, u, a = _stack(opinions)
    if np.any(u == 0):
        return _dogmatic_limit(b, u, a)
    fb, fu = gbaf_kernel(b, u)
    return _opinion(fb, fu, a.mean(axis=0))


def fuse_cbf(opinions):
    """Cumulative fusion: evidences add."""
    b, u, a = _stack(opinions)
    if np.any(u == 0):
        return _dogmatic_limit(b, u, a)
    fb, fu = cbf_kernel(b, u)
    return _opinion(fb, fu, a.mean(axis=0))


def _bcf_pair(first, second):
    if first.k != second.k:
        raise OpinionError("opinions have different numbers of classes")
    norm = bcf_norm_kernel(first.beliefs, first.uncertainty, second.beliefs, second.uncertainty)
    if norm <= 1e-12:
        raise TotalConflictError("total belief conflict: Dempster's rule is undefined")
    fb, fu = bcf_pair_kernel(first.beliefs, first.uncertainty, second.beliefs, second.uncertainty)
    return _opinion(fb, fu, (first.base_rates + second.base_rates) / 2)


def fuse_bcf(*opinions):
    """Dempster's combination (belief constraint fusion).

    Accepts two opinions or a single list; more than two are folded left to
    right, which is order-independent because the rule is associative.
    """
    if len(opinions) == 1:
        opinions = tuple(opinions[0])
    if len(opinions) < 1:
        raise FusionError("need at least 1 opinion")
    return reduce(_bcf_pair, opinions)


def conflict_matrix(opinions):
    b, u, a = _stack(opinions)
    c = conflict_kernel(b, u, a)[..., 0]
    # round-off can push |P1 - P2| / 2 a hair above 1 for dogmatic pairs
    return ConflictMatrix(np.clip(c, 0.0, 1.0))


def agreement_matrix(conflict, lam=1.0):
    """``(1 - C**lam) ** (1/lam)`` elementwise."""
    if not lam > 0:
        raise FusionError(f"lambda must be positive, got {lam}")
    dc = conflict.dc if isinstance(conflict, ConflictMatrix) else np.asarray(conflict, float)
    return AgreementMatrix(agreement_kernel(dc, float(lam)), float(lam))


def discount_factors(agreement):
    a = agreement.a if isinstance(agreement, AgreementMatrix) else np.asarray(agreement, float)
    return DiscountFactors(a.prod(axis=1))


def discount_opinion(opinion, eta):
    """Move a share ``1 - eta`` of the belief mass into uncertainty."""
    if not 0.0 <= eta <= 1.0:
        raise FusionError(f"discount factor must lie in [0, 1], got {eta}")
    db, du = discount_kernel(opinion.beliefs, opinion.uncertainty, eta)
    return SubjectiveOpinion(db, du, opinion.base_rates)


def fuse_dbf(opinions, lam=1.0):
    """Discounted belief fusion.

    Each opinion is discounted by the product of its agreements with all
    others, then the discounted set is fused by :func:`fuse_gbaf` (which
    averages the original base rates).  Returns ``(fused, diagnostics)``.
    """
    opinions = list(opinions)
    conflict = conflict_matrix(opinions)
    agreement = agreement_matrix(conflict, lam)
    with np.errstate(divide="ignore"):
        eta, one_minus_eta = discount_factor_kernel(conflict.dc, float(lam))
    discounted = []
    for o, e, rest in zip(opinions, eta, one_minus_eta):
        db, du = discount_kernel(o.beliefs, o.uncertainty, e, rest)
        discounted.append(SubjectiveOpinion(db, du, o.base_rates))
    return fuse_gbaf(discounted), Diagnostics(conflict, agreement, DiscountFactors(eta))


def fuse(method, opinions, lam=1.0):
    """Fuse by method name; ``dbf`` also returns diagnostics, others ``None``."""
    opinions = list(opinions)
    if method == "dbf":
        return fuse_dbf(opinions, lam)
    if method == "gbaf":
        return fuse_gbaf(opinions), None
    if method == "cbf":
        return fuse_cbf(opinions), None
    if method == "bcf":
        return fuse_bcf(opinions), None
    if method == "baf":
        if len(opinions) == 1:
            return opinions[0], None
        return fuse_baf_sequential(opinions), None
    raise FusionError(f"unknown fusion method {method!r}; expected one of {METHODS}")
