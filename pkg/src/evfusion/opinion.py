"""Multinomial subjective opinions and their Dirichlet evidence form.

An opinion over K classes is a triple (beliefs, uncertainty, base_rates)
with ``sum(beliefs) + uncertainty == 1``.  Evidence ``e`` maps to an opinion
through the Dirichlet strength ``S = sum(e + 1)``: ``b = e / S``, ``u = K / S``.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

TOL = 1e-9
RENORMALIZE_BELOW = 1e-12


class OpinionError(ValueError):
    """An opinion or evidence vector violates its invariants."""


class DogmaticOpinionError(OpinionError):
    """A dogmatic opinion (u = 0) has no finite evidence."""


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str = ""
    residual: float = 0.0

    def __bool__(self):
        return self.ok


def validate_opinion(beliefs, uncertainty=None, base_rates=None, tol=TOL):
    """Check opinion invariants and report the first violation.

    Accepts either a :class:`SubjectiveOpinion` or raw components.

    >>> validate_opinion([0.5, 0.6], 0.0)
    ValidationResult(ok=False, reason='additivity', residual=0.10000000000000009)
    """
    if isinstance(beliefs, SubjectiveOpinion):
        beliefs, uncertainty, base_rates = beliefs.beliefs, beliefs.uncertainty, beliefs.base_rates
    b = np.asarray(beliefs, dtype=np.float64)
    u = float(uncertainty)
    if b.ndim != 1 or b.size == 0:
        return ValidationResult(False, "empty or non-vector beliefs", float("nan"))
    if not (np.all(np.isfinite(b)) and np.isfinite(u)):
        return ValidationResult(False, "non-finite value", float("nan"))
    if b.min() < -tol:
        return ValidationResult(False, "negative belief", float(-b.min()))
    if u < -tol:
        return ValidationResult(False, "negative uncertainty", -u)
    if u > 1 + tol:
        return ValidationResult(False, "uncertainty above one", u - 1)
    residual = float(b.sum() + u - 1.0)
    if abs(residual) > tol:
        return ValidationResult(False, "additivity", abs(residual))
    if base_rates is not None:
        a = np.asarray(base_rates, dtype=np.float64)
        if a.shape != b.shape:
            return ValidationResult(False, "base rate length", float(abs(a.size - b.size)))
        if not np.all(np.isfinite(a)) or a.min() < -tol:
            return ValidationResult(False, "negative base rate", float(-np.nanmin(a)))
        a_residual = float(a.sum() - 1.0)
        if abs(a_residual) > tol:
            return ValidationResult(False, "base rate additivity", abs(a_residual))
    return ValidationResult(True)


@dataclass(frozen=True, eq=False)
class SubjectiveOpinion:
    """Belief masses, uncertainty mass and base rates over K classes.

    Residuals of the additivity constraint below 1e-12 are removed by
    rescaling; anything beyond 1e-9 raises :class:`OpinionError`.
    """

    beliefs: np.ndarray
    uncertainty: float
    base_rates: Optional[np.ndarray] = None

    def __post_init__(self):
        result = validate_opinion(self.beliefs, self.uncertainty, self.base_rates)
        if not result:
            raise OpinionError(f"invalid opinion: {result.reason} (residual {result.residual:.3g})")
        b = np.clip(np.array(self.beliefs, dtype=np.float64), 0.0, None)
        u = min(max(float(self.uncertainty), 0.0), 1.0)
        total = b.sum() + u
        if abs(total - 1.0) < RENORMALIZE_BELOW:
            b, u = b / total, u / total
        if self.base_rates is None:
            a = np.full(b.size, 1.0 / b.size)
        else:
            a = np.clip(np.array(self.base_rates, dtype=np.float64), 0.0, None)
            if abs(a.sum() - 1.0) < RENORMALIZE_BELOW:
                a = a / a.sum()
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "beliefs", b)
        object.__setattr__(self, "uncertainty", u)
        object.__setattr__(self, "base_rates", a)

    @property
    def k(self):
        return self.beliefs.size

    @property
    def is_dogmatic(self):
        return self.uncertainty == 0.0

    @property
    def is_vacuous(self):
        return self.uncertainty == 1.0

    @classmethod
    def vacuous(cls, k, base_rates=None):
        return cls(np.zeros(k), 1.0, base_rates)

    def __eq__(self, other):
        if not isinstance(other, SubjectiveOpinion):
            return NotImplemented
        return (np.array_equal(self.beliefs, other.beliefs)
                and self.uncertainty == other.uncertainty
                and np.array_equal(self.base_rates, other.base_rates))

    def __hash__(self):
        return hash((self.beliefs.tobytes(), self.uncertainty, self.base_rates.tobytes()))

    def allclose(self, other, atol=TOL):
        return (self.k == other.k
                and np.allclose(self.beliefs, other.beliefs, rtol=0, atol=atol)
                and abs(self.uncertainty - other.uncertainty) <= atol
                and np.allclose(self.base_rates, other.base_rates, rtol=0, atol=atol))

    def to_dict(self):
        return {
            "beliefs": self.beliefs.tolist(),
            "uncertainty": self.uncertainty,
            "base_rates": self.base_rates.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["beliefs"], data["uncertainty"], data.get("base_rates"))
        except KeyError as exc:
            raise OpinionError(f"opinion object is missing field {exc}") from None

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class EvidenceVector:
    """Non-negative per-class evidence with its Dirichlet parameters."""

    evidence: np.ndarray

    def __post_init__(self):
        e = np.array(self.evidence, dtype=np.float64)
        if e.ndim != 1 or e.size == 0:
            raise OpinionError("evidence must be a non-empty vector")
        if not np.all(np.isfinite(e)):
            raise OpinionError("evidence must be finite")
        if e.min() < 0:
            raise OpinionError(f"negative evidence {e.min():.6g}")
        e.setflags(write=False)
        object.__setattr__(self, "evidence", e)

    @property
    def k(self):
        return self.evidence.size

    @property
    def alpha(self):
        return self.evidence + 1.0

    @property
    def strength(self):
        return float(self.alpha.sum())


@dataclass(frozen=True, eq=False)
class ProjectedDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.min() < -TOL or abs(p.sum() - 1.0) > TOL:
            raise OpinionError("projected probabilities must lie on the simplex")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def opinion_from_evidence(evidence, base_rates=None):
    """Map evidence to an opinion: ``b = e / S``, ``u = K / S``."""
    if not isinstance(evidence, EvidenceVector):
        evidence = EvidenceVector(evidence)
    s = evidence.strength
    return SubjectiveOpinion(evidence.evidence / s, evidence.k / s, base_rates)


def evidence_from_opinion(opinion):
    """Inverse Dirichlet map ``S = K / u``, ``e = b * S``.

    Raises :class:`DogmaticOpinionError` when ``u == 0``.
    """
    if opinion.uncertainty <= 0.0:
        raise DogmaticOpinionError("dogmatic opinion has no finite evidence")
    s = opinion.k / opinion.uncertainty
    return EvidenceVector(opinion.beliefs * s)


def projected_probabilities(opinion):
    """``P_k = b_k + a_k * u``."""
    return ProjectedDistribution(opinion.beliefs + opinion.base_rates * opinion.uncertainty)


def dirichlet_mean(evidence):
    """Expected class probabilities ``alpha / S`` of the Dirichlet."""
    if not isinstance(evidence, EvidenceVector):
        evidence = EvidenceVector(evidence)
    return evidence.alpha / evidence.strength
