import json

import numpy as np
import pytest

from evfusion.opinion import (DogmaticOpinionError, EvidenceVector, OpinionError,
                              SubjectiveOpinion, dirichlet_mean, evidence_from_opinion,
                              opinion_from_evidence, projected_probabilities, validate_opinion)


def test_evidence_round_trip():
    e = np.array([3.0, 0.0, 7.5, 1.25])
    op = opinion_from_evidence(e)
    assert op.uncertainty == pytest.approx(4 / 15.75)
    assert np.allclose(evidence_from_opinion(op).evidence, e, atol=1e-12)


def test_zero_evidence_is_vacuous():
    op = opinion_from_evidence([0.0, 0.0, 0.0])
    assert op.is_vacuous and op == SubjectiveOpinion.vacuous(3)


def test_dogmatic_has_no_evidence():
    with pytest.raises(DogmaticOpinionError):
        evidence_from_opinion(SubjectiveOpinion([0.4, 0.6], 0.0))


def test_projected_probability_matches_dirichlet_mean_for_uniform_base_rate():
    e = [2.0, 5.0, 0.5]
    assert np.allclose(projected_probabilities(opinion_from_evidence(e)).probs, dirichlet_mean(e))


@pytest.mark.parametrize("beliefs, u, fragment", [
    ([0.5, 0.6], 0.0, "additiv"),
    ([-0.1, 0.6], 0.5, "negative belief"),
    ([0.5, 0.5], -0.0001, "negative uncertainty"),
    ([], 1.0, "empty"),
    ([np.nan, 0.5], 0.5, "finite"),
])
def test_invalid_opinions_are_rejected(beliefs, u, fragment):
    result = validate_opinion(beliefs, u)
    assert not result and fragment in result.reason
    with pytest.raises(OpinionError):
        SubjectiveOpinion(beliefs, u)


def test_bad_base_rates():
    with pytest.raises(OpinionError):
        SubjectiveOpinion([0.5, 0.5], 0.0, [0.3, 0.3])
    with pytest.raises(OpinionError):
        SubjectiveOpinion([0.5, 0.5], 0.0, [1.0, 0.0, 0.0])


def test_tiny_residuals_are_renormalised():
    op = SubjectiveOpinion([0.3, 0.3], 0.4 + 5e-13)
    assert op.beliefs.sum() + op.uncertainty == pytest.approx(1.0, abs=1e-15)


def test_residual_between_tolerances_is_accepted_but_kept():
    op = SubjectiveOpinion([0.3, 0.3], 0.4 + 5e-10)
    assert op.uncertainty == 0.4 + 5e-10


def test_json_round_trip_and_immutability():
    op = SubjectiveOpinion([0.2, 0.5, 0.1], 0.2, [0.5, 0.25, 0.25])
    again = SubjectiveOpinion.from_json(op.to_json())
    assert again == op and hash(again) == hash(op)
    assert json.loads(op.to_json())["uncertainty"] == 0.2
    with pytest.raises(ValueError):
        op.beliefs[0] = 1.0


def test_missing_field():
    with pytest.raises(OpinionError, match="uncertainty"):
        SubjectiveOpinion.from_dict({"beliefs": [1.0]})


def test_evidence_vector_validation():
    assert EvidenceVector([1.0, 2.0]).strength == 5.0
    for bad in ([-1.0, 1.0], [np.inf], []):
        with pytest.raises(OpinionError):
            EvidenceVector(bad)
