import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evfusion import autodiff as ad
from evfusion.fusion import (ConflictMatrix, FusionError, TotalConflictError, agreement_matrix,
                             baf_evidence_sequential, conflict_matrix, degree_of_conflict,
                             discount_factors, discount_opinion, fuse, fuse_arrays,
                             fuse_baf_pair, fuse_bcf, fuse_cbf, fuse_dbf, fuse_gbaf,
                             gbaf_evidence)
from evfusion.opinion import (SubjectiveOpinion, evidence_from_opinion, opinion_from_evidence)


def opinion_strategy(k, min_u=1e-3):
    masses = st.lists(st.floats(0.0, 1.0), min_size=k + 1, max_size=k + 1)

    def build(m):
        m = np.asarray(m) + 1e-9
        m = m / m.sum()
        u = max(m[-1], min_u)
        b = m[:-1] / m[:-1].sum() * (1 - u)
        return SubjectiveOpinion(b, u)

    return masses.map(build)


def opinion_sets(min_v=1, max_v=6):
    return st.integers(2, 5).flatmap(
        lambda k: st.lists(opinion_strategy(k), min_size=min_v, max_size=max_v))


# -- worked examples --------------------------------------------------------

def test_agreeing_pair_dbf_equals_gbaf():
    op = SubjectiveOpinion([0.6, 0.2, 0.1], 0.1)
    fused, diag = fuse_dbf([op, op])
    assert diag.conflict.dc[0, 1] == 0.0 and np.all(diag.discount.eta == 1.0)
    assert fused.allclose(fuse_gbaf([op, op]), atol=1e-15)


def test_vacuous_input_is_neutral_for_dbf():
    op = SubjectiveOpinion([0.7, 0.2], 0.1)
    fused, diag = fuse_dbf([op, SubjectiveOpinion.vacuous(2)])
    assert np.all(diag.conflict.dc == 0.0)
    # GBAF with a vacuous source halves the strength: u = harmonic mean of 0.1 and 1
    assert fused.uncertainty == pytest.approx(2 / (10 + 1))


def test_degree_of_conflict_of_opposed_dogmatic_pair():
    pd, cc, dc = degree_of_conflict(SubjectiveOpinion([1.0, 0.0], 0.0),
                                    SubjectiveOpinion([0.0, 1.0], 0.0))
    assert (pd, cc, dc) == (1.0, 1.0, 1.0)


def test_total_conflict_for_dempster():
    with pytest.raises(TotalConflictError):
        fuse_bcf(SubjectiveOpinion([1.0, 0.0], 0.0), SubjectiveOpinion([0.0, 1.0], 0.0))


def test_cbf_adds_evidence():
    e1, e2 = np.array([2.0, 1.0, 0.0]), np.array([0.5, 4.0, 3.0])
    fused = fuse_cbf([opinion_from_evidence(e1), opinion_from_evidence(e2)])
    assert np.allclose(evidence_from_opinion(fused).evidence, e1 + e2, atol=1e-12)


def test_gbaf_averages_evidence():
    es = [np.array([2.0, 1.0]), np.array([0.5, 4.0]), np.array([6.0, 0.0])]
    fused = fuse_gbaf([opinion_from_evidence(e) for e in es])
    assert np.allclose(evidence_from_opinion(fused).evidence, np.mean(es, axis=0), atol=1e-12)
    assert np.array_equal(gbaf_evidence(es).evidence, np.mean(es, axis=0))


def test_pairwise_averaging_equals_gbaf_for_two():
    a, b = SubjectiveOpinion([0.5, 0.3], 0.2), SubjectiveOpinion([0.1, 0.6], 0.3)
    assert fuse_baf_pair(a, b).allclose(fuse_gbaf([a, b]), atol=1e-15)


def test_sequential_evidence_average_is_order_dependent():
    results = {float(baf_evidence_sequential([[x] for x in p]).evidence[0])
               for p in itertools.permutations([3.0, 5.0, 10.0])}
    assert results == {7.0, 5.25, 5.75}


def test_dogmatic_inputs_take_over():
    dog = SubjectiveOpinion([0.2, 0.8], 0.0)
    soft = SubjectiveOpinion([0.9, 0.0], 0.1)
    for fused in (fuse_gbaf([dog, soft]), fuse_cbf([soft, dog]), fuse_baf_pair(soft, dog)):
        assert fused == SubjectiveOpinion([0.2, 0.8], 0.0)


def test_single_input_passes_through():
    op = SubjectiveOpinion([0.3, 0.3], 0.4)
    for method in ("gbaf", "dbf", "cbf", "bcf", "baf"):
        assert fuse(method, [op])[0].allclose(op, atol=1e-15)


def test_errors():
    op2, op3 = SubjectiveOpinion([0.5, 0.5], 0.0), SubjectiveOpinion([0.3, 0.3, 0.3], 0.1)
    with pytest.raises(ValueError):
        fuse_gbaf([op2, op3])
    with pytest.raises(FusionError):
        fuse_gbaf([])
    with pytest.raises(FusionError):
        fuse("mean", [op2])
    with pytest.raises(FusionError):
        agreement_matrix(np.zeros((2, 2)), lam=0.0)
    with pytest.raises(FusionError):
        discount_opinion(op2, 1.5)
    with pytest.raises(ValueError):
        ConflictMatrix(np.array([[0.0, 0.3], [0.2, 0.0]]))


def test_diagnostics_serialise():
    ops = [SubjectiveOpinion([0.8, 0.1], 0.1), SubjectiveOpinion([0.1, 0.8], 0.1)]
    d = fuse_dbf(ops, 2.0)[1].to_dict()
    assert d["lambda"] == 2.0 and len(d["discount_factors"]) == 2


# -- properties -------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(opinion_sets(), st.randoms())
def test_gbaf_and_dbf_are_permutation_invariant(ops, rnd):
    shuffled = ops[:]
    rnd.shuffle(shuffled)
    assert fuse_gbaf(ops).allclose(fuse_gbaf(shuffled), atol=1e-12)
    assert fuse_dbf(ops, 3.0)[0].allclose(fuse_dbf(shuffled, 3.0)[0], atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(opinion_sets())
def test_gbaf_uncertainty_is_harmonic_mean(ops):
    u = np.array([o.uncertainty for o in ops])
    assert fuse_gbaf(ops).uncertainty == pytest.approx(len(u) / np.sum(1 / u), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(opinion_sets(min_v=2))
def test_conflict_matrix_is_symmetric_and_bounded(ops):
    dc = conflict_matrix(ops).dc
    assert np.allclose(dc, dc.T) and np.all(np.diag(dc) == 0)
    assert np.all((0 <= dc) & (dc <= 1))


@settings(max_examples=200, deadline=None)
@given(opinion_sets(min_v=2))
def test_discounting_only_adds_uncertainty(ops):
    fused, diag = fuse_dbf(ops, 1.0)
    assert np.all((0 <= diag.discount.eta) & (diag.discount.eta <= 1))
    assert fused.uncertainty >= fuse_gbaf(ops).uncertainty - 1e-12


@settings(max_examples=200, deadline=None)
@given(opinion_sets(min_v=2))
def test_uncertainty_falls_as_lambda_grows(ops):
    us = [fuse_dbf(ops, lam)[0].uncertainty for lam in (0.5, 1.0, 3.0, 10.0)]
    assert all(a >= b - 1e-12 for a, b in zip(us, us[1:]))


@settings(max_examples=200, deadline=None)
@given(opinion_strategy(3), st.floats(0.0, 1.0))
def test_more_conflict_means_more_discounting(op, t):
    """Sliding a second opinion from agreement to opposition lowers eta."""
    far = SubjectiveOpinion(op.beliefs[::-1], op.uncertainty)
    mid = SubjectiveOpinion((1 - t) * op.beliefs + t * far.beliefs, op.uncertainty)
    eta_mid = fuse_dbf([op, mid])[1].discount.eta[0]
    eta_far = fuse_dbf([op, far])[1].discount.eta[0]
    assert eta_far <= eta_mid + 1e-12


@settings(max_examples=100, deadline=None)
@given(opinion_sets(min_v=2, max_v=4))
def test_discount_factors_are_agreement_row_products(ops):
    fused, diag = fuse_dbf(ops, 2.5)
    plain = discount_factors(agreement_matrix(conflict_matrix(ops), 2.5)).eta
    assert np.allclose(diag.discount.eta, plain, rtol=1e-12, atol=1e-15)


# -- kernels agree with the opinion-level operators ---------------------------

@pytest.mark.parametrize("method", ["gbaf", "dbf", "cbf", "baf", "bcf"])
def test_batched_kernels_match_opinions(method):
    rng = np.random.default_rng(5)
    v, n, k = 3, 40, 4
    e = rng.gamma(1.0, 3.0, size=(v, n, k))
    s = e.sum(-1, keepdims=True) + k
    b, u, a = e / s, k / s, np.full((v, n, k), 1 / k)
    fb, fu = fuse_arrays(method, b, u, a, 2.0)
    for i in range(n):
        ops = [SubjectiveOpinion(b[j, i], u[j, i, 0]) for j in range(v)]
        ref, _ = fuse(method, ops, 2.0)
        assert np.allclose(fb[i], ref.beliefs, atol=1e-12)
        assert fu[i, 0] == pytest.approx(ref.uncertainty, abs=1e-12)


def test_kernels_run_on_tensors():
    b = ad.parameter([[0.5, 0.3], [0.1, 0.6]])
    u = ad.parameter([[0.2], [0.3]])
    a = np.full((2, 2), 0.5)
    fb, fu = fuse_arrays("dbf", b, u, a, 1.0)
    assert isinstance(fb, ad.Tensor)
    ref = fuse_dbf([SubjectiveOpinion([0.5, 0.3], 0.2), SubjectiveOpinion([0.1, 0.6], 0.3)])[0]
    assert np.allclose(fb.value, ref.beliefs)
