import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wienerinf.families import BallChain, Example71, Example72, ExcludedBall, HalfSpace
from wienerinf.geometry import (Ball, ClosedBall, Complement, Exponents, Origin,
                                ValidationError, Weight, WholeSpace)
from wienerinf.variants import CriterionVariant, VariantKind as V
from wienerinf.wiener import (WholeSpaceRefused, classic_wiener_at, classify_infinity,
                              divergence_verdict_for, integrand_at, wiener_partial_sum)

E22, E23 = Exponents(2, 2), Exponents(2, 3)
FAMILIES = [Example71(2), Example72(2), HalfSpace((1.0, 0.0), 0.0), BallChain(4.0, 2.0, 1.0),
            ExcludedBall((0.0, 0.0), 1.0), ExcludedBall((5.0, 0.0), 2.0)]
KINDS = [V.BALL_IN_UNION, V.SQUARE_SHELL, V.EXP_SHELL, V.SQUARE_SHELL_RN_OUTER,
         V.TRANSFORMED_ORIGIN, V.LINEAR_SHELL]


def test_whole_space_integrand_is_zero():
    est, f = integrand_at(3.0, CriterionVariant(V.BALL_IN_UNION), WholeSpace(), E22)
    assert est.value == 0 and f == 0
    rep = wiener_partial_sum(CriterionVariant(V.BALL_IN_UNION), WholeSpace(), E22)
    assert rep.total == 0 and rep.trend == 0
    with pytest.raises(WholeSpaceRefused):
        classify_infinity(WholeSpace(), E22)


def test_sparse_balls_square_shell_partial_sums():
    rep = wiener_partial_sum(CriterionVariant(V.SQUARE_SHELL), Example71(2).descriptor(), E22)
    # the integrand carries omega; the bounding series is stated after dividing by it
    assert np.all(rep.partial_sums / (2 * math.pi) <= 0.75)
    assert rep.verdict.kind == "convergent"
    # the complement misses [r, r^2] for r < 2
    assert all(s.capacity == 0 for s in rep.samples if s.r < 2)


def test_half_plane_p3_grows():
    rep = wiener_partial_sum(CriterionVariant(V.BALL_IN_UNION), HalfSpace((1.0, 0.0), 0.0).descriptor(), E23)
    assert rep.trend > 0
    assert rep.partial_sums[-1] > rep.partial_sums[len(rep.samples) // 2] > 0


@pytest.mark.parametrize("dom,exp,verdict", [
    (Complement(ClosedBall((0, 0), 1)), E23, "convergent"),
    (HalfSpace((1.0, 0.0), 0.0).descriptor(), E23, "divergent"),
    (Example71(2).descriptor(), E22, "convergent"),
])
def test_verdict_examples(dom, exp, verdict):
    assert divergence_verdict_for(CriterionVariant(V.SQUARE_SHELL), dom, exp).kind == verdict


@pytest.mark.parametrize("dom,exp,status", [
    (HalfSpace((1.0, 0.0), 0.0).descriptor(), E23, "Regular"),
    (HalfSpace((1.0, 1.0), -3.0).descriptor(), Exponents(2, 4), "Regular"),
    (Complement(ClosedBall((0, 0), 1)), E22, "Irregular"),
    (Complement(ClosedBall((0, 0), 1)), E23, "Irregular"),
    (Example71(2).descriptor(), E22, "Irregular"),
    (Example71(2).descriptor(), E23, "Regular"),
    (Example72(2).descriptor(), E22, "Regular"),
])
def test_classifier(dom, exp, status):
    res = classify_infinity(dom, exp)
    assert res.status == status
    assert res.certificate.startswith("square-shell: provably")


def test_classifier_preconditions():
    with pytest.raises(ValidationError):
        classify_infinity(HalfSpace((1.0, 0.0), 0.0).descriptor(), Exponents(3, 2))
    with pytest.raises(ValidationError):
        classify_infinity(Ball((0, 0), 1), E22)
    with pytest.raises(ValidationError):
        classify_infinity(HalfSpace((1.0, 0.0), 0.0).descriptor(), E22, CriterionVariant(V.LINEAR_SHELL))


def test_classic_half_plane_constant_integrand():
    rep = classic_wiener_at((0.0, 0.0), HalfSpace((1.0, 0.0), 0.0).descriptor(), E22, rho_min=1e-3)
    vals = np.array([s.integrand for s in rep.samples])
    assert np.all(vals > 0) and np.ptp(vals) <= 1e-9 * vals.max()
    assert rep.verdict.kind == "divergent"


def test_classic_isolated_point():
    rep = classic_wiener_at((0.0, 0.0), Complement(Origin()), E22)
    assert rep.total == 0 and rep.verdict.kind == "convergent"
    assert classic_wiener_at((0.0, 0.0), Complement(Origin()), E23).verdict.kind == "divergent"
    w = Weight.power(2.0)
    assert classic_wiener_at((0.0, 0.0), Complement(Origin()), E23, w).verdict.kind == "convergent"
    with pytest.raises(ValidationError):
        classic_wiener_at((0.0, 0.0), Ball((0, 0), 1), E22)


@settings(max_examples=25)
@given(st.sampled_from(FAMILIES), st.sampled_from(KINDS), st.sampled_from([2.0, 3.0]))
def test_nonnegative_and_monotone(fam, kind, p):
    v = CriterionVariant(kind)
    lo, hi = (1.0, 1e4) if v.at_infinity else (1e-4, 1.0)
    rep = wiener_partial_sum(v, fam.descriptor(), Exponents(2, p), r_min=lo, r_max=hi,
                             samples_per_decade=4, certify=False)
    assert all(s.integrand >= 0 and s.capacity >= 0 for s in rep.samples)
    assert np.all(np.diff(rep.partial_sums) >= 0)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: type(f).__name__)
@pytest.mark.parametrize("p", [2.0, 3.0])
def test_variant_verdicts_agree(fam, p):
    e = Exponents(2, p)
    kinds = {divergence_verdict_for(CriterionVariant(k), fam.descriptor(), e).kind
             for k in (V.BALL_IN_UNION, V.SQUARE_SHELL, V.EXP_SHELL)}
    assert len(kinds) == 1 and kinds != {"trend"}


def _paired(fam, p):
    e = Exponents(2, p)
    d = fam.descriptor()
    a = wiener_partial_sum(CriterionVariant(V.SQUARE_SHELL), d, e, r_max=1e4,
                           samples_per_decade=4, certify=False)
    b = wiener_partial_sum(CriterionVariant(V.TRANSFORMED_ORIGIN), d, e, r_min=1e-4, r_max=1.0,
                           samples_per_decade=4, certify=False)
    by_rho = {round(-math.log10(s.r), 6): s for s in b.samples}
    return [(s, by_rho[round(math.log10(s.r), 6)]) for s in a.samples]


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: type(f).__name__)
def test_inversion_covariance_p_equals_n(fam):
    for s, t in _paired(fam, 2.0):
        assert t.capacity == pytest.approx(s.capacity, rel=1e-9, abs=1e-300)
        assert t.integrand == pytest.approx(s.integrand, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: type(f).__name__)
def test_inversion_covariance_brackets_overlap(fam):
    for s, t in _paired(fam, 3.0):
        if s.lower is None or t.lower is None:
            continue
        assert max(s.lower, t.lower) <= min(s.upper, t.upper) * (1 + 1e-12)


def test_sampling_validation():
    with pytest.raises(ValidationError):
        wiener_partial_sum(CriterionVariant(V.SQUARE_SHELL), HalfSpace((1.0, 0.0), 0.0).descriptor(),
                           E22, samples_per_decade=3)
    with pytest.raises(ValidationError):
        wiener_partial_sum(CriterionVariant(V.SQUARE_SHELL), HalfSpace((1.0, 0.0), 0.0).descriptor(),
                           E22, r_min=10, r_max=5)
