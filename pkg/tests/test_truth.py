"""Truth-value algebra checked against an independent evidence-space oracle.

The oracle functions below recompute every rule from the raw w+/w- evidence
arithmetic, written separately from the library code so the two can disagree.
"""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nalign.truth import (
    Evidence,
    TruthDomainError,
    TruthValue,
    analogy,
    conditional_deduction,
    deduction,
    evidence_from_truth,
    induction,
    op_and,
    op_not,
    op_or,
    probabilistic_revision,
    probabilistic_revision_fold,
    revision,
    revision_fold,
    scale_evidence,
    truth_from_evidence,
)

TOL = 1e-10

# ---------------------------------------------------------------------------
# Independent oracle: plain evidence arithmetic, k = 1.


def oracle_w(c: float) -> float:
    return c / (1.0 - c)


def oracle_c(w: float) -> float:
    return w / (w + 1.0)


def oracle_deduction(f1, c1, f2, c2):
    return f1 * f2, f1 * f2 * c1 * c2


def oracle_analogy(f1, c1, f2, c2):
    return f1 * f2, f2 * c1 * c2


def oracle_induction(f1, c1, f2, c2):
    w_plus = f2 * c2 * f1 * c1
    w_minus = f2 * c2 * (1.0 - f1) * c1
    w = w_plus + w_minus
    return (w_plus / w if w else 0.0), oracle_c(w)


def oracle_revision(f1, c1, f2, c2):
    w1, w2 = oracle_w(c1), oracle_w(c2)
    w = w1 + w2
    return ((f1 * w1 + f2 * w2) / w if w else 0.0), oracle_c(w)


def oracle_prob_revision(f1, c1, f2, c2):
    w = oracle_w(c1) + oracle_w(c2)
    return 1.0 - (1.0 - f1) * (1.0 - f2), oracle_c(w)


# Subnormals lose mantissa bits under evidence conversion; exclude that noise.
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_subnormal=False)
conf = st.floats(min_value=0.0, max_value=0.99, allow_nan=False, allow_subnormal=False)


def truth_values(n, rng):
    return [TruthValue(rng.random(), rng.random() * 0.99) for _ in range(n)]


# ---------------------------------------------------------------------------
# Extended booleans.


def test_boolean_operators_worked_values():
    assert op_and([1, 1]) == 1
    assert abs(op_or([0.78, 0.78]) - 0.9516) < 1e-12  # 1 - 0.22^2
    assert op_not(0) == 1


def test_boolean_operators_domain_errors():
    with pytest.raises(TruthDomainError):
        op_and([0.5, 1.2])
    with pytest.raises(TruthDomainError):
        op_or([-0.1])
    with pytest.raises(TruthDomainError):
        op_not(2.0)


@given(st.lists(unit, min_size=1, max_size=6))
def test_boolean_ranges(xs):
    assert 0.0 <= op_and(xs) <= 1.0
    assert 0.0 <= op_or(xs) <= 1.0
    assert abs(op_or(xs) - (1.0 - op_and([1 - x for x in xs]))) < 1e-12


# ---------------------------------------------------------------------------
# Evidence conversions.


def test_evidence_from_truth_worked_values():
    assert evidence_from_truth(TruthValue(1, 0.5)) == Evidence(1.0, 1.0)
    assert evidence_from_truth(TruthValue(0, 0.5)) == Evidence(0.0, 1.0)
    assert evidence_from_truth(TruthValue(1, 0)) == Evidence(0.0, 0.0)


def test_evidence_from_truth_rejects_full_confidence():
    with pytest.raises(TruthDomainError):
        evidence_from_truth(TruthValue(1, 1))


def test_truth_from_evidence_worked_values():
    assert truth_from_evidence(Evidence(2, 2)) == TruthValue(1, 2 / 3)
    assert truth_from_evidence(Evidence(0, 0)) == TruthValue(0, 0)
    assert truth_from_evidence(Evidence(1, 2)) == TruthValue(0.5, 2 / 3)


@given(unit, conf)
def test_evidence_round_trip(f, c):
    tv = TruthValue(f, c)
    back = truth_from_evidence(evidence_from_truth(tv))
    if c == 0.0:
        assert back == TruthValue(0, 0)  # frequency unobservable at w = 0
    else:
        assert abs(back.f - f) < 1e-12 and abs(back.c - c) < 1e-12


# ---------------------------------------------------------------------------
# Rules: worked values frozen from hand evaluation.


def test_deduction_worked_values():
    assert deduction(TruthValue(1, 1), TruthValue(1, 1)) == TruthValue(1, 1)
    out = deduction(TruthValue(1, 1), TruthValue(0.78, 0.5))
    assert abs(out.f - 0.78) < TOL and abs(out.c - 0.39) < TOL
    assert deduction(TruthValue(0, 0.7), TruthValue(0.3, 0.2)) == TruthValue(0, 0)


def test_analogy_worked_values():
    assert analogy(TruthValue(1, 1), TruthValue(1, 1)) == TruthValue(1, 1)
    out = analogy(TruthValue(1, 1), TruthValue(0.9, 0.8))
    assert abs(out.f - 0.9) < TOL and abs(out.c - 0.72) < TOL
    assert analogy(TruthValue(0.5, 0.5), TruthValue(0, 1)) == TruthValue(0, 0)


def test_conditional_deduction_worked_values():
    assert conditional_deduction(TruthValue(1, 1), TruthValue(1, 1)) == TruthValue(1, 1)
    out = conditional_deduction(TruthValue(1, 1), TruthValue(0.78, 0.39))
    assert abs(out.f - 0.78) < TOL and abs(out.c - 0.3042) < TOL
    assert conditional_deduction(TruthValue(1, 0), TruthValue(1, 1)) == TruthValue(1, 0)


def test_induction_worked_values():
    out = induction(TruthValue(1, 1), TruthValue(1, 1))
    assert out == TruthValue(1, 0.5)  # weak-rule confidence cap at w = 1
    out = induction(TruthValue(0, 0.5), TruthValue(1, 1))
    assert abs(out.f) < TOL and abs(out.c - 1 / 3) < TOL
    assert induction(TruthValue(1, 1), TruthValue(0.4, 0)) == TruthValue(0, 0)


def test_revision_worked_values():
    out = revision(TruthValue(1, 0.5), TruthValue(1, 0.5))
    assert abs(out.f - 1) < TOL and abs(out.c - 2 / 3) < TOL
    out = revision(TruthValue(1, 0.5), TruthValue(0, 0.5))
    assert abs(out.f - 0.5) < TOL and abs(out.c - 2 / 3) < TOL
    tv = TruthValue(0.37, 0.61)
    out = revision(tv, TruthValue(0.9, 0))
    assert abs(out.f - tv.f) < TOL and abs(out.c - tv.c) < TOL


def test_probabilistic_revision_worked_values():
    out = probabilistic_revision(TruthValue(0.78, 0.5), TruthValue(0.78, 0.5))
    assert abs(out.f - 0.9516) < TOL and abs(out.c - 2 / 3) < TOL
    tv = TruthValue(0.42, 0.3)
    out = probabilistic_revision(tv, TruthValue(0, 0))
    assert abs(out.f - tv.f) < TOL and abs(out.c - tv.c) < TOL
    out = probabilistic_revision(TruthValue(1, 0.5), TruthValue(0.5, 0.5))
    assert abs(out.f - 1) < TOL and abs(out.c - 2 / 3) < TOL


def test_scale_evidence_worked_values():
    out = scale_evidence(TruthValue(1, 0.5), 0.5)
    assert abs(out.f - 1) < TOL and abs(out.c - 1 / 3) < TOL
    tv = TruthValue(0.3, 0.8)
    out = scale_evidence(tv, 1.0)
    assert abs(out.f - tv.f) < TOL and abs(out.c - tv.c) < TOL
    out = scale_evidence(TruthValue(1, 2 / 3), 0.25)
    assert abs(out.c - 1 / 3) < TOL


def test_scale_evidence_rejects_bad_factor():
    with pytest.raises(TruthDomainError):
        scale_evidence(TruthValue(1, 0.5), 0.0)
    with pytest.raises(TruthDomainError):
        scale_evidence(TruthValue(1, 0.5), -2.0)


# ---------------------------------------------------------------------------
# Oracle sweeps.


def test_rules_match_oracle_on_random_pairs():
    rng = random.Random(20240901)
    for _ in range(10_000):
        f1, c1 = rng.random(), rng.random() * 0.99
        f2, c2 = rng.random(), rng.random() * 0.99
        t1, t2 = TruthValue(f1, c1), TruthValue(f2, c2)
        for rule, oracle in (
            (deduction, oracle_deduction),
            (analogy, oracle_analogy),
            (conditional_deduction, oracle_deduction),
            (induction, oracle_induction),
            (revision, oracle_revision),
            (probabilistic_revision, oracle_prob_revision),
        ):
            got = rule(t1, t2)
            want_f, want_c = oracle(f1, c1, f2, c2)
            assert abs(got.f - want_f) <= TOL and abs(got.c - want_c) <= TOL


@given(st.lists(st.tuples(unit, conf), min_size=3, max_size=3))
@settings(max_examples=300)
def test_revision_commutative_associative(triple):
    tvs = [TruthValue(f, c) for f, c in triple]
    a = revision(revision(tvs[0], tvs[1]), tvs[2])
    b = revision(tvs[0], revision(tvs[1], tvs[2]))
    c = revision(revision(tvs[2], tvs[0]), tvs[1])
    for other in (b, c):
        assert abs(a.f - other.f) <= TOL and abs(a.c - other.c) <= TOL


@given(st.lists(st.tuples(unit, conf), min_size=3, max_size=3))
@settings(max_examples=300)
def test_probabilistic_revision_commutative_associative(triple):
    tvs = [TruthValue(f, c) for f, c in triple]
    a = probabilistic_revision(probabilistic_revision(tvs[0], tvs[1]), tvs[2])
    b = probabilistic_revision(tvs[0], probabilistic_revision(tvs[1], tvs[2]))
    c = probabilistic_revision(probabilistic_revision(tvs[2], tvs[0]), tvs[1])
    for other in (b, c):
        assert abs(a.f - other.f) <= TOL and abs(a.c - other.c) <= TOL


def test_probabilistic_fold_matches_continued_product():
    rng = random.Random(7)
    for n in range(1, 21):
        tvs = truth_values(n, rng)
        got = probabilistic_revision_fold(tvs)
        prod = 1.0
        for tv in tvs:
            prod *= 1.0 - tv.f
        assert abs(got.f - (1.0 - prod)) <= TOL
        chained = tvs[0]
        for tv in tvs[1:]:
            chained = probabilistic_revision(chained, tv)
        assert abs(got.f - chained.f) <= TOL and abs(got.c - chained.c) <= TOL


def test_revision_fold_matches_chained_binary():
    rng = random.Random(11)
    for n in range(1, 21):
        tvs = truth_values(n, rng)
        got = revision_fold(tvs)
        chained = tvs[0]
        for tv in tvs[1:]:
            chained = revision(chained, tv)
        assert abs(got.f - chained.f) <= TOL and abs(got.c - chained.c) <= TOL


@given(st.tuples(unit, conf), st.tuples(unit, conf))
def test_strong_rules_never_exceed_premise_confidence(p1, p2):
    t1, t2 = TruthValue(*p1), TruthValue(*p2)
    cap = min(t1.c, t2.c) + 1e-12
    assert deduction(t1, t2).c <= cap
    assert analogy(t1, t2).c <= cap
    assert conditional_deduction(t1, t2).c <= cap


@given(st.tuples(unit, conf), st.tuples(unit, conf))
def test_induction_confidence_cap(p1, p2):
    assert induction(TruthValue(*p1), TruthValue(*p2)).c <= 0.5 + 1e-12


@given(st.tuples(unit, conf), st.tuples(unit, conf))
def test_rule_outputs_stay_in_domain(p1, p2):
    t1, t2 = TruthValue(*p1), TruthValue(*p2)
    for rule in (deduction, analogy, conditional_deduction, induction, revision,
                 probabilistic_revision):
        out = rule(t1, t2)
        assert 0.0 <= out.f <= 1.0
        assert 0.0 <= out.c < 1.0


def test_full_confidence_accepted_by_strong_rules_only():
    fact = TruthValue(1, 1)
    assert deduction(fact, fact) == TruthValue(1, 1)
    assert analogy(fact, fact) == TruthValue(1, 1)
    with pytest.raises(TruthDomainError):
        revision(fact, TruthValue(1, 0.5))
    with pytest.raises(TruthDomainError):
        probabilistic_revision(TruthValue(1, 0.5), fact)


def test_truth_value_validation():
    with pytest.raises(TruthDomainError):
        TruthValue(1.5, 0.2)
    with pytest.raises(TruthDomainError):
        TruthValue(0.5, -0.2)
    with pytest.raises(TruthDomainError):
        TruthValue(math.nan, 0.5)
    # drift within tolerance is clamped, not rejected
    assert TruthValue(1.0 + 1e-12, 0.5).f == 1.0
    assert TruthValue(0.5, -1e-12).c == 0.0


def test_expectation_is_f_times_c():
    tv = TruthValue(0.8, 0.25)
    assert tv.expectation == 0.2
