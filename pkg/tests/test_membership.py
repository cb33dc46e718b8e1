"""Membership verdicts and the statistical escape-set scan."""

from fractions import Fraction

import pytest

from circlelab.circle import parse_point
from circlelab.classify import weakly_dli_witness_set
from circlelab.density import DensityEstimate
from circlelab.errors import PreconditionError
from circlelab.membership import (
    ScanResult,
    convergence_verdict,
    finite_support_member,
    statistical_scan,
)
from circlelab.sequences import ArithSeq, RatioSpec
from circlelab.witness import continuum_family_point

LINEAR1 = ArithSeq(RatioSpec.linear(1))
POW2 = ArithSeq(RatioSpec.power(2))


def mod1(v: Fraction) -> Fraction:
    return v - (v.numerator // v.denominator)


# ----- support-based verdicts -------------------------------------------------

def test_member_by_finite_support():
    v = finite_support_member(parse_point("rat:1/6", LINEAR1))
    assert v.status == "member"
    assert not v.citation_dependent
    assert v.cutoff == 4  # boundary of the last supported block


def test_member_zero_point():
    v = finite_support_member(parse_point("finite:[]", LINEAR1))
    assert v.status == "member" and v.cutoff == 1


def test_non_member_is_citation_dependent():
    v = finite_support_member(parse_point("ones-on:all", POW2))
    assert v.status == "non-member"
    assert v.citation_dependent
    doc = v.to_report()
    assert doc["citation_dependent"] is True and "cutoff" not in doc


def test_undeclared_support_is_inconclusive():
    v = finite_support_member(parse_point("rat:1/3", POW2))
    assert v.status == "inconclusive"


# ----- scans ------------------------------------------------------------------

def test_scan_sixth_at_hundred():
    scan = statistical_scan(parse_point("rat:1/6", LINEAR1), Fraction(1, 10), [100])
    assert scan.bounds() == [(Fraction(3, 100), Fraction(3, 100))]
    assert scan.undecided_rows == []


def test_scan_counts_match_exact_oracle():
    x = continuum_family_point(weakly_dli_witness_set(LINEAR1, 8), (0, 1, 0), LINEAR1)
    value = x.as_fraction()
    eps = Fraction(1, 10)
    scan = statistical_scan(x, eps, [100, 1000])
    for est in scan.estimates:
        want = sum(
            1 for i in range(1, est.N + 1)
            if eps <= mod1(LINEAR1.derived.term(i) * value) <= 1 - eps
        )
        assert est.in_count == want and est.undecided_count == 0


def test_scan_unit_fraction_pattern():
    # x = 1/a_m: every row before n_m is in band for eps = 1/a_m, all later
    # rows are exactly 0
    for seq in (LINEAR1, POW2):
        for m in (2, 3, 4):
            a_m = seq.term(m)
            n_m = seq.derived.boundary(m)
            scan = statistical_scan(parse_point(f"rat:1/{a_m}", seq),
                                    Fraction(1, a_m), [2000])
            c = n_m - 1
            assert scan.bounds() == [(Fraction(c, 2000), Fraction(c, 2000))]


def test_scan_horizons_are_cumulative():
    x = parse_point("ones-on:all", POW2)
    scan = statistical_scan(x, Fraction(1, 8), [50, 200, 1000], depth=16)
    assert scan.horizons == (50, 200, 1000)
    ins = [e.in_count for e in scan.estimates]
    assert ins[0] <= ins[1] <= ins[2]
    for e in scan.estimates:
        assert e.in_count + e.out_count + e.undecided_count == e.N


def test_scan_capped_point_degrades_to_undecided():
    x = parse_point("rat:1/3", POW2, horizon=12)
    scan = statistical_scan(x, Fraction(1, 10), [120])
    est = scan.estimates[0]
    assert est.undecided_count > 0
    assert est.lo < est.hi
    assert scan.undecided_rows[0] >= 1


def test_scan_validation():
    x = parse_point("rat:1/6", LINEAR1)
    with pytest.raises(PreconditionError):
        statistical_scan(x, Fraction(1, 2), [100])
    with pytest.raises(PreconditionError):
        statistical_scan(x, Fraction(0), [100])
    with pytest.raises(PreconditionError):
        statistical_scan(x, Fraction(1, 10), [])
    with pytest.raises(PreconditionError):
        statistical_scan(x, Fraction(1, 10), [0, 10])


def test_scan_report_shape():
    scan = statistical_scan(parse_point("rat:1/6", LINEAR1), Fraction(1, 10), [100])
    doc = scan.to_report()
    assert doc["eps"] == "1/10"
    assert doc["bounds"][0]["lo"] == "3/100"
    assert doc["spec"] == "linear:1"


# ----- convergence heuristics --------------------------------------------------

def synthetic_scan(rows):
    return ScanResult(
        eps=Fraction(1, 10), depth=8, cap=64,
        horizons=tuple(N for N, _, _, _ in rows),
        estimates=[DensityEstimate(*row) for row in rows],
    )


def test_verdict_indecision_dominates():
    scan = synthetic_scan([(10, 1, 3, 6)])
    assert convergence_verdict(scan)["verdict"] == "inconclusive"


def test_verdict_zero_upper_bound():
    scan = statistical_scan(parse_point("finite:[]", LINEAR1), Fraction(1, 10), [100])
    out = convergence_verdict(scan)
    assert out["verdict"] == "evidence-for"
    assert "exactly 0" in out["rule"]


def test_verdict_halving_upper_bounds():
    scan = synthetic_scan([(100, 40, 60, 0), (1000, 150, 850, 0)])
    assert convergence_verdict(scan)["verdict"] == "evidence-for"


def test_verdict_positive_lower_bound():
    scan = synthetic_scan([(100, 80, 20, 0), (1000, 820, 180, 0)])
    assert convergence_verdict(scan)["verdict"] == "evidence-against"


def test_verdict_no_rule():
    # upper bounds decrease but do not halve, lower bounds stay at zero
    scan = synthetic_scan([(100, 0, 60, 40), (1000, 0, 650, 350)])
    assert convergence_verdict(scan)["verdict"] == "inconclusive"
    with pytest.raises(PreconditionError):
        convergence_verdict(synthetic_scan([]))


def test_real_scan_reaches_evidence_for():
    x = continuum_family_point(weakly_dli_witness_set(LINEAR1, 8), (0, 1, 0), LINEAR1)
    scan = statistical_scan(x, Fraction(1, 10), [1000, 10000])
    assert convergence_verdict(scan)["verdict"] == "evidence-for"
