"""Constructive witnesses: family points, escape bands, aligned digits."""

from fractions import Fraction

import pytest

from circlelab.circle import CirclePoint, EnclosureCache, FiniteDigits, FuncDigits, parse_point
from circlelab.classify import weakly_dli_witness_set
from circlelab.density import FiniteNatSet, IntervalNatSet, evens, prefix_density
from circlelab.errors import PreconditionError
from circlelab.sequences import ArithSeq, RatioSpec
from circlelab.witness import (
    arbault_witness,
    bad_interval_family,
    certify_nonmembership,
    continuum_exceptional_set,
    continuum_family_point,
    factor_u,
    nonmembership_partition,
)

LINEAR1 = ArithSeq(RatioSpec.linear(1))
POW2 = ArithSeq(RatioSpec.power(2))

WITNESS_A = weakly_dli_witness_set(LINEAR1, 8)  # {2,5,9,17,32,55,90,139}


def mod1(v: Fraction) -> Fraction:
    return v - (v.numerator // v.denominator)


# ----- the continuum family --------------------------------------------------

def test_family_point_support_selection():
    x = continuum_family_point(WITNESS_A, (0, 1, 0), LINEAR1)
    assert list(x.support().iter_upto(200)) == [5, 32, 55]
    # selector bit k picks element 2k or 2k+1 of the listed set
    y = continuum_family_point(WITNESS_A, (1, 0, 1), LINEAR1)
    assert list(y.support().iter_upto(200)) == [9, 17, 90]


def test_family_points_distinct_by_selector():
    seen = set()
    for bits in ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1),
                 (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1)):
        x = continuum_family_point(WITNESS_A, bits, LINEAR1)
        seen.add(x.as_fraction())
    assert len(seen) == 8


def test_family_point_validation():
    with pytest.raises(PreconditionError):
        continuum_family_point(WITNESS_A, (0, 1, 2), LINEAR1)
    with pytest.raises(PreconditionError):
        continuum_family_point(WITNESS_A, (0, 1, 0, 1), LINEAR1)  # needs 10 elements
    with pytest.raises(PreconditionError):
        continuum_family_point(evens(), (0, 1), LINEAR1)


def test_exceptional_set_structure():
    s = continuum_exceptional_set(WITNESS_A, 1, LINEAR1)
    # [1, n_1 - 1] followed by [n_{u_j}, n_{u_j + 1} - 1], boundaries from
    # n_k = 1 + k(k+1)/2
    assert s.to_intervals() == (
        (1, 3), (11, 15), (37, 45), (137, 153),
        (497, 528), (1486, 1540), (4006, 4095), (9592, 9730),
    )
    # the set off which family values shrink is itself sparse
    assert prefix_density(s, 9730).lo < Fraction(1, 25)


def test_exceptional_set_deeper_translate():
    s = continuum_exceptional_set(WITNESS_A, 2, LINEAR1)
    assert s.to_intervals()[:2] == ((1, 15), (29, 45))
    with pytest.raises(PreconditionError):
        continuum_exceptional_set(WITNESS_A, 0, LINEAR1)
    with pytest.raises(PreconditionError):
        continuum_exceptional_set(WITNESS_A, 9, LINEAR1)


# ----- the digit-size partition ----------------------------------------------

def test_partition_all_ones_pow2():
    x = parse_point("ones-on:all", POW2)
    p = nonmembership_partition(x, 10, 13, 14)
    assert p.branch == "cofinite"
    # n = 1 has c = b - 1 and is discarded; c/b = 2^-n crosses 1/10 at n = 4
    assert p.base == FiniteNatSet(range(2, 15))
    assert p.a1 == FiniteNatSet(range(4, 15))
    assert p.a2 == FiniteNatSet([])
    assert p.a3 == FiniteNatSet([2, 3])


def test_partition_infinite_branch():
    rule = FuncDigits(lambda n, b: 1 if n % 2 else 0,
                      attestation="zero on all even positions",
                      support_kind="infinite", label="odd-ones")
    p = nonmembership_partition(CirclePoint(POW2, rule), 10, 13, 14)
    assert p.branch == "infinite"
    assert p.base == FiniteNatSet([1, 3, 5, 7, 9, 11, 13])
    assert p.a1 == FiniteNatSet([5, 7, 9, 11, 13])
    assert p.a3 == FiniteNatSet([1, 3])


def test_partition_validation():
    x = parse_point("ones-on:all", POW2)
    with pytest.raises(PreconditionError):
        nonmembership_partition(x, 9, 13, 14)
    with pytest.raises(PreconditionError):
        nonmembership_partition(x, 10, 12, 14)
    with pytest.raises(PreconditionError):
        nonmembership_partition(parse_point("finite:[0,1]", POW2), 10, 13, 14)


# ----- escape intervals ------------------------------------------------------

def test_bad_intervals_small_case():
    x = parse_point("ones-on:all", POW2)
    bad = bad_interval_family(x, FiniteNatSet([4, 5]), "small", 10, 13, 10**4)
    # block k starts at n_{k-1}; with c = 1 the offsets are b//10 and 4b//10 - 1
    assert bad.to_intervals() == ((13, 17), (30, 38))


def test_bad_intervals_large_case():
    # c_5 = b_5 - 2 leaves gap 2; one escape interval inside block 5
    digits = [0, 0, 0, 0, 30]
    x = CirclePoint(POW2, FiniteDigits(digits))
    bad = bad_interval_family(x, FiniteNatSet([5]), "large", 10, 13, 10**4)
    assert bad.to_intervals() == ((36, 40),)


def test_bad_intervals_validation():
    x = parse_point("ones-on:all", POW2)
    with pytest.raises(PreconditionError):
        bad_interval_family(x, FiniteNatSet([4]), "medium", 10, 13, 100)
    with pytest.raises(PreconditionError):
        bad_interval_family(x, FiniteNatSet([4]), "small", 9, 13, 100)
    # zero digit on the small branch is a caller error
    y = CirclePoint(POW2, FiniteDigits([0, 1]))
    with pytest.raises(PreconditionError):
        bad_interval_family(y, FiniteNatSet([1]), "small", 10, 13, 100)


def test_certify_small_case_rows():
    x = parse_point("ones-on:all", POW2)
    bad = bad_interval_family(x, FiniteNatSet([4, 5]), "small", 10, 13, 10**4)
    report = certify_nonmembership(x, bad, "small", 10, 13, t=8, horizon=10**4)
    assert report.violations == 0 and report.undecided == 0
    assert report.certified == len(report.rows) == 14
    for row in report.rows:
        assert Fraction(1, 10) <= row.lo and row.hi <= Fraction(9, 10)


def test_certify_large_case_exact():
    x = CirclePoint(POW2, FiniteDigits([0, 0, 0, 0, 30]))
    bad = bad_interval_family(x, FiniteNatSet([5]), "large", 10, 13, 10**4)
    report = certify_nonmembership(x, bad, "large", 10, 13, t=8, horizon=10**4)
    assert report.certified == 5 and report.violations == 0
    # exact values {15 r / 16} for r = 10..14, against the band [1/13, 12/13]
    values = [row.lo for row in report.rows]
    assert values == [Fraction(3, 8), Fraction(5, 16), Fraction(1, 4),
                      Fraction(3, 16), Fraction(1, 8)]


def test_certify_flags_genuine_violations():
    # feeding the certifier a whole block instead of the escape family makes
    # the rows near the block edges leave the band: with c_5 = 1 the values
    # r/32 fall below 1/10 for r <= 3 and above 9/10 for r >= 29
    x = CirclePoint(POW2, FiniteDigits([0, 0, 0, 0, 1]))
    block = IntervalNatSet([(27, 57)])
    report = certify_nonmembership(x, block, "small", 10, 13, t=8, horizon=100)
    assert report.violations == 6
    assert report.certified == 25


def test_witness_report_counts_and_shape():
    x = parse_point("ones-on:all", POW2)
    bad = bad_interval_family(x, FiniteNatSet([4]), "small", 10, 13, 10**4)
    report = certify_nonmembership(x, bad, "small", 10, 13, t=8, horizon=10**4)
    doc = report.to_report()
    assert doc["counts"]["rows"] == len(doc["rows"])
    assert doc["counts"]["certified"] == report.certified
    assert doc["params"]["band_lo"] == "1/10"
    assert doc["point"] == x.describe()


# ----- factorization and aligned digits --------------------------------------

def test_factor_u_examples():
    assert factor_u(48, LINEAR1) == (3, 2)
    assert factor_u(1, LINEAR1) == (0, 1)
    assert factor_u(7, LINEAR1) == (0, 7)
    for n in range(1, 9):
        u = LINEAR1.term(n) + LINEAR1.term(n - 1)
        k, v = factor_u(u, LINEAR1)
        assert (k, v) == (n - 1, LINEAR1.ratio(n) + 1)
        assert u == v * LINEAR1.term(k)
        assert v % LINEAR1.ratio(k + 1) != 0


def test_factor_u_validation():
    with pytest.raises(PreconditionError):
        factor_u(0, LINEAR1)


def test_arbault_witness_linear1():
    u_list = [LINEAR1.term(n) + LINEAR1.term(n - 1) for n in range(1, 61)]
    report = arbault_witness(LINEAR1, u_list, rows=20, depth=8)
    assert len(report.rows) == 20
    assert report.certified == 20
    assert report.extras["existence_failures"] == 0
    # greedy selection skips u_1, u_5, u_9 (their alignment divisor m divides b)
    assert report.extras["selection"] == \
        "2,6,10,12,14,16,18,20,22,24,26,28,30,32,34,36,38,40,42,44"
    assert report.extras["skipped"] == 3
    for row in report.rows:
        assert Fraction(1, 4) <= row.lo and row.hi <= Fraction(7, 8)


def test_arbault_certifies_true_values():
    """The certified enclosures are points and match direct arithmetic."""
    u_list = [LINEAR1.term(n) + LINEAR1.term(n - 1) for n in range(1, 61)]
    report = arbault_witness(LINEAR1, u_list, rows=6, depth=8)
    x = parse_point(report.point, LINEAR1)
    value = x.as_fraction()
    for row in report.rows:
        assert row.lo == row.hi == mod1(u_list[row.index - 1] * value)


def test_arbault_separation_is_respected():
    u_list = [LINEAR1.term(n) + LINEAR1.term(n - 1) for n in range(1, 61)]
    report = arbault_witness(LINEAR1, u_list, rows=10, depth=8)
    picks = [int(s) for s in report.extras["selection"].split(",")]
    for prev, cur in zip(picks, picks[1:]):
        k, _ = factor_u(u_list[cur - 1], LINEAR1)
        assert LINEAR1.term(k) >= 8 * u_list[prev - 1]


def test_arbault_validation():
    with pytest.raises(PreconditionError):
        arbault_witness(LINEAR1, [], rows=5)
    with pytest.raises(PreconditionError):
        arbault_witness(LINEAR1, [5, 3], rows=5)
    with pytest.raises(PreconditionError):
        arbault_witness(LINEAR1, [2, 4], rows=0)
    # all alignments unusable: u = a_1 * v with v odd makes m = 2 divide b_2?
    # under const 2 every b = 2 and every m = 2 divides it
    const2 = ArithSeq(RatioSpec.constant(2))
    with pytest.raises(PreconditionError):
        arbault_witness(const2, [1, 3, 5], rows=3)
