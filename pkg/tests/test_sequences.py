"""Ratio specs, the arithmetic sequence, and its derived enumeration."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from circlelab.errors import PreconditionError, SpecParseError
from circlelab.sequences import ArithSeq, DerivedSeq, RatioSpec, cube_block_edges

LINEAR1 = ArithSeq(RatioSpec.linear(1))
POW2 = ArithSeq(RatioSpec.power(2))
CONST2 = ArithSeq(RatioSpec.constant(2))


def brute_derived(seq: ArithSeq, limit: int) -> list[int]:
    """Independent enumeration of {r * a_k : 1 <= r < b_{k+1}} up to limit."""
    values = []
    k = 0
    while seq.term(k) <= limit:
        a = seq.term(k)
        for r in range(1, seq.ratio(k + 1)):
            if r * a <= limit:
                values.append(r * a)
        k += 1
    return sorted(values)


# ----- frozen listings -------------------------------------------------------

def test_factorial_terms():
    assert [LINEAR1.term(k) for k in range(6)] == [1, 2, 6, 24, 120, 720]


def test_pow2_terms():
    # a_k = 2^(1+2+...+k)
    assert POW2.term(4) == 1024
    for k in range(10):
        assert POW2.term(k) == 2 ** (k * (k + 1) // 2)


def test_derived_prefix_linear1():
    assert [LINEAR1.derived.term(i) for i in range(1, 8)] == [1, 2, 4, 6, 12, 18, 24]


def test_derived_prefix_pow2():
    assert [POW2.derived.term(i) for i in range(1, 12)] == \
        [1, 2, 4, 6, 8, 16, 24, 32, 40, 48, 56]


def test_derived_const2_is_powers_of_two():
    # each block holds the single multiple 1 * a_k
    for i in range(1, 20):
        assert CONST2.derived.term(i) == 2 ** (i - 1)


def test_boundary_closed_forms():
    for k in range(30):
        assert LINEAR1.derived.boundary(k) == 1 + k * (k + 1) // 2
        assert POW2.derived.boundary(k) == 2 ** (k + 1) - k - 1
        assert CONST2.derived.boundary(k) == k + 1


def test_boundary_recurrence():
    for seq in (LINEAR1, POW2):
        d = seq.derived
        assert d.boundary(0) == 1
        for k in range(12):
            assert d.boundary(k + 1) == d.boundary(k) + seq.ratio(k + 1) - 1


# ----- enumeration against a brute-force oracle ------------------------------

@pytest.mark.parametrize("seq,limit", [(LINEAR1, 5000), (POW2, 5000), (CONST2, 4096)])
def test_derived_matches_brute_force(seq, limit):
    oracle = brute_derived(seq, limit)
    got = []
    i = 1
    while True:
        v = seq.derived.term(i)
        if v > limit:
            break
        got.append(v)
        i += 1
    assert got == oracle


def test_block_start_is_term():
    # d at a block boundary is the plain sequence term: d_{n_k} = a_k
    for seq in (LINEAR1, POW2):
        for k in range(10):
            assert seq.derived.term(seq.derived.boundary(k)) == seq.term(k)


@given(i=st.integers(min_value=1, max_value=10**4))
@settings(max_examples=200, deadline=None)
def test_decompose_round_trip(i):
    for seq in (LINEAR1, POW2):
        k, r = seq.derived.decompose(i)
        assert 1 <= r < seq.ratio(k + 1)
        assert seq.derived.boundary(k) + r - 1 == i
        assert seq.derived.term(i) == r * seq.term(k)


def test_derived_strictly_increasing():
    for seq in (LINEAR1, POW2, CONST2):
        vals = [seq.derived.term(i) for i in range(1, 400)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_block_extent():
    d = LINEAR1.derived
    for k in range(8):
        lo, hi = d.block(k)
        assert (lo, hi) == (d.boundary(k), d.boundary(k + 1) - 1)
        assert hi - lo + 1 == LINEAR1.ratio(k + 1) - 1


def test_index_validation():
    with pytest.raises(PreconditionError):
        LINEAR1.derived.term(0)
    with pytest.raises(PreconditionError):
        LINEAR1.term(-1)
    with pytest.raises(PreconditionError):
        LINEAR1.ratio(0)
    with pytest.raises(PreconditionError):
        LINEAR1.derived.boundary(-1)


# ----- ratio specs ----------------------------------------------------------

def test_spec_validation():
    with pytest.raises(PreconditionError):
        RatioSpec.constant(1)
    with pytest.raises(PreconditionError):
        RatioSpec.linear(0)
    with pytest.raises(PreconditionError):
        RatioSpec.power(1)
    with pytest.raises(PreconditionError):
        RatioSpec.explicit([3, 1], RatioSpec.constant(2))
    with pytest.raises(PreconditionError):
        RatioSpec.blocks(1)


def test_explicit_tail_indexing():
    # the tail rule sees the absolute index, not one relative to the prefix
    spec = RatioSpec.explicit([5, 5], RatioSpec.linear(1))
    assert [spec.term(n) for n in range(1, 6)] == [5, 5, 4, 5, 6]


def test_eventually_two():
    assert RatioSpec.constant(2).eventually_two()
    assert RatioSpec.blocks(4).eventually_two()
    assert RatioSpec.explicit([7], RatioSpec.constant(2)).eventually_two()
    assert not RatioSpec.constant(3).eventually_two()
    assert not RatioSpec.linear(1).eventually_two()
    assert not RatioSpec.power(2).eventually_two()


@pytest.mark.parametrize("text", [
    "const:2", "linear:1", "pow:2", "dlictrex:4",
    "explicit:[3,4];tail=const:2",
    "explicit:[2];tail=explicit:[5];tail=linear:2",
])
def test_parse_describe_round_trip(text):
    spec = RatioSpec.parse(text)
    assert RatioSpec.parse(spec.describe()) == spec


def test_parse_defaults_and_errors():
    assert RatioSpec.parse("dlictrex") == RatioSpec.blocks(20)
    for bad in ("nope:3", "const:", "const:x", "linear:0", "explicit:[2]",
                "explicit:2;tail=const:2", "file:/no/such/ratios"):
        with pytest.raises(SpecParseError):
            RatioSpec.parse(bad)


def test_parse_ratio_file(tmp_path):
    path = tmp_path / "ratios.txt"
    path.write_text("# header\n3\n4\n\ntail:const:2\n")
    spec = RatioSpec.parse(f"file:{path}")
    assert spec == RatioSpec.explicit([3, 4], RatioSpec.constant(2))


def test_block_spec_boundaries_enumerate_cube_gap_set():
    """Boundary(k) walks exactly the elements of the first jmax cube-gap blocks."""
    jmax = 4
    elems = []
    for g, h in itertools.islice(cube_block_edges(), jmax):
        elems.extend(range(g, h + 1))
    d = ArithSeq(RatioSpec.blocks(jmax)).derived
    for k, e in enumerate(elems):
        assert d.boundary(k) == e
    # past the enumerated blocks the tail ratio 2 steps the boundary by 1
    assert d.boundary(len(elems)) == elems[-1] + 1


def test_derived_seq_caches_per_base():
    assert isinstance(LINEAR1.derived, DerivedSeq)
    assert LINEAR1.derived is LINEAR1.derived
