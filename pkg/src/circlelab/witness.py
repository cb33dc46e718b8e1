"""Constructive witnesses: continuum-family points, certified escape bands,
and the aligned-digit construction for multiplier sequences u_n = a_{k_n} v_n.

Everything here produces evidence objects. A certification row carries the
exact enclosure it was judged on; a row that cannot be certified is reported
as undecided or as a violation (a violation falsifies the implementation, and
the suites treat it that way).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .circle import (
    CirclePoint,
    EnclosureCache,
    FiniteDigits,
    FloorDivDigits,
)
from .density import FiniteNatSet, IntervalNatSet, NatSet
from .errors import PreconditionError
from .sequences import ArithSeq

__all__ = [
    "CertRow",
    "WitnessReport",
    "continuum_family_point",
    "Partition",
    "nonmembership_partition",
    "bad_interval_family",
    "certify_nonmembership",
    "continuum_exceptional_set",
    "factor_u",
    "arbault_witness",
]


@dataclass(frozen=True)
class CertRow:
    """One certified evaluation: index, enclosure, and the band verdict."""

    index: int
    lo: Fraction
    hi: Fraction
    verdict: str  # "certified" | "violation" | "undecided"

    def to_report(self) -> dict:
        return {"index": self.index, "lo": str(self.lo), "hi": str(self.hi),
                "verdict": self.verdict}


@dataclass
class WitnessReport:
    """A named evidence bundle: parameters, per-row certifications, summary."""

    name: str
    params: dict
    point: str
    rows: list[CertRow] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def certified(self) -> int:
        return sum(1 for row in self.rows if row.verdict == "certified")

    @property
    def violations(self) -> int:
        return sum(1 for row in self.rows if row.verdict == "violation")

    @property
    def undecided(self) -> int:
        return sum(1 for row in self.rows if row.verdict == "undecided")

    def to_report(self) -> dict:
        return {
            "name": self.name,
            "params": {k: str(v) for k, v in sorted(self.params.items())},
            "point": self.point,
            "counts": {"certified": self.certified, "violations": self.violations,
                       "undecided": self.undecided, "rows": len(self.rows)},
            "rows": [row.to_report() for row in self.rows],
            "extras": {k: str(v) for k, v in sorted(self.extras.items())},
        }


# ===== Continuum family ======================================================


def continuum_family_point(a_set: NatSet, zeta: Sequence[int],
                           seq: ArithSeq) -> CirclePoint:
    """The point with c_n = 1 on {A_{2k + zeta_k} : 1 <= k <= len(zeta)}.

    A is listed increasingly as A_1 < A_2 < ...; distinct selector strings
    give points with distinct supports, which is what makes the family large.
    Requires at least 2*len(zeta) + 2 listed elements.
    """
    if a_set.is_finite is not True:
        raise PreconditionError("the index set must be finite and listable")
    ivals = a_set.to_intervals()
    elems = list(a_set.iter_upto(ivals[-1][1])) if ivals else []
    if any(bit not in (0, 1) for bit in zeta):
        raise PreconditionError("selector entries must be 0 or 1")
    need = 2 * len(zeta) + 2
    if len(elems) < need:
        raise PreconditionError(
            f"index set has {len(elems)} elements, selector of length "
            f"{len(zeta)} needs at least {need}"
        )
    chosen = {elems[2 * k + bit - 1] for k, bit in enumerate(zeta, start=1)}
    top = max(chosen, default=0)
    digits = [1 if n in chosen else 0 for n in range(1, top + 1)]
    return CirclePoint(seq, FiniteDigits(digits))


def continuum_exceptional_set(a_set: NatSet, m: int, seq: ArithSeq) -> IntervalNatSet:
    """The derived-index set off which every family point has small values.

    For A listed as {u_j + 1}, this is [1, n_{u_m - m + 1} - 1] together with
    [n_{u_j - m + 1}, n_{u_j + 1} - 1] for j >= m, truncated at the largest
    listed element; valid for prefix windows up to n_{u_J + 1} - 1 where u_J
    is that largest element.
    """
    if a_set.is_finite is not True:
        raise PreconditionError("the index set must be finite and listable")
    ivals = a_set.to_intervals()
    elems = list(a_set.iter_upto(ivals[-1][1])) if ivals else []
    u = [v - 1 for v in elems]
    if m < 1 or m > len(u):
        raise PreconditionError(f"m must be in [1, {len(u)}]")
    derived = seq.derived
    parts = [(1, derived.boundary(u[m - 1] - m + 1) - 1)]
    for j in range(m, len(u) + 1):
        parts.append((derived.boundary(u[j - 1] - m + 1),
                      derived.boundary(u[j - 1] + 1) - 1))
    return IntervalNatSet(parts)


# ===== Escape-band certification ============================================


class Partition(NamedTuple):
    """The digit-size partition of the working index set."""

    a1: FiniteNatSet  # 0 < c_n/b_n < 1/m0
    a2: FiniteNatSet  # 1 - 1/n0 < c_n/b_n < 1
    a3: FiniteNatSet  # the middle band
    branch: str       # "cofinite" or "infinite"
    base: FiniteNatSet


def nonmembership_partition(x: CirclePoint, m0: int, n0: int,
                            horizon: int) -> Partition:
    """Split the working set A by the relative digit size c_n / b_n.

    For a point with declared co-finite support, A = supp(x) minus the
    quasi-support {n : c_n = b_n - 1}; for declared infinite (non-co-finite)
    support, A = {n : c_n != 0, c_{n+1} = 0}. Cut points are 1/m0 and
    1 - 1/n0, compared exactly; m0 > 9 and n0 > 12 are required.
    """
    if m0 <= 9:
        raise PreconditionError("m0 must exceed 9")
    if n0 <= 12:
        raise PreconditionError("n0 must exceed 12")
    if horizon < 1:
        raise PreconditionError("horizon must be >= 1")
    kind = x.support_kind()
    if kind == "finite":
        raise PreconditionError(
            "the escape construction needs infinite support; finite-support "
            "points are genuine members"
        )
    if kind == "cofinite":
        branch = "cofinite"
    elif kind == "infinite":
        branch = "infinite"
    else:
        raise PreconditionError(
            "support form is undeclared; expand or declare the digit rule"
        )
    lo_cut = Fraction(1, m0)
    hi_cut = 1 - Fraction(1, n0)
    base, a1, a2, a3 = [], [], [], []
    for n in range(1, horizon + 1):
        c = x.digit(n)
        if c == 0:
            continue
        b = x.seq.ratio(n)
        if branch == "cofinite":
            if c == b - 1:
                continue
        else:
            if x.digit(n + 1) != 0:
                continue
        base.append(n)
        ratio = Fraction(c, b)
        if ratio < lo_cut:
            a1.append(n)
        elif ratio > hi_cut:
            a2.append(n)
        else:
            a3.append(n)
    return Partition(FiniteNatSet(a1), FiniteNatSet(a2), FiniteNatSet(a3),
                     branch, FiniteNatSet(base))


def bad_interval_family(x: CirclePoint, branch_set: NatSet, case: str,
                        m0: int, n0: int, horizon: int) -> IntervalNatSet:
    """Derived-index intervals inside the lifted branch where values escape.

    Case "small" (the A1 branch, digits with c/b < 1/m0) places, for each
    block k and 0 <= m <= c_k // m0, the interval

        [n_{k-1} + floor((m + 1/m0) b_k / c_k),
         n_{k-1} + floor((m + 4/m0) b_k / c_k) - 1];

    case "large" (the A2 branch) uses cut points (m + 8/n0) and (m + 12/n0)
    scaled by b_k / (b_k - c_k) with 0 <= m <= (b_k - c_k) // (2 n0).
    All interval arithmetic is exact; the family is clipped to the block and
    to [1, horizon].
    """
    if case not in ("small", "large"):
        raise PreconditionError(f"case must be 'small' or 'large', got {case!r}")
    if m0 <= 9 or n0 <= 12:
        raise PreconditionError("need m0 > 9 and n0 > 12")
    derived = x.seq.derived
    parts = []
    for k in branch_set.iter_upto(horizon):
        c = x.digit(k)
        b = x.seq.ratio(k)
        base = derived.boundary(k - 1)
        block_hi = derived.boundary(k) - 1
        if base > horizon:
            break
        if case == "small":
            if c == 0:
                raise PreconditionError(f"branch index {k} has zero digit")
            for m in range(c // m0 + 1):
                lo_off = ((m * m0 + 1) * b) // (m0 * c)
                hi_off = ((m * m0 + 4) * b) // (m0 * c) - 1
                lo = base + lo_off
                hi = min(base + hi_off, block_hi, horizon)
                if lo <= hi:
                    parts.append((lo, hi))
        else:
            gap = b - c
            if gap <= 0:
                raise PreconditionError(f"branch index {k} has a maximal digit")
            for m in range(gap // (2 * n0) + 1):
                lo_off = ((m * n0 + 8) * b) // (n0 * gap)
                hi_off = ((m * n0 + 12) * b) // (n0 * gap) - 1
                lo = base + lo_off
                hi = min(base + hi_off, block_hi, horizon)
                if lo <= hi:
                    parts.append((lo, hi))
    return IntervalNatSet(parts)


def certify_nonmembership(x: CirclePoint, bad: NatSet, case: str, m0: int,
                          n0: int, t: int, horizon: int) -> WitnessReport:
    """Certify the escape band row by row over the bad intervals.

    Case "small" certifies {d_i x} in [1/m0, 9/m0]; case "large" certifies
    ||d_i x|| >= min(3/(2 n0), 1 - 12/n0), i.e. {d_i x} inside the symmetric
    band around 1/2 at that distance from the edges. Undecided rows are
    flagged and excluded from the certified count.
    """
    if case == "small":
        band_lo, band_hi = Fraction(1, m0), Fraction(9, m0)
    elif case == "large":
        floor = min(Fraction(3, 2 * n0), 1 - Fraction(12, n0))
        band_lo, band_hi = floor, 1 - floor
    else:
        raise PreconditionError(f"case must be 'small' or 'large', got {case!r}")
    cache = EnclosureCache(x, depth=t)
    derived = x.seq.derived
    rows = []
    for i in bad.iter_upto(horizon):
        k, r = derived.decompose(i)
        verdict = cache.band_verdict(k, r, band_lo, band_hi)
        enc = cache.interval(k, r)
        label = {"in": "certified", "out": "violation", "undecided": "undecided"}[verdict]
        rows.append(CertRow(i, enc.lo, enc.hi, label))
    report = WitnessReport(
        name="escape-band",
        params={"case": case, "m0": m0, "n0": n0, "depth": t, "horizon": horizon,
                "band_lo": band_lo, "band_hi": band_hi},
        point=x.describe(),
        rows=rows,
    )
    report.extras["spec"] = x.seq.describe()
    return report


# ===== Aligned-digit witnesses ==============================================


def factor_u(u: int, seq: ArithSeq) -> tuple[int, int]:
    """Write u = a_k * v with k maximal; then b_{k+1} does not divide v.

    The divisor set {j : a_j | u} is an initial segment because each a_j
    divides the next, so the maximal k is found by walking upward.
    """
    if u < 1:
        raise PreconditionError(f"u must be >= 1, got {u}")
    k = 0
    while u % seq.term(k + 1) == 0:
        k += 1
    return k, u // seq.term(k)


def _aligned_choice(seq: ArithSeq, k: int, v: int):
    """Digit alignment at position k + 1 for the factor u = a_k * v.

    With b = b_{k+1} and l = v mod b (never 0 since b does not divide v), the
    divisor is m = 2l when l <= b/2, else m = 2(b - l). The choice is usable
    when some e in {1, ..., m-1} gives floor(b/m) = (b - e)/m, i.e. exactly
    when m does not divide b; that existence is verified here, per index.
    """
    b = seq.ratio(k + 1)
    l = v % b
    if l == 0:
        raise PreconditionError(f"b_{k + 1} divides v = {v}; factorization broken")
    m = 2 * l if 2 * l <= b else 2 * (b - l)
    e = b % m
    ok = 1 < m <= b and e != 0
    return b, l, m, e, ok


def arbault_witness(seq: ArithSeq, u_list: Sequence[int], rows: int = 20,
                    depth: int = 8) -> WitnessReport:
    """Build a point whose values along a subsequence of u stay in [1/4, 7/8].

    Greedy selection: s_1 is the first index whose digit alignment is usable,
    and each next pick is the first later index with a_{k_s} >= 8 * u_{prev}
    and a usable alignment; indices rejected for an unusable alignment are
    recorded in the report. The point has c_{k_s + 1} = floor(b / m) on the
    selected positions and 0 elsewhere, so it is rational and every row is
    certified exactly.
    """
    if not u_list:
        raise PreconditionError("the multiplier list must be non-empty")
    if any(b >= c for b, c in zip(u_list, u_list[1:])):
        raise PreconditionError("the multiplier list must be strictly increasing")
    if rows < 1:
        raise PreconditionError("must certify at least one row")
    factored = [factor_u(u, seq) for u in u_list]
    picks: list[int] = []
    alignments = []
    skipped = []
    prev_u = None
    for idx, (u, (k, v)) in enumerate(zip(u_list, factored)):
        if len(picks) >= rows:
            break
        if prev_u is not None and seq.term(k) < 8 * prev_u:
            continue
        b, l, m, e, ok = _aligned_choice(seq, k, v)
        if not ok:
            skipped.append({"index": idx + 1, "u": u, "b": b, "m": m,
                            "reason": "m divides b, no usable e"})
            continue
        picks.append(idx)
        alignments.append((k, v, b, l, m, e))
        prev_u = u
    if not picks:
        raise PreconditionError("no multiplier admitted a usable digit alignment")
    divisors = {k + 1: m for (k, v, b, l, m, e) in alignments}
    x = CirclePoint(seq, FloorDivDigits(divisors))
    band_lo, band_hi = Fraction(1, 4), Fraction(7, 8)
    cache = EnclosureCache(x, depth=depth)
    out_rows = []
    existence_failures = 0
    for pick, (k, v, b, l, m, e) in zip(picks, alignments):
        c = x.digit(k + 1)
        # re-derive e from the placed digit: usable iff 1 <= b - m*c <= m - 1
        e_check = b - m * c
        if not 1 <= e_check <= m - 1:
            existence_failures += 1
        enc = cache.interval(k, v)
        if enc.undecided:
            verdict = "undecided"
        elif band_lo <= enc.lo and enc.hi <= band_hi:
            verdict = "certified"
        else:
            verdict = "violation"
        out_rows.append(CertRow(pick + 1, enc.lo, enc.hi, verdict))
    report = WitnessReport(
        name="aligned-digit-witness",
        params={"rows": rows, "depth": depth, "band_lo": band_lo,
                "band_hi": band_hi},
        point=x.describe(),
        rows=out_rows,
    )
    report.extras.update({
        "spec": seq.describe(),
        "selection": ",".join(str(p + 1) for p in picks),
        "existence_failures": existence_failures,
        "skipped": len(skipped),
        "skipped_detail": "; ".join(
            f"u_{d['index']}={d['u']} (b={d['b']}, m={d['m']})" for d in skipped
        ),
    })
    return report
