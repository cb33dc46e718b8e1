"""Subsets of the positive integers, prefix densities, and block lifting.

Four set representations are supported: finite element lists, bounded unions
of closed intervals, rule-generated interval families (possibly unbounded),
and predicates with a declared evaluation horizon. Prefix counting follows
the convention that the naturals start at 1, so the density estimate at N
uses the window [1, N].

The lifting map sends a set A of block indices to
L(A) = union over k in A of [n_{k-1}, n_k - 1] in derived-index space.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .errors import HorizonError, PreconditionError, SpecParseError
from .sequences import ArithSeq, DerivedSeq, RatioSpec, cube_block_edges

__all__ = [
    "NatSet",
    "FiniteNatSet",
    "IntervalNatSet",
    "LazyIntervalNatSet",
    "PredicateNatSet",
    "DensityEstimate",
    "prefix_density",
    "lift",
    "translate",
    "union",
    "intersect",
    "difference",
    "cube_gap_blocks",
    "evens",
    "squares",
    "full_set",
    "parse_set_expr",
]


class NatSet:
    """Abstract subset of {1, 2, 3, ...}.

    Membership queries are total for every n up to ``horizon`` (None meaning
    unbounded); anything beyond raises HorizonError rather than guessing.
    ``is_finite``/``is_cofinite`` are declared traits: True/False when known,
    None when the representation cannot decide.
    """

    horizon: int | None = None
    is_finite: bool | None = None
    is_cofinite: bool | None = None

    def __contains__(self, n: int) -> bool:
        raise NotImplementedError

    def count_upto(self, N: int) -> int:
        raise NotImplementedError

    def iter_upto(self, N: int) -> Iterator[int]:
        for n in range(1, N + 1):
            if n in self:
                yield n

    def _check(self, N: int) -> None:
        if N < 1:
            raise PreconditionError(f"prefix bound must be >= 1, got {N}")
        if self.horizon is not None and N > self.horizon:
            raise HorizonError(
                f"query up to {N} exceeds the declared horizon {self.horizon}"
            )

    def to_intervals(self) -> tuple[tuple[int, int], ...]:
        """Canonical disjoint closed intervals; only for exactly bounded sets."""
        raise PreconditionError(f"{type(self).__name__} is not an exactly bounded set")

    def __eq__(self, other):
        if isinstance(other, NatSet):
            try:
                return self.to_intervals() == other.to_intervals()
            except PreconditionError:
                return self is other
        return NotImplemented

    def __hash__(self):
        return id(self)


def _merge_intervals(pairs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    merged: list[list[int]] = []
    for lo, hi in sorted(pairs):
        if lo > hi:
            continue
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


class FiniteNatSet(NatSet):
    """An explicit finite set."""

    is_finite = True
    is_cofinite = False

    def __init__(self, elems: Iterable[int] = ()):
        self.elems = tuple(sorted(set(elems)))
        if self.elems and self.elems[0] < 1:
            raise PreconditionError("set elements must be >= 1")

    def __contains__(self, n):
        i = bisect_right(self.elems, n) - 1
        return i >= 0 and self.elems[i] == n

    def count_upto(self, N):
        self._check(N)
        return bisect_right(self.elems, N)

    def iter_upto(self, N):
        for v in self.elems:
            if v > N:
                break
            yield v

    def to_intervals(self):
        return _merge_intervals((v, v) for v in self.elems)

    def __repr__(self):
        return f"FiniteNatSet({list(self.elems)})"


class IntervalNatSet(NatSet):
    """A bounded union of closed intervals, kept sorted and disjoint."""

    is_finite = True
    is_cofinite = False

    def __init__(self, intervals: Iterable[tuple[int, int]] = ()):
        ivals = _merge_intervals(intervals)
        if ivals and ivals[0][0] < 1:
            raise PreconditionError("intervals must lie inside the positive integers")
        self.intervals = ivals
        counts = [0]
        for lo, hi in ivals:
            counts.append(counts[-1] + hi - lo + 1)
        self._cum = counts

    def __contains__(self, n):
        i = bisect_right(self.intervals, (n, math.inf)) - 1
        return i >= 0 and self.intervals[i][0] <= n <= self.intervals[i][1]

    def count_upto(self, N):
        self._check(N)
        total = 0
        for (lo, hi), prefix in zip(self.intervals, self._cum):
            if lo > N:
                break
            total = prefix + min(hi, N) - lo + 1
        return total

    def iter_upto(self, N):
        for lo, hi in self.intervals:
            if lo > N:
                break
            yield from range(lo, min(hi, N) + 1)

    def to_intervals(self):
        return self.intervals

    def __repr__(self):
        return f"IntervalNatSet({list(self.intervals)})"


class LazyIntervalNatSet(NatSet):
    """An interval union produced by a rule, materialized on demand.

    The factory returns an iterator of (lo, hi) pairs with strictly increasing
    lo and disjoint ranges; adjacent ranges are merged during materialization.
    The family may be unbounded. A factory may raise HorizonError to signal
    that it cannot enumerate further.
    """

    is_finite = False

    def __init__(self, factory: Callable[[], Iterator[tuple[int, int]]],
                 horizon: int | None = None, is_cofinite: bool | None = None,
                 name: str = "rule-intervals"):
        self._factory = factory
        self._iter: Iterator[tuple[int, int]] | None = None
        self._ivals: list[tuple[int, int]] = []
        self._exhausted = False
        self.horizon = horizon
        self.is_cofinite = is_cofinite
        self.name = name

    def _extend_to(self, N: int) -> None:
        # Membership on [1, N] is decided once an interval reaches past N,
        # an interval starts past N, or the family is exhausted.
        if self._iter is None:
            self._iter = self._factory()
        while not self._exhausted and (not self._ivals or self._ivals[-1][1] < N):
            nxt = next(self._iter, None)
            if nxt is None:
                self._exhausted = True
                break
            lo, hi = nxt
            if lo > hi or (self._ivals and lo <= self._ivals[-1][1]):
                raise PreconditionError(
                    f"rule for {self.name} produced a non-increasing interval {nxt}"
                )
            if self._ivals and lo == self._ivals[-1][1] + 1:
                self._ivals[-1] = (self._ivals[-1][0], hi)
            else:
                self._ivals.append((lo, hi))
            if lo > N:
                break

    def __contains__(self, n):
        self._check(n)
        self._extend_to(n)
        i = bisect_right(self._ivals, (n, math.inf)) - 1
        return i >= 0 and self._ivals[i][0] <= n <= self._ivals[i][1]

    def count_upto(self, N):
        self._check(N)
        self._extend_to(N)
        total = 0
        for lo, hi in self._ivals:
            if lo > N:
                break
            total += min(hi, N) - lo + 1
        return total

    def iter_upto(self, N):
        self._check(N)
        self._extend_to(N)
        for lo, hi in self._ivals:
            if lo > N:
                break
            yield from range(lo, min(hi, N) + 1)

    def __repr__(self):
        return f"LazyIntervalNatSet({self.name})"


class PredicateNatSet(NatSet):
    """Membership by predicate, sampled only up to the declared horizon."""

    def __init__(self, pred: Callable[[int], bool], horizon: int | None = None,
                 name: str = "predicate", is_finite: bool | None = None,
                 is_cofinite: bool | None = None):
        self._pred = pred
        self.horizon = horizon
        self.name = name
        self.is_finite = is_finite
        self.is_cofinite = is_cofinite
        self._cum = [0]

    def __contains__(self, n):
        if n < 1:
            return False
        self._check(n)
        return bool(self._pred(n))

    def count_upto(self, N):
        self._check(N)
        while len(self._cum) <= N:
            n = len(self._cum)
            self._cum.append(self._cum[-1] + (1 if self._pred(n) else 0))
        return self._cum[N]

    def __repr__(self):
        return f"PredicateNatSet({self.name})"


# ===== Density ==============================================================


@dataclass(frozen=True)
class DensityEstimate:
    """Exact prefix-count bookkeeping over the window [1, N].

    lo and hi bound the fraction of decided-in elements: lo counts only the
    certified members, hi additionally grants every undecided row.
    """

    N: int
    in_count: int
    out_count: int
    undecided_count: int

    def __post_init__(self):
        if self.N < 1:
            raise PreconditionError("density window must have N >= 1")
        if min(self.in_count, self.out_count, self.undecided_count) < 0:
            raise PreconditionError("counts must be non-negative")
        if self.in_count + self.out_count + self.undecided_count != self.N:
            raise PreconditionError("counts must partition the window")

    @property
    def lo(self) -> Fraction:
        return Fraction(self.in_count, self.N)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.in_count + self.undecided_count, self.N)


def prefix_density(s: NatSet, N: int) -> DensityEstimate:
    """Exact |S intersect [1, N]| / N as a point estimate (no undecided rows)."""
    count = s.count_upto(N)
    return DensityEstimate(N, count, N - count, 0)


# ===== Algebra ==============================================================


def _is_bounded_exact(s: NatSet) -> bool:
    return isinstance(s, (FiniteNatSet, IntervalNatSet))


def _interval_op(op: str, a: tuple[tuple[int, int], ...],
                 b: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    if op == "union":
        return _merge_intervals(list(a) + list(b))
    if op == "intersect":
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return tuple(out)
    # difference a \ b
    out = []
    j = 0
    for lo, hi in a:
        cur = lo
        while j < len(b) and b[j][1] < cur:
            j += 1
        k = j
        while k < len(b) and b[k][0] <= hi:
            blo, bhi = b[k]
            if blo > cur:
                out.append((cur, blo - 1))
            cur = max(cur, bhi + 1)
            if cur > hi:
                break
            k += 1
        if cur <= hi:
            out.append((cur, hi))
    return _merge_intervals(out)


def _min_horizon(a: NatSet, b: NatSet) -> int | None:
    if a.horizon is None:
        return b.horizon
    if b.horizon is None:
        return a.horizon
    return min(a.horizon, b.horizon)


def set_algebra(op: str, a: NatSet, b: NatSet) -> NatSet:
    """union / intersect / difference, exact on bounded representations.

    Finite op finite stays finite; anything bounded-exact stays an interval
    union; otherwise the result is a predicate with the smaller horizon.
    """
    if op not in ("union", "intersect", "difference"):
        raise PreconditionError(f"unknown set operation {op!r}")
    if isinstance(a, FiniteNatSet) and isinstance(b, FiniteNatSet):
        ea, eb = set(a.elems), set(b.elems)
        out = ea | eb if op == "union" else ea & eb if op == "intersect" else ea - eb
        return FiniteNatSet(out)
    if _is_bounded_exact(a) and _is_bounded_exact(b):
        return IntervalNatSet(_interval_op(op, a.to_intervals(), b.to_intervals()))
    if op == "union":
        pred = lambda n: n in a or n in b
    elif op == "intersect":
        pred = lambda n: n in a and n in b
    else:
        pred = lambda n: n in a and n not in b
    return PredicateNatSet(pred, horizon=_min_horizon(a, b), name=f"{op}-combination")


def union(a: NatSet, b: NatSet) -> NatSet:
    return set_algebra("union", a, b)


def intersect(a: NatSet, b: NatSet) -> NatSet:
    return set_algebra("intersect", a, b)


def difference(a: NatSet, b: NatSet) -> NatSet:
    return set_algebra("difference", a, b)


def translate(s: NatSet, m: int) -> NatSet:
    """{a - m : a in S, a - m >= 1} for m >= 0."""
    if m < 0:
        raise PreconditionError(f"translation amount must be >= 0, got {m}")
    if m == 0:
        return s
    if isinstance(s, FiniteNatSet):
        return FiniteNatSet(v - m for v in s.elems if v > m)
    if isinstance(s, IntervalNatSet):
        return IntervalNatSet(
            (max(lo - m, 1), hi - m) for lo, hi in s.intervals if hi > m
        )
    if isinstance(s, LazyIntervalNatSet):
        src = s

        def factory():
            for lo, hi in _lazy_edges(src):
                if hi > m:
                    yield max(lo - m, 1), hi - m

        horizon = None if src.horizon is None else max(src.horizon - m, 0)
        return LazyIntervalNatSet(factory, horizon=horizon,
                                  is_cofinite=src.is_cofinite,
                                  name=f"shift({src.name},{m})")
    horizon = None if s.horizon is None else max(s.horizon - m, 0)
    return PredicateNatSet(lambda n: (n + m) in s, horizon=horizon,
                           name=f"shift-{m}", is_finite=s.is_finite,
                           is_cofinite=s.is_cofinite)


def _lazy_edges(s: LazyIntervalNatSet) -> Iterator[tuple[int, int]]:
    # Walk the materialized prefix and keep pulling. Only the trailing cached
    # interval can still grow by adjacency merging, so it is yielded only once
    # a later interval exists or the family is exhausted.
    i = 0
    while True:
        while i < len(s._ivals) - 1:
            yield s._ivals[i]
            i += 1
        if s._exhausted:
            if i < len(s._ivals):
                yield s._ivals[i]
                i += 1
            return
        last_hi = s._ivals[-1][1] if s._ivals else 0
        s._extend_to(last_hi + 1)


def lift(s: NatSet, derived: DerivedSeq) -> NatSet:
    """L(S) = union over k in S of the derived-index block [n_{k-1}, n_k - 1].

    Injective on block-index sets and commuting with union, intersection and
    difference. The representation class is preserved where possible: finite
    and bounded sets lift to bounded interval unions, rule sets to rule sets.
    """
    if isinstance(s, (FiniteNatSet, IntervalNatSet)):
        return IntervalNatSet(
            (derived.boundary(lo - 1), derived.boundary(hi) - 1)
            for lo, hi in s.to_intervals()
        )
    if isinstance(s, LazyIntervalNatSet):
        src = s

        def factory():
            for lo, hi in _lazy_edges(src):
                yield derived.boundary(lo - 1), derived.boundary(hi) - 1

        return LazyIntervalNatSet(factory, horizon=_lift_horizon(src, derived),
                                  name=f"lift({src.name})")
    src = s

    def factory():
        run_lo = None
        k = 1
        while src.horizon is None or k <= src.horizon:
            if k in src:
                if run_lo is None:
                    run_lo = k
            elif run_lo is not None:
                yield derived.boundary(run_lo - 1), derived.boundary(k - 1) - 1
                run_lo = None
            k += 1
        if run_lo is not None:
            yield derived.boundary(run_lo - 1), derived.boundary(k - 1) - 1
        if src.horizon is not None:
            raise HorizonError(
                f"lift of {src.name} is only decided up to derived index "
                f"{derived.boundary(src.horizon) - 1}"
            )

    return LazyIntervalNatSet(factory, horizon=_lift_horizon(src, derived),
                              name=f"lift({getattr(src, 'name', 'set')})")


def _lift_horizon(s: NatSet, derived: DerivedSeq) -> int | None:
    if s.horizon is None:
        return None
    return derived.boundary(s.horizon) - 1


# ===== Stock sets and the set-expression language ===========================


def cube_gap_blocks() -> LazyIntervalNatSet:
    """The block set with g_1 = 1, h_j - g_j = j^3, g_{j+1} - h_j = j; density 1."""
    return LazyIntervalNatSet(cube_block_edges, is_cofinite=False, name="blocks:cube-gap")


def evens() -> PredicateNatSet:
    return PredicateNatSet(lambda n: n % 2 == 0, name="evens",
                           is_finite=False, is_cofinite=False)


def squares() -> PredicateNatSet:
    return PredicateNatSet(lambda n: math.isqrt(n) ** 2 == n, name="squares",
                           is_finite=False, is_cofinite=False)


def full_set() -> PredicateNatSet:
    return PredicateNatSet(lambda n: True, name="all",
                           is_finite=False, is_cofinite=True)


def parse_set_expr(text: str, seq: ArithSeq | None = None) -> NatSet:
    """Parse a set expression.

    Grammar: ``fin:{1,3,5}``, ``ivl:[4,6]+[9,12]``, ``evens``, ``squares``,
    ``all``, ``blocks:cube-gap``, ``lift(<expr>)``, ``shift(<expr>,M)``.
    ``lift`` needs a ratio spec for the block boundaries, supplied by the
    caller as ``seq``.
    """
    text = text.strip()
    if text == "evens":
        return evens()
    if text == "squares":
        return squares()
    if text == "all":
        return full_set()
    if text == "blocks:cube-gap":
        return cube_gap_blocks()
    if text.startswith("fin:"):
        body = text[4:].strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise SpecParseError(f"finite set must be braced, got {text!r}")
        inner = body[1:-1].strip()
        try:
            elems = [int(v) for v in inner.split(",")] if inner else []
        except ValueError as exc:
            raise SpecParseError(f"bad finite set {text!r}") from exc
        try:
            return FiniteNatSet(elems)
        except PreconditionError as exc:
            raise SpecParseError(str(exc)) from exc
    if text.startswith("ivl:"):
        parts = text[4:].split("+")
        ivals = []
        for part in parts:
            part = part.strip()
            if not (part.startswith("[") and part.endswith("]")):
                raise SpecParseError(f"bad interval {part!r} in {text!r}")
            try:
                lo, hi = (int(v) for v in part[1:-1].split(","))
            except ValueError as exc:
                raise SpecParseError(f"bad interval {part!r}") from exc
            if lo > hi:
                raise SpecParseError(f"interval {part!r} is empty or reversed")
            ivals.append((lo, hi))
        try:
            return IntervalNatSet(ivals)
        except PreconditionError as exc:
            raise SpecParseError(str(exc)) from exc
    if text.startswith("lift(") and text.endswith(")"):
        if seq is None:
            raise SpecParseError("lift(...) needs a ratio spec context")
        return lift(parse_set_expr(text[5:-1], seq), seq.derived)
    if text.startswith("shift(") and text.endswith(")"):
        body = text[6:-1]
        inner, sep, amount = body.rpartition(",")
        if not sep:
            raise SpecParseError("shift needs the form shift(<expr>,M)")
        try:
            m = int(amount.strip())
        except ValueError as exc:
            raise SpecParseError(f"bad shift amount in {text!r}") from exc
        if m < 0:
            raise SpecParseError("shift amount must be >= 0")
        return translate(parse_set_expr(inner, seq), m)
    raise SpecParseError(f"unrecognized set expression {text!r}")
