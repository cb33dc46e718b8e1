"""Circle-group points as mixed-radix digit expansions, with certified enclosures.

A point x in [0, 1) is stored through its digits relative to an arithmetic
sequence: x = sum c_n / a_n with 0 <= c_n <= b_n - 1 and, canonically,
c_n < b_n - 1 for infinitely many n. The key evaluation tool is the window
identity

    {a_{n-1} x} = S + {a_{n+t} x} / (b_n ... b_{n+t}),
    S = sum_{j=0..t} c_{n+j} / (b_n ... b_{n+j}),

which yields the enclosure [S, S + 1/(b_n ... b_{n+t})] from ratio products
alone; the full terms a_k never appear in an evaluation. No floating point is
used anywhere in this module.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .density import FiniteNatSet, NatSet, PredicateNatSet, parse_set_expr
from .errors import HorizonError, PreconditionError, SpecParseError
from .sequences import ArithSeq

__all__ = [
    "BoundInterval",
    "DigitRule",
    "FiniteDigits",
    "RationalDigits",
    "IndicatorDigits",
    "FloorDivDigits",
    "FuncDigits",
    "CirclePoint",
    "digits_from_rational",
    "frac_bound",
    "frac_exact",
    "tail_upper_bound",
    "norm_bound",
    "mult_frac_bound",
    "derived_frac_bound",
    "derived_norm_bound",
    "EnclosureCache",
    "default_depth_cap",
    "parse_point",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)


def default_depth_cap() -> int:
    """Refinement depth cap for undecided multiplications; env-overridable."""
    raw = os.environ.get("CIRCLELAB_DEPTH_CAP", "")
    if raw.isdigit() and int(raw) > 0:
        return int(raw)
    return 64


@dataclass(frozen=True)
class BoundInterval:
    """A closed rational interval [lo, hi] inside [0, 1].

    ``undecided`` marks the trivial enclosure returned when a multiplication
    could not be pinned to one unit interval within the depth cap.
    """

    lo: Fraction
    hi: Fraction
    undecided: bool = False

    def __post_init__(self):
        if not (_ZERO <= self.lo <= self.hi <= _ONE):
            raise PreconditionError(f"invalid enclosure [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


# ===== Digit rules ===========================================================


class DigitRule:
    """Rule n -> c_n. Subclasses declare how much of the expansion is known.

    ``known_upto`` is None when every index is computable, otherwise the last
    index with a defined digit. ``support_kind`` is one of "finite",
    "cofinite", "infinite", "unknown"; the first three are declarations the
    membership and witness code may rely on.
    """

    known_upto: int | None = None
    attestation: str | None = None

    def digit(self, n: int, seq: ArithSeq) -> int:
        raise NotImplementedError

    def support_kind(self) -> str:
        return "unknown"

    def finite_support_max(self) -> int | None:
        """Largest index that may carry a nonzero digit, when support is finite."""
        return None

    def describe(self) -> str:
        raise NotImplementedError

    def _check_known(self, n: int) -> None:
        if self.known_upto is not None and n > self.known_upto:
            raise HorizonError(
                f"digit c_{n} is beyond the declared prefix (known up to "
                f"{self.known_upto}); re-expand with a larger horizon"
            )


class FiniteDigits(DigitRule):
    """An explicit digit prefix with a declared all-zero tail."""

    def __init__(self, digits: Iterable[int]):
        self.digits = tuple(digits)
        if any(c < 0 for c in self.digits):
            raise PreconditionError("digits must be non-negative")

    def digit(self, n, seq):
        if n <= len(self.digits):
            return self.digits[n - 1]
        return 0

    def support_kind(self):
        return "finite"

    def finite_support_max(self):
        m = len(self.digits)
        while m > 0 and self.digits[m - 1] == 0:
            m -= 1
        return m

    def describe(self):
        return "finite:[" + ",".join(str(c) for c in self.digits) + "]"


class RationalDigits(DigitRule):
    """Greedy expansion of a rational that did not terminate within its horizon.

    Digits beyond the expanded prefix are unknown: every window that needs
    them fails loudly instead of extrapolating.
    """

    def __init__(self, value: Fraction, digits: tuple[int, ...]):
        self.value = value
        self.digits = digits
        self.known_upto = len(digits)

    def digit(self, n, seq):
        self._check_known(n)
        return self.digits[n - 1]

    def describe(self):
        return f"rat:{self.value.numerator}/{self.value.denominator}@{self.known_upto}"


class IndicatorDigits(DigitRule):
    """c_n = 1 exactly when n lies in a given set."""

    def __init__(self, support: NatSet):
        self.support = support
        self.known_upto = support.horizon

    def digit(self, n, seq):
        return 1 if n in self.support else 0

    def support_kind(self):
        if self.support.is_finite is True:
            return "finite"
        if self.support.is_cofinite is True:
            return "cofinite"
        if self.support.is_finite is False:
            return "infinite"
        return "unknown"

    def finite_support_max(self):
        if self.support.is_finite is not True:
            return None
        ivals = self.support.to_intervals()
        return ivals[-1][1] if ivals else 0

    def describe(self):
        return f"ones-on:{getattr(self.support, 'name', repr(self.support))}"


class FloorDivDigits(DigitRule):
    """c_n = floor(b_n / m_n) on the keys of a finite divisor map, 0 elsewhere.

    Every divisor must satisfy 1 < m_n <= b_n; a violation is reported, not
    clamped.
    """

    def __init__(self, divisors: Mapping[int, int]):
        self.divisors = dict(sorted(divisors.items()))
        if any(n < 1 for n in self.divisors):
            raise PreconditionError("divisor positions must be >= 1")

    def digit(self, n, seq):
        m = self.divisors.get(n)
        if m is None:
            return 0
        b = seq.ratio(n)
        if not 1 < m <= b:
            raise PreconditionError(
                f"divisor m_{n} = {m} violates 1 < m <= b_{n} = {b}"
            )
        return b // m

    def support_kind(self):
        return "finite"

    def finite_support_max(self):
        return max(self.divisors, default=0)

    def describe(self):
        inner = ",".join(f"{n}:{m}" for n, m in self.divisors.items())
        return "floor-div:m={" + inner + "}"


class FuncDigits(DigitRule):
    """An opaque digit rule (n, b_n) -> c_n.

    Canonicality (c_n < b_n - 1 infinitely often) is not decidable for an
    opaque rule, so construction demands an explicit attestation, which is
    recorded and surfaced in reports.
    """

    def __init__(self, fn, attestation: str | None = None,
                 support_kind: str = "unknown", known_upto: int | None = None,
                 label: str = "func"):
        if not attestation:
            raise PreconditionError(
                "opaque digit rules need a canonicality attestation "
                "(the rule must leave c_n < b_n - 1 infinitely often)"
            )
        self._fn = fn
        self.attestation = attestation
        self._support_kind = support_kind
        self.known_upto = known_upto
        self.label = label

    def digit(self, n, seq):
        self._check_known(n)
        return self._fn(n, seq.ratio(n))

    def support_kind(self):
        return self._support_kind

    def describe(self):
        return f"func:{self.label}"


# ===== Points ================================================================


class CirclePoint:
    """A digit expansion bound to its arithmetic sequence.

    Construction rejects rules that are detectably non-canonical (a digit
    tail that is eventually always b_n - 1 collapses the point onto 0).
    """

    def __init__(self, seq: ArithSeq, rule: DigitRule):
        self.seq = seq
        self.rule = rule
        if (isinstance(rule, IndicatorDigits)
                and rule.support.is_cofinite is True
                and seq.spec.eventually_two()):
            raise PreconditionError(
                "non-canonical rule: c_n = 1 = b_n - 1 for all large n under "
                f"{seq.describe()}"
            )

    def digit(self, n: int) -> int:
        """c_n, validated against 0 <= c_n <= b_n - 1 on access."""
        if n < 1:
            raise PreconditionError(f"digit index must be >= 1, got {n}")
        c = self.rule.digit(n, self.seq)
        b = self.seq.ratio(n)
        if not 0 <= c <= b - 1:
            raise PreconditionError(f"digit c_{n} = {c} outside [0, {b - 1}]")
        return c

    def support_kind(self) -> str:
        return self.rule.support_kind()

    def finite_support_max(self) -> int | None:
        return self.rule.finite_support_max()

    def support(self, horizon: int | None = None, quasi: bool = False) -> NatSet:
        """supp(x) = {n : c_n != 0}, or with ``quasi`` the set {n : c_n = b_n - 1}.

        Exact (uncapped) for rules whose digits are computable everywhere;
        otherwise a horizon must be given and must not exceed the known prefix.
        """
        fs = self.finite_support_max()
        if fs is not None:
            hits = [n for n in range(1, fs + 1)
                    if (self.digit(n) != 0 if not quasi
                        else self.digit(n) == self.seq.ratio(n) - 1)]
            return FiniteNatSet(hits)
        if self.rule.known_upto is None:
            if quasi:
                pred = lambda n: self.digit(n) == self.seq.ratio(n) - 1
            else:
                pred = lambda n: self.digit(n) != 0
            kind = self.support_kind()
            return PredicateNatSet(
                pred, horizon=None, name=("quasi-supp" if quasi else "supp"),
                is_finite=(False if kind in ("cofinite", "infinite") and not quasi
                           else None),
                is_cofinite=(True if kind == "cofinite" and not quasi else None),
            )
        if horizon is None or horizon > self.rule.known_upto:
            raise HorizonError(
                "support of a prefix-capped rule needs a horizon within the "
                f"known prefix (up to {self.rule.known_upto})"
            )
        hits = [n for n in range(1, horizon + 1)
                if (self.digit(n) != 0 if not quasi
                    else self.digit(n) == self.seq.ratio(n) - 1)]
        return FiniteNatSet(hits)

    def as_fraction(self) -> Fraction:
        """Exact value sum c_n / a_n; defined only for declared finite support."""
        m = self.finite_support_max()
        if m is None:
            raise PreconditionError("as_fraction needs declared finite support")
        total = Fraction(0)
        for n in range(1, m + 1):
            c = self.digit(n)
            if c:
                total += Fraction(c, self.seq.term(n))
        return total

    def describe(self) -> str:
        return self.rule.describe()

    def __repr__(self):
        return f"CirclePoint({self.describe()} under {self.seq.describe()})"


def digits_from_rational(value: Fraction, seq: ArithSeq, horizon: int = 256) -> CirclePoint:
    """Greedy digit expansion of a rational in [0, 1).

    The scaled remainder r_n = {a_n x} is kept exactly; c_n = floor(b_n *
    r_{n-1}) and r_n = b_n * r_{n-1} - c_n. If the remainder reaches 0 at some
    n <= horizon the point has declared finite support and is exact; otherwise
    the digits beyond the horizon stay unknown and every evaluation window
    must stop inside the expanded prefix.
    """
    value = Fraction(value)
    if not _ZERO <= value < _ONE:
        raise PreconditionError(f"rational point must lie in [0, 1), got {value}")
    if horizon < 1:
        raise PreconditionError("expansion horizon must be >= 1")
    digits: list[int] = []
    rem = value
    for n in range(1, horizon + 1):
        if rem == 0:
            return CirclePoint(seq, FiniteDigits(digits))
        scaled = rem * seq.ratio(n)
        c = scaled.numerator // scaled.denominator
        digits.append(c)
        rem = scaled - c
        # greedy keeps {a_n x} strictly below 1, so c_n <= b_n - 1 always
    if rem == 0:
        return CirclePoint(seq, FiniteDigits(digits))
    return CirclePoint(seq, RationalDigits(value, tuple(digits)))


# ===== Evaluation ============================================================


def _window(x: CirclePoint, n: int, t: int) -> tuple[int, int]:
    """Unreduced (num, den) with S = num/den, den = b_n * ... * b_{n+t}."""
    num = 0
    den = 1
    for j in range(n, n + t + 1):
        b = x.seq.ratio(j)
        num = num * b + x.digit(j)
        den *= b
    return num, den


def frac_bound(x: CirclePoint, n: int, t: int) -> BoundInterval:
    """Enclosure of {a_{n-1} x} with width exactly 1/(b_n * ... * b_{n+t})."""
    if n < 1:
        raise PreconditionError(f"window start must be >= 1, got {n}")
    if t < 0:
        raise PreconditionError(f"window depth must be >= 0, got {t}")
    num, den = _window(x, n, t)
    return BoundInterval(Fraction(num, den), Fraction(num + 1, den))


def frac_exact(x: CirclePoint, n: int) -> Fraction:
    """Exact {a_{n-1} x} for a point with declared finite support."""
    if n < 1:
        raise PreconditionError(f"window start must be >= 1, got {n}")
    m = x.finite_support_max()
    if m is None:
        raise PreconditionError("exact evaluation needs declared finite support")
    if n > m:
        return Fraction(0)
    num, den = _window(x, n, m - n)
    return Fraction(num, den)


def tail_upper_bound(x: CirclePoint, j: int, t: int = 8) -> Fraction:
    """An exact upper bound for the digit tail sum_{i >= j} c_i / a_i.

    The tail equals {a_{j-1} x} / a_{j-1}, so the window enclosure divided by
    a_{j-1} bounds it; the bound never exceeds 1 / a_{j-1}. Finite-support
    points get the exact tail instead.
    """
    if j < 1:
        raise PreconditionError(f"tail start must be >= 1, got {j}")
    a = x.seq.term(j - 1)
    if x.finite_support_max() is not None:
        return frac_exact(x, j) / a
    num, den = _window(x, j, t)
    return Fraction(num + 1, den) / a


def norm_bound(J: BoundInterval) -> BoundInterval:
    """Enclosure of the circle norm ||y|| = min({y}, 1 - {y}) over y in J.

    The norm is a tent peaking at 1/2, so extremes occur at the endpoints and,
    when 1/2 lies inside J, at the peak.
    """
    if J.undecided:
        return BoundInterval(_ZERO, _HALF, undecided=True)
    f_lo = min(J.lo, 1 - J.lo)
    f_hi = min(J.hi, 1 - J.hi)
    hi = _HALF if J.lo <= _HALF <= J.hi else max(f_lo, f_hi)
    return BoundInterval(min(f_lo, f_hi), hi)


def _fraction_mod1(value: Fraction) -> Fraction:
    return value - (value.numerator // value.denominator)


def mult_frac_bound(x: CirclePoint, k: int, r: int, t: int = 8,
                    cap: int | None = None) -> BoundInterval:
    """Enclosure of {r * a_k * x} for any positive multiplier r.

    For finite-support points the value is exact. Otherwise the window
    enclosure of {a_k x} is scaled by r; if the scaled interval straddles an
    integer the window depth is doubled up to ``cap``, after which the
    trivial [0, 1] interval is returned flagged undecided.
    """
    if k < 0:
        raise PreconditionError(f"term index must be >= 0, got {k}")
    if r < 1:
        raise PreconditionError(f"multiplier must be >= 1, got {r}")
    if x.finite_support_max() is not None:
        v = _fraction_mod1(r * frac_exact(x, k + 1))
        return BoundInterval(v, v)
    if cap is None:
        cap = default_depth_cap()
    depth = max(t, 0)
    known = x.rule.known_upto
    max_depth = cap if known is None else min(cap, known - (k + 1))
    if max_depth < 0:
        return BoundInterval(_ZERO, _ONE, undecided=True)
    depth = min(depth, max_depth)
    while True:
        num, den = _window(x, k + 1, depth)
        p = r * num
        q = p // den
        # the true value sits in [p/den, (p + r)/den) half-open
        if p + r - 1 < (q + 1) * den:
            return BoundInterval(Fraction(p - q * den, den),
                                 Fraction(p + r - q * den, den))
        if depth >= max_depth:
            return BoundInterval(_ZERO, _ONE, undecided=True)
        depth = min(max(2 * depth, 1), max_depth)


def derived_frac_bound(x: CirclePoint, i: int, t: int = 8,
                       cap: int | None = None) -> BoundInterval:
    """Enclosure of {d_i x} through the decomposition d_i = r * a_k."""
    k, r = x.seq.derived.decompose(i)
    return mult_frac_bound(x, k, r, t, cap)


def derived_norm_bound(x: CirclePoint, i: int, t: int = 8,
                       cap: int | None = None) -> BoundInterval:
    """Enclosure of ||d_i x||."""
    return norm_bound(derived_frac_bound(x, i, t, cap))


class EnclosureCache:
    """Shared per-block evaluation state for scans over derived indices.

    All rows of block k reuse one window enclosure of {a_k x}; refinement
    deepens the cached window, so verdicts are independent of the order in
    which rows are visited (enclosures only ever shrink).
    """

    def __init__(self, x: CirclePoint, depth: int = 8, cap: int | None = None):
        self.x = x
        self.depth = max(depth, 0)
        self.cap = cap if cap is not None else default_depth_cap()
        self._fs_max = x.finite_support_max()
        self._exact: dict[int, Fraction] = {}
        self._windows: dict[int, tuple[int, int, int]] = {}  # k -> (num, den, depth)

    @property
    def exact_mode(self) -> bool:
        return self._fs_max is not None

    def _exact_value(self, k: int) -> Fraction:
        y = self._exact.get(k)
        if y is None:
            y = frac_exact(self.x, k + 1)
            self._exact[k] = y
        return y

    def _window_at(self, k: int, depth: int) -> tuple[int, int, int]:
        cached = self._windows.get(k)
        if cached is None or cached[2] < depth:
            num, den = _window(self.x, k + 1, depth)
            cached = (num, den, depth)
            self._windows[k] = cached
        return cached

    def _max_depth(self, k: int) -> int:
        known = self.x.rule.known_upto
        if known is None:
            return self.cap
        return min(self.cap, known - (k + 1))

    def interval(self, k: int, r: int) -> BoundInterval:
        """Enclosure of {r * a_k * x}, refined as far as the cap allows."""
        if self.exact_mode:
            v = _fraction_mod1(r * self._exact_value(k))
            return BoundInterval(v, v)
        max_depth = self._max_depth(k)
        if max_depth < 0:
            return BoundInterval(_ZERO, _ONE, undecided=True)
        depth = min(self.depth, max_depth)
        while True:
            num, den, depth = self._window_at(k, depth)
            p = r * num
            q = p // den
            if p + r - 1 < (q + 1) * den:
                return BoundInterval(Fraction(p - q * den, den),
                                     Fraction(p + r - q * den, den))
            if depth >= max_depth:
                return BoundInterval(_ZERO, _ONE, undecided=True)
            depth = min(max(2 * depth, 1), max_depth)

    def band_verdict(self, k: int, r: int, band_lo: Fraction, band_hi: Fraction) -> str:
        """Classify {r * a_k * x} against the closed band [band_lo, band_hi].

        Returns "in" when the certified enclosure lies inside the band, "out"
        when it is disjoint from the band, else "undecided". Conservative at
        exact band edges for infinite-support points; exact otherwise.
        """
        if self.exact_mode:
            v = _fraction_mod1(r * self._exact_value(k))
            return "in" if band_lo <= v <= band_hi else "out"
        max_depth = self._max_depth(k)
        if max_depth < 0:
            return "undecided"
        ln, ld = band_lo.numerator, band_lo.denominator
        hn, hd = band_hi.numerator, band_hi.denominator
        depth = min(self.depth, max_depth)
        while True:
            num, den, depth = self._window_at(k, depth)
            p = r * num
            q = p // den
            if p + r - 1 < (q + 1) * den:
                flo = p - q * den
                fhi = flo + r
                if flo * ld >= ln * den and fhi * hd <= hn * den:
                    return "in"
                if fhi * ld < ln * den or flo * hd > hn * den:
                    return "out"
            if depth >= max_depth:
                return "undecided"
            depth = min(max(2 * depth, 1), max_depth)


# ===== Digit-rule parsing ====================================================


def parse_point(text: str, seq: ArithSeq, horizon: int = 256) -> CirclePoint:
    """Parse a digit-rule string into a point under ``seq``.

    Forms: ``rat:P/Q`` (greedy expansion, ``horizon`` caps the prefix),
    ``exact:P/Q`` (like rat: but the expansion must terminate within the
    horizon), ``finite:[c1,c2,...]``, ``ones-on:<set-expr>``, and
    ``floor-div:m={n1:m1,n2:m2,...}``.
    """
    text = text.strip()
    if text.startswith("rat:") or text.startswith("exact:"):
        strict = text.startswith("exact:")
        body = text.partition(":")[2]
        if "/" in body:
            p, _, q = body.partition("/")
        else:
            p, q = body, "1"
        try:
            value = Fraction(int(p), int(q))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecParseError(f"bad rational {body!r}") from exc
        x = digits_from_rational(value, seq, horizon)
        if strict and x.finite_support_max() is None:
            raise HorizonError(
                f"expansion of {value} did not terminate within {horizon} "
                "digits; raise the expansion horizon or use rat: for a "
                "capped prefix"
            )
        return x
    if text.startswith("finite:"):
        body = text[7:].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise SpecParseError("finite digits must be bracketed, e.g. finite:[0,1,1]")
        inner = body[1:-1].strip()
        try:
            digits = [int(v) for v in inner.split(",")] if inner else []
        except ValueError as exc:
            raise SpecParseError(f"bad digit list {body!r}") from exc
        return CirclePoint(seq, FiniteDigits(digits))
    if text.startswith("ones-on:"):
        support = parse_set_expr(text[8:], seq)
        return CirclePoint(seq, IndicatorDigits(support))
    if text.startswith("floor-div:m="):
        body = text[12:].strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise SpecParseError("floor-div needs the form floor-div:m={n:m,...}")
        inner = body[1:-1].strip()
        divisors = {}
        if inner:
            for pair in inner.split(","):
                key, sep, val = pair.partition(":")
                if not sep:
                    raise SpecParseError(f"bad divisor entry {pair!r}")
                try:
                    divisors[int(key)] = int(val)
                except ValueError as exc:
                    raise SpecParseError(f"bad divisor entry {pair!r}") from exc
        return CirclePoint(seq, FloorDivDigits(divisors))
    raise SpecParseError(f"unrecognized digit rule {text!r}")
