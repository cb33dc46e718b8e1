"""Verification suites behind the ``verify`` subcommand.

Each suite runs a finite seeded battery and reports pass/fail together with
the first counterexample, if any. Reports are plain data (ints, strings,
lists, dicts) with every fraction rendered as "p/q", so serializing them is
exact and replay-stable.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .circle import (
    CirclePoint,
    FiniteDigits,
    IndicatorDigits,
    digits_from_rational,
    frac_bound,
    frac_exact,
    tail_upper_bound,
)
from .classify import check_strongly_non_dli, weakly_dli_witness_set
from .density import FiniteNatSet, full_set, lift, set_algebra
from .errors import PreconditionError
from .membership import convergence_verdict, statistical_scan
from .sequences import ArithSeq, RatioSpec
from .witness import arbault_witness, continuum_family_point

__all__ = ["SUITES", "run_suite"]


def _seq(spec_text: str) -> ArithSeq:
    return ArithSeq(RatioSpec.parse(spec_text))


def _spec_list(value) -> list[str]:
    if isinstance(value, str):
        return [s.strip() for s in value.split(",") if s.strip()]
    return [str(s) for s in value]


def _int_list(value) -> list[int]:
    if isinstance(value, str):
        return [int(s) for s in value.split(",") if s.strip()]
    return [int(v) for v in value]


def _mod1(y: Fraction) -> Fraction:
    return y - (y.numerator // y.denominator)


def _merge(defaults: dict, params: dict | None) -> dict:
    out = dict(defaults)
    for key, val in (params or {}).items():
        if key not in defaults:
            raise PreconditionError(f"unknown suite parameter {key!r}")
        out[key] = val
    return out


def lift_algebra(params: dict | None = None) -> dict:
    """Exact commutation of lifting with union/intersection/difference."""
    p = _merge({"specs": "linear:1,pow:2,const:2", "pairs": 200,
                "lo": 1, "hi": 50, "max_size": 10, "seed": 1789}, params)
    rng = random.Random(int(p["seed"]))
    lo, hi = int(p["lo"]), int(p["hi"])
    identities = 0
    counterexample = None
    for spec_text in _spec_list(p["specs"]):
        seq = _seq(spec_text)
        for k in range(1, 26):
            block = tuple(lift(FiniteNatSet([k]), seq.derived).to_intervals())
            want = ((seq.derived.boundary(k - 1), seq.derived.boundary(k) - 1),)
            if block != want or block[0][1] - block[0][0] + 1 != seq.ratio(k) - 1:
                counterexample = {"spec": spec_text, "kind": "block-size", "k": k}
                break
            identities += 1
        if counterexample:
            break
        for _ in range(int(p["pairs"])):
            a = sorted(rng.sample(range(lo, hi + 1), rng.randint(0, int(p["max_size"]))))
            b = sorted(rng.sample(range(lo, hi + 1), rng.randint(0, int(p["max_size"]))))
            sa, sb = FiniteNatSet(a), FiniteNatSet(b)
            la, lb = lift(sa, seq.derived), lift(sb, seq.derived)
            for op in ("union", "intersect", "difference"):
                left = lift(set_algebra(op, sa, sb), seq.derived).to_intervals()
                right = set_algebra(op, la, lb).to_intervals()
                if left != right:
                    counterexample = {"spec": spec_text, "kind": op,
                                      "a": a, "b": b,
                                      "lift_of_op": str(left), "op_of_lifts": str(right)}
                    break
                identities += 1
            if counterexample:
                break
            if a != b and la.to_intervals() == lb.to_intervals():
                counterexample = {"spec": spec_text, "kind": "injectivity",
                                  "a": a, "b": b}
                break
            identities += 1
        if counterexample:
            break
    return {"suite": "lift-algebra", "params": _plain(p), "identities": identities,
            "pass": counterexample is None, "counterexample": counterexample}


def tail_bound(params: dict | None = None) -> dict:
    """Window tail bound never exceeds 1/a_{j-1} and dominates the true tail."""
    p = _merge({"specs": "linear:1,pow:2", "trials": 100, "jmax": 30,
                "qmax": 10 ** 6, "seed": 421}, params)
    rng = random.Random(int(p["seed"]))
    max_ratio = Fraction(0)
    rows = 0
    counterexample = None
    for spec_text in _spec_list(p["specs"]):
        seq = _seq(spec_text)
        for _ in range(int(p["trials"])):
            q = rng.randint(2, int(p["qmax"]))
            value = Fraction(rng.randint(1, q - 1), q)
            x = digits_from_rational(value, seq)
            for j in range(1, int(p["jmax"]) + 1):
                a = seq.term(j - 1)
                ub = tail_upper_bound(x, j)
                true_tail = _mod1(a * value) / a
                ratio = ub * a
                if ratio > max_ratio:
                    max_ratio = ratio
                if ratio > 1 or true_tail > ub:
                    counterexample = {"spec": spec_text, "x": str(value), "j": j,
                                      "upper_bound": str(ub),
                                      "true_tail": str(true_tail)}
                    break
                rows += 1
            if counterexample:
                break
        if counterexample:
            break
    return {"suite": "tail-bound", "params": _plain(p), "rows": rows,
            "max_ratio": str(max_ratio), "pass": counterexample is None,
            "counterexample": counterexample}


def recursion(params: dict | None = None) -> dict:
    """Window identity: exact value inside every enclosure, exact widths, nesting."""
    p = _merge({"specs": "linear:1,pow:2", "trials": 40, "tmax": 8,
                "max_len": 10, "seed": 97}, params)
    rng = random.Random(int(p["seed"]))
    checks = 0
    counterexample = None
    for spec_text in _spec_list(p["specs"]):
        seq = _seq(spec_text)
        for _ in range(int(p["trials"])):
            length = rng.randint(1, int(p["max_len"]))
            digits = [rng.randint(0, seq.ratio(n) - 1) for n in range(1, length + 1)]
            x = CirclePoint(seq, FiniteDigits(digits))
            for n in range(1, length + 3):
                exact = frac_exact(x, n)
                prev = None
                for t in range(int(p["tmax"]) + 1):
                    bi = frac_bound(x, n, t)
                    width = Fraction(1, math.prod(
                        seq.ratio(j) for j in range(n, n + t + 1)))
                    inside = bi.lo <= exact < bi.hi
                    nested = prev is None or (prev.lo <= bi.lo and bi.hi <= prev.hi)
                    if bi.hi - bi.lo != width or not inside or not nested:
                        counterexample = {"spec": spec_text, "digits": digits,
                                          "n": n, "t": t, "exact": str(exact),
                                          "lo": str(bi.lo), "hi": str(bi.hi)}
                        break
                    prev = bi
                    checks += 1
                if counterexample:
                    break
            if counterexample:
                break
        if counterexample:
            break
    return {"suite": "recursion", "params": _plain(p), "checks": checks,
            "pass": counterexample is None, "counterexample": counterexample}


def snd_density(params: dict | None = None) -> dict:
    """Density floor for lifted finite sets under the growth condition."""
    p = _merge({"spec": "pow:2", "alpha": 1, "horizon": 30, "trials": 20,
                "kmax": 12, "floor": "45/100", "seed": 3571}, params)
    seq = _seq(str(p["spec"]))
    alpha = Fraction(p["alpha"])
    verdict = check_strongly_non_dli(seq, alpha, int(p["horizon"]))
    if not verdict.holds:
        return {"suite": "snd-density", "params": _plain(p), "pass": False,
                "counterexample": {"kind": "growth-condition",
                                   "verdict": verdict.verdict,
                                   "witness": _plain(verdict.witness)}}
    rng = random.Random(int(p["seed"]))
    floor = Fraction(str(p["floor"]))
    min_density = None
    counterexample = None
    densities = []
    for _ in range(int(p["trials"])):
        size = rng.randint(1, 6)
        elems = sorted(rng.sample(range(1, int(p["kmax"]) + 1), size))
        horizon = seq.derived.boundary(max(elems)) - 1
        lifted = lift(FiniteNatSet(elems), seq.derived)
        dens = Fraction(lifted.count_upto(horizon), horizon)
        densities.append(str(dens))
        if min_density is None or dens < min_density:
            min_density = dens
        if dens < floor:
            counterexample = {"kind": "density", "a": elems, "N": horizon,
                              "density": str(dens), "floor": str(floor)}
            break
    return {"suite": "snd-density", "params": _plain(p),
            "density_floor": str(alpha / (alpha + 1)),
            "densities": densities,
            "min_density": str(min_density) if min_density is not None else None,
            "pass": counterexample is None, "counterexample": counterexample}


def wdli_shrink(params: dict | None = None) -> dict:
    """Escape-set upper bounds shrink along horizons for a family point."""
    p = _merge({"spec": "linear:1", "jmax": 8, "zeta": "0,1,0", "eps": "1/10",
                "horizons": "1000,10000,100000", "depth": 8,
                "last_bound": "1/20", "scan_limit": 10 ** 6}, params)
    seq = _seq(str(p["spec"]))
    a_set = weakly_dli_witness_set(seq, int(p["jmax"]), int(p["scan_limit"]))
    zeta = tuple(_int_list(p["zeta"]))
    x = continuum_family_point(a_set, zeta, seq)
    scan = statistical_scan(x, Fraction(str(p["eps"])), _int_list(p["horizons"]),
                            int(p["depth"]))
    his = [e.hi for e in scan.estimates]
    strict = all(u > v for u, v in zip(his, his[1:]))
    last_ok = his[-1] <= Fraction(str(p["last_bound"]))
    counterexample = None
    if not strict:
        counterexample = {"kind": "not-strictly-decreasing",
                          "bounds": [str(h) for h in his]}
    elif not last_ok:
        counterexample = {"kind": "last-bound", "hi": str(his[-1]),
                          "bound": str(p["last_bound"])}
    return {"suite": "wdli-shrink", "params": _plain(p),
            "witness_set": list(a_set.iter_upto(a_set.to_intervals()[-1][1])),
            "support": x.rule.describe(),
            "bounds": [{"N": e.N, "lo": str(e.lo), "hi": str(e.hi),
                        "undecided": e.undecided_count} for e in scan.estimates],
            "verdict": convergence_verdict(scan),
            "pass": counterexample is None, "counterexample": counterexample}


def coincidence(params: dict | None = None) -> dict:
    """Scan of the all-ones point: positive escape floor that persists."""
    p = _merge({"spec": "pow:2", "eps": "1/8", "horizons": "1000,10000,100000",
                "depth": 32, "floor": None, "max_undecided": "1/20"}, params)
    seq = _seq(str(p["spec"]))
    x = CirclePoint(seq, IndicatorDigits(full_set()))
    scan = statistical_scan(x, Fraction(str(p["eps"])), _int_list(p["horizons"]),
                            int(p["depth"]))
    los = [e.lo for e in scan.estimates]
    und = [Fraction(e.undecided_count, e.N) for e in scan.estimates]
    max_und = Fraction(str(p["max_undecided"]))
    counterexample = None
    if los[0] == 0:
        counterexample = {"kind": "zero-floor"}
    elif any(u > max_und for u in und):
        counterexample = {"kind": "undecided", "fractions": [str(u) for u in und]}
    elif p["floor"] is not None:
        floor = Fraction(str(p["floor"]))
        if los[0] != floor:
            counterexample = {"kind": "floor-drift", "measured": str(los[0]),
                              "frozen": str(floor)}
        elif any(v < floor / 2 for v in los[1:]):
            counterexample = {"kind": "floor-decay",
                              "bounds": [str(v) for v in los]}
    return {"suite": "coincidence", "params": _plain(p),
            "floor": str(los[0]),
            "bounds": [{"N": e.N, "lo": str(e.lo), "hi": str(e.hi),
                        "undecided": e.undecided_count} for e in scan.estimates],
            "verdict": convergence_verdict(scan),
            "pass": counterexample is None, "counterexample": counterexample}


def arbault(params: dict | None = None) -> dict:
    """Aligned-digit witness rows certified inside [1/4, 7/8], no failures."""
    p = _merge({"spec": "linear:1", "count": 60, "rows": 20, "depth": 8}, params)
    seq = _seq(str(p["spec"]))
    u_list = [seq.term(n) + seq.term(n - 1) for n in range(1, int(p["count"]) + 1)]
    rep = arbault_witness(seq, u_list, rows=int(p["rows"]), depth=int(p["depth"]))
    counterexample = None
    bad = [row for row in rep.rows if row.verdict != "certified"]
    if len(rep.rows) < int(p["rows"]):
        counterexample = {"kind": "too-few-rows", "got": len(rep.rows)}
    elif bad:
        counterexample = {"kind": bad[0].verdict, "row": bad[0].to_report()}
    elif rep.extras.get("existence_failures"):
        counterexample = {"kind": "existence-failure",
                          "count": rep.extras["existence_failures"]}
    return {"suite": "arbault", "params": _plain(p), "report": rep.to_report(),
            "pass": counterexample is None, "counterexample": counterexample}


def _plain(value):
    """Fractions to 'p/q' strings, tuples to lists, recursively."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


SUITES = {
    "lift-algebra": lift_algebra,
    "tail-bound": tail_bound,
    "recursion": recursion,
    "snd-density": snd_density,
    "wdli-shrink": wdli_shrink,
    "coincidence": coincidence,
    "arbault": arbault,
}


def run_suite(tag: str, params: dict | None = None) -> dict:
    if tag not in SUITES:
        known = ", ".join(sorted(SUITES))
        raise PreconditionError(f"unknown suite {tag!r}; known: {known}")
    return SUITES[tag](params)
