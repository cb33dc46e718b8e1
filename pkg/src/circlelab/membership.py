"""Membership verdicts and the statistical scan.

A point with finite support is a member outright: all values d_i x vanish
from the support's end onward. Infinite support forces non-membership, but
that implication is a cited result, not something the scan proves; the
verdict object keeps the two kinds of evidence apart. The scan itself only
reports certified density bounds for {i <= N : ||d_i x|| >= eps}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .circle import CirclePoint, EnclosureCache, default_depth_cap
from .density import DensityEstimate
from .errors import PreconditionError

__all__ = [
    "MemberVerdict",
    "finite_support_member",
    "ScanResult",
    "statistical_scan",
    "convergence_verdict",
]


@dataclass(frozen=True)
class MemberVerdict:
    """Outcome of the support-based membership test."""

    status: str  # "member" | "non-member" | "inconclusive"
    reason: str
    citation_dependent: bool = False
    cutoff: Optional[int] = None

    def to_report(self) -> dict:
        out = {"status": self.status, "reason": self.reason,
               "citation_dependent": self.citation_dependent}
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out


def finite_support_member(x: CirclePoint) -> MemberVerdict:
    """Classify x by its support form.

    Finite support gives membership constructively: past the last supported
    block every d_i x is an integer multiple of x's denominator scaled away,
    so ||d_i x|| -> 0; the cutoff is the first derived index where the norm
    is already 0. Declared infinite support gives non-membership, but that
    rests on the known characterization of members as finite-support points
    rather than on anything computed here, so the verdict flags itself as
    citation-dependent.
    """
    kind = x.support_kind()
    if kind == "finite":
        m = x.finite_support_max()
        cutoff = x.seq.derived.boundary(m) if m > 0 else 1
        return MemberVerdict(
            status="member",
            reason="finite support; values vanish from the cutoff onward",
            cutoff=cutoff,
        )
    if kind in ("cofinite", "infinite"):
        return MemberVerdict(
            status="non-member",
            reason=f"support declared {kind}; excluded by the "
                   "characterization of members as finite-support points",
            citation_dependent=True,
        )
    return MemberVerdict(
        status="inconclusive",
        reason="support form undeclared; scan statistically instead",
    )


@dataclass
class ScanResult:
    """Certified density bounds for the eps-escape set at each horizon."""

    eps: Fraction
    depth: int
    cap: int
    horizons: tuple[int, ...]
    estimates: list[DensityEstimate] = field(default_factory=list)
    undecided_rows: list[int] = field(default_factory=list)
    spec: str = ""
    point: str = ""

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        return [(e.lo, e.hi) for e in self.estimates]

    def to_report(self) -> dict:
        return {
            "eps": str(self.eps),
            "depth": self.depth,
            "cap": self.cap,
            "spec": self.spec,
            "point": self.point,
            "horizons": list(self.horizons),
            "bounds": [{"N": e.N, "lo": str(e.lo), "hi": str(e.hi),
                        "in": e.in_count, "out": e.out_count,
                        "undecided": e.undecided_count}
                       for e in self.estimates],
            "undecided_rows": self.undecided_rows[:100],
        }


def statistical_scan(x: CirclePoint, eps: Fraction,
                     horizons: Sequence[int], depth: int = 8,
                     cap: Optional[int] = None) -> ScanResult:
    """Count i <= N with ||d_i x|| >= eps, three-way, at each horizon.

    One pass over derived indices; the enclosure for a block is shared by
    all its rows and refined only when a verdict stays undecided, up to the
    cap. Counts are monotone under refinement, so bounds at successive
    horizons come from the same pass.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise PreconditionError("eps must lie in (0, 1/2)")
    horizons = tuple(sorted(set(int(h) for h in horizons)))
    if not horizons or horizons[0] < 1:
        raise PreconditionError("horizons must be positive")
    if cap is None:
        cap = default_depth_cap()
    band_lo, band_hi = eps, 1 - eps
    cache = EnclosureCache(x, depth=depth, cap=cap)
    derived = x.seq.derived
    result = ScanResult(eps=eps, depth=depth, cap=cap, horizons=horizons,
                        spec=x.seq.describe(), point=x.describe())
    kind = x.support_kind()
    bulk_out_from = None
    if kind == "finite":
        m = x.finite_support_max()
        # past the supported blocks every value is exactly 0, norm 0 < eps
        bulk_out_from = derived.boundary(m) if m > 0 else 1
    n_in = n_out = n_und = 0
    i = 1
    for N in horizons:
        while i <= N:
            if bulk_out_from is not None and i >= bulk_out_from:
                n_out += N - i + 1
                i = N + 1
                break
            k, r = derived.decompose(i)
            v = cache.band_verdict(k, r, band_lo, band_hi)
            if v == "in":
                n_in += 1
            elif v == "out":
                n_out += 1
            else:
                n_und += 1
                result.undecided_rows.append(i)
            i += 1
        result.estimates.append(DensityEstimate(N, n_in, n_out, n_und))
    return result


def convergence_verdict(scan: ScanResult) -> dict:
    """Judge whether the scan supports density -> 0 for the escape set.

    Purely heuristic reading of certified bounds; the return spells out
    which rule fired. Heavy indecision defeats any reading.
    """
    if not scan.estimates:
        raise PreconditionError("scan produced no estimates")
    los = [e.lo for e in scan.estimates]
    his = [e.hi for e in scan.estimates]
    und_frac = [Fraction(e.undecided_count, e.N) for e in scan.estimates]
    if any(u > Fraction(1, 2) for u in und_frac):
        return {"verdict": "inconclusive",
                "rule": "undecided fraction exceeds 1/2 at some horizon"}
    if his[-1] == 0:
        return {"verdict": "evidence-for",
                "rule": "upper bound is exactly 0 at the last horizon"}
    strictly_down = all(a > b for a, b in zip(his, his[1:]))
    if strictly_down and len(his) >= 2 and his[-1] <= his[0] / 2:
        return {"verdict": "evidence-for",
                "rule": "upper bounds strictly decrease and at least halve"}
    if los[-1] > 0 and min(los) > 0:
        return {"verdict": "evidence-against",
                "rule": "lower bound stays positive at every horizon"}
    return {"verdict": "inconclusive", "rule": "no decision rule fired"}
