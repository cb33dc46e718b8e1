"""Ratio rules, the arithmetic sequence (a_k), and its derived multiples sequence.

All arithmetic is exact: terms are unbounded Python ints, memoized per object.
The derived sequence enumerates every multiple r*a_k with 1 <= r < b_{k+1} in
increasing order; block k occupies the derived-index range [n_k, n_{k+1} - 1]
where n_0 = 1 and n_{k+1} = n_k + b_{k+1} - 1.

Index conventions: ratios b_n and derived terms d_i are indexed from 1,
arithmetic terms a_k and block boundaries n_k from 0.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from pathlib import Path

from .errors import PreconditionError, SpecParseError

__all__ = ["RatioSpec", "ArithSeq", "DerivedSeq", "cube_block_edges"]


def cube_block_edges():
    """Yield the closed blocks [g_j, h_j] with g_1 = 1, h_j - g_j = j^3, g_{j+1} - h_j = j."""
    g, j = 1, 1
    while True:
        h = g + j**3
        yield g, h
        g = h + j
        j += 1


def _cube_block_elements(jmax):
    edges = cube_block_edges()
    for _ in range(jmax):
        g, h = next(edges)
        yield from range(g, h + 1)


class _BlockRatios:
    """Ratios read off consecutive elements of the cube-gap block set, tail 2.

    With the first jmax blocks enumerated as 1 = e_0 < e_1 < ..., the ratio at
    position m is e_m - e_{m-1} + 1 (2 inside a block, gap + 1 at a join);
    past the enumerated elements every ratio is 2.
    """

    def __init__(self, jmax: int):
        self.jmax = jmax
        self._vals: list[int] = []
        self._elems = _cube_block_elements(jmax)
        self._prev = next(self._elems)
        self._done = False
        self._lock = threading.Lock()

    def term(self, n: int) -> int:
        if not self._done and n > len(self._vals):
            with self._lock:
                while not self._done and n > len(self._vals):
                    e = next(self._elems, None)
                    if e is None:
                        self._done = True
                        break
                    self._vals.append(e - self._prev + 1)
                    self._prev = e
        if n <= len(self._vals):
            return self._vals[n - 1]
        return 2


class RatioSpec:
    """A deterministic rule n -> b_n (n >= 1) with b_n >= 2 for every n.

    Construct through the classmethods (constant, linear, power, explicit,
    blocks) or by parsing a spec string such as ``linear:1`` or ``pow:2``.
    """

    def __init__(self, kind: str, **params):
        self.kind = kind
        self.params = params
        if kind == "constant":
            if params["value"] < 2:
                raise PreconditionError("constant ratio must be >= 2")
        elif kind == "linear":
            if params["offset"] < 1:
                raise PreconditionError("linear offset must be >= 1 so that b_1 >= 2")
        elif kind == "power":
            if params["base"] < 2:
                raise PreconditionError("power base must be >= 2")
        elif kind == "explicit":
            values = tuple(params["values"])
            if any(v < 2 for v in values):
                raise PreconditionError("every explicit ratio must be >= 2")
            if not isinstance(params["tail"], RatioSpec):
                raise PreconditionError("explicit spec needs a tail rule")
            self.params = {"values": values, "tail": params["tail"]}
        elif kind == "blocks":
            if params["jmax"] < 2:
                raise PreconditionError("block construction needs jmax >= 2")
            self._blocks = _BlockRatios(params["jmax"])
        else:
            raise PreconditionError(f"unknown ratio kind {kind!r}")

    @classmethod
    def constant(cls, value: int) -> "RatioSpec":
        return cls("constant", value=value)

    @classmethod
    def linear(cls, offset: int) -> "RatioSpec":
        """b_n = n + offset."""
        return cls("linear", offset=offset)

    @classmethod
    def power(cls, base: int) -> "RatioSpec":
        """b_n = base ** n."""
        return cls("power", base=base)

    @classmethod
    def explicit(cls, values, tail: "RatioSpec") -> "RatioSpec":
        """A finite ratio list followed by a declared tail rule (evaluated at the absolute index)."""
        return cls("explicit", values=tuple(values), tail=tail)

    @classmethod
    def blocks(cls, jmax: int) -> "RatioSpec":
        """Ratios realizing the cube-gap block set for jmax blocks, tail 2."""
        return cls("blocks", jmax=jmax)

    def term(self, n: int) -> int:
        if n < 1:
            raise PreconditionError(f"ratio index must be >= 1, got {n}")
        kind = self.kind
        if kind == "constant":
            return self.params["value"]
        if kind == "linear":
            return n + self.params["offset"]
        if kind == "power":
            return self.params["base"] ** n
        if kind == "explicit":
            values = self.params["values"]
            if n <= len(values):
                return values[n - 1]
            return self.params["tail"].term(n)
        return self._blocks.term(n)

    def eventually_two(self) -> bool:
        """True when b_n = 2 for all large n (decidable for every kind)."""
        if self.kind == "constant":
            return self.params["value"] == 2
        if self.kind == "explicit":
            return self.params["tail"].eventually_two()
        # linear and power ratios grow without bound; block joins recur with
        # join ratio j + 1, so ratios above 2 appear infinitely often there
        # only within the enumerated blocks -- past them the tail is 2.
        if self.kind == "blocks":
            return True
        return False

    def describe(self) -> str:
        kind = self.kind
        if kind == "constant":
            return f"const:{self.params['value']}"
        if kind == "linear":
            return f"linear:{self.params['offset']}"
        if kind == "power":
            return f"pow:{self.params['base']}"
        if kind == "blocks":
            return f"dlictrex:{self.params['jmax']}"
        values = ",".join(str(v) for v in self.params["values"])
        return f"explicit:[{values}];tail={self.params['tail'].describe()}"

    def __eq__(self, other):
        if not isinstance(other, RatioSpec):
            return NotImplemented
        return self.describe() == other.describe()

    def __hash__(self):
        return hash(self.describe())

    def __repr__(self):
        return f"RatioSpec({self.describe()})"

    @classmethod
    def parse(cls, text: str) -> "RatioSpec":
        """Parse a ratio spec string.

        Accepted forms: ``const:C``, ``linear:OFFSET``, ``pow:BASE``,
        ``file:PATH`` (one integer per line plus a ``tail:<spec>`` line),
        ``dlictrex`` or ``dlictrex:JMAX``, and the round-trip form
        ``explicit:[v1,v2,...];tail=<spec>``.
        """
        text = text.strip()
        try:
            if text.startswith("const:"):
                return cls.constant(_parse_int(text[6:]))
            if text.startswith("linear:"):
                return cls.linear(_parse_int(text[7:]))
            if text.startswith("pow:"):
                return cls.power(_parse_int(text[4:]))
            if text == "dlictrex":
                return cls.blocks(20)
            if text.startswith("dlictrex:"):
                return cls.blocks(_parse_int(text[9:]))
            if text.startswith("file:"):
                return _parse_ratio_file(Path(text[5:]))
            if text.startswith("explicit:"):
                return _parse_explicit(text[9:])
        except PreconditionError as exc:
            raise SpecParseError(f"invalid ratio spec {text!r}: {exc}") from exc
        raise SpecParseError(f"unrecognized ratio spec {text!r}")


def _parse_int(text: str) -> int:
    text = text.strip()
    if not text or not (text.isdigit() or (text[0] == "-" and text[1:].isdigit())):
        raise SpecParseError(f"expected an integer, got {text!r}")
    return int(text)


def _parse_explicit(body: str) -> RatioSpec:
    head, sep, tail = body.partition(";tail=")
    if not sep:
        raise SpecParseError("explicit spec needs ';tail=<spec>'")
    head = head.strip()
    if not (head.startswith("[") and head.endswith("]")):
        raise SpecParseError("explicit values must be bracketed, e.g. explicit:[2,3]")
    inner = head[1:-1].strip()
    values = [_parse_int(v) for v in inner.split(",")] if inner else []
    return RatioSpec.explicit(values, RatioSpec.parse(tail))


def _parse_ratio_file(path: Path) -> RatioSpec:
    if not path.exists():
        raise SpecParseError(f"ratio file {path} does not exist")
    values: list[int] = []
    tail = None
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("tail:"):
            tail = RatioSpec.parse(line[5:])
            continue
        values.append(_parse_int(line))
    if tail is None:
        raise SpecParseError(f"ratio file {path} must declare a 'tail:<spec>' line")
    return RatioSpec.explicit(values, tail)


class ArithSeq:
    """Memoized exact terms of a_0 = 1, a_k = b_k * a_{k-1}.

    Concurrent readers are safe: memo extension happens under a lock and is
    idempotent, so a reader sees either an absent or a fully computed value.
    """

    def __init__(self, spec: RatioSpec):
        self.spec = spec
        self._terms = [1]
        self._ratios: list[int] = []
        # term() extends the memo under the lock and calls ratio(), which
        # locks again; reentrancy keeps that safe
        self._lock = threading.RLock()
        self._derived: DerivedSeq | None = None

    def ratio(self, n: int) -> int:
        """b_n for n >= 1."""
        if n < 1:
            raise PreconditionError(f"ratio index must be >= 1, got {n}")
        if n > len(self._ratios):
            with self._lock:
                while n > len(self._ratios):
                    self._ratios.append(self.spec.term(len(self._ratios) + 1))
        return self._ratios[n - 1]

    def term(self, k: int) -> int:
        """a_k for k >= 0."""
        if k < 0:
            raise PreconditionError(f"term index must be >= 0, got {k}")
        if k >= len(self._terms):
            with self._lock:
                while k >= len(self._terms):
                    j = len(self._terms)
                    self._terms.append(self._terms[-1] * self.ratio(j))
        return self._terms[k]

    @property
    def derived(self) -> "DerivedSeq":
        if self._derived is None:
            with self._lock:
                if self._derived is None:
                    self._derived = DerivedSeq(self)
        return self._derived

    def describe(self) -> str:
        return self.spec.describe()

    def __repr__(self):
        return f"ArithSeq({self.describe()})"


class DerivedSeq:
    """The increasing enumeration d_1 < d_2 < ... of {r*a_k : k >= 0, 1 <= r < b_{k+1}}."""

    def __init__(self, base: ArithSeq):
        self.base = base
        self._bounds = [1]
        self._lock = threading.Lock()

    def boundary(self, k: int) -> int:
        """n_k, the derived index of a_k itself (n_0 = 1)."""
        if k < 0:
            raise PreconditionError(f"boundary index must be >= 0, got {k}")
        if k >= len(self._bounds):
            with self._lock:
                while k >= len(self._bounds):
                    j = len(self._bounds)
                    self._bounds.append(self._bounds[-1] + self.base.ratio(j) - 1)
        return self._bounds[k]

    def _block_index(self, i: int) -> int:
        if i < 1:
            raise PreconditionError(f"derived index must be >= 1, got {i}")
        if self._bounds[-1] <= i:
            with self._lock:
                while self._bounds[-1] <= i:
                    j = len(self._bounds)
                    self._bounds.append(self._bounds[-1] + self.base.ratio(j) - 1)
        return bisect_right(self._bounds, i) - 1

    def decompose(self, i: int) -> tuple[int, int]:
        """The unique (k, r) with d_i = r * a_k, 1 <= r < b_{k+1}; i = n_k + r - 1."""
        k = self._block_index(i)
        return k, i - self._bounds[k] + 1

    def term(self, i: int) -> int:
        """d_i for i >= 1."""
        k, r = self.decompose(i)
        return r * self.base.term(k)

    def block(self, k: int) -> tuple[int, int]:
        """The derived-index range [n_k, n_{k+1} - 1] holding the multiples of a_k."""
        return self.boundary(k), self.boundary(k + 1) - 1

    def __repr__(self):
        return f"DerivedSeq({self.base.describe()})"
