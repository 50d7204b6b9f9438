"""Finite rings behind a query-counted black-box oracle interface.

Elements are immutable ``bytes`` in a canonical fixed-width encoding, so two
elements are equal iff their encodings are byte-identical.  Every concrete ring
charges one unit to its ledger per oracle call (add, mul, neg); equality and
zero tests are free.

Encodings:

* ``IntegersModN``: residue as little-endian unsigned integer.
* ``MatrixRingGF2``: t x t matrix, row-major, bit ``r*t + c`` of a
  little-endian integer holds entry (r, c).
* ``ProductRing``: concatenation of the factor encodings.
"""

from __future__ import annotations

import abc
import functools
import itertools
from collections import Counter, deque
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidElement, InvalidIndex, SchemaError, SpanTooLarge

Element = bytes

DEFAULT_SPAN_CAP = 2**20


@dataclass(frozen=True)
class QueryLedger:
    """Immutable snapshot of per-oracle query counters.

    ``fused_sub_count`` records subtractions (neg followed by add) that are
    charged as a single oracle access; their negations still show up in
    ``neg_count`` so the raw figures stay visible.
    """

    add_count: int = 0
    mul_count: int = 0
    neg_count: int = 0
    f_eval_count: int = 0
    fused_sub_count: int = 0

    @property
    def ring_accesses(self) -> int:
        return self.add_count + self.mul_count + self.neg_count - self.fused_sub_count

    @property
    def total(self) -> int:
        return self.ring_accesses + self.f_eval_count

    def __add__(self, other: QueryLedger) -> QueryLedger:
        return QueryLedger(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def __sub__(self, other: QueryLedger) -> QueryLedger:
        return QueryLedger(*(getattr(self, f.name) - getattr(other, f.name) for f in fields(self)))

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["ring_accesses"] = self.ring_accesses
        return d


class _Unmetered:
    """Oracle-free view of a ring, used inside opaque f-oracles and verifiers."""

    __slots__ = ("_ring",)

    def __init__(self, ring: BlackBoxRing):
        self._ring = ring

    def add(self, a: Element, b: Element) -> Element:
        return self._ring._add(a, b)

    def mul(self, a: Element, b: Element) -> Element:
        return self._ring._mul(a, b)

    def neg(self, a: Element) -> Element:
        return self._ring._neg(a)

    def sub(self, a: Element, b: Element) -> Element:
        return self._ring._add(a, self._ring._neg(b))


class BlackBoxRing(abc.ABC):
    """A finite ring reachable only through counted add/mul/neg oracles."""

    width: int  # bytes per encoding

    def __init__(self) -> None:
        self._counts: Counter = Counter()
        self.unmetered = _Unmetered(self)

    # -- ledger ---------------------------------------------------------
    @property
    def ledger(self) -> QueryLedger:
        return ledger_snapshot(self)

    def charge(self, kind: str, n: int = 1) -> None:
        self._counts[kind] += n

    def reset_ledger(self) -> None:
        self._counts.clear()

    # -- oracles --------------------------------------------------------
    def add(self, a: Element, b: Element) -> Element:
        self.validate(a)
        self.validate(b)
        self._counts["add_count"] += 1
        return self._add(a, b)

    def mul(self, a: Element, b: Element) -> Element:
        self.validate(a)
        self.validate(b)
        self._counts["mul_count"] += 1
        return self._mul(a, b)

    def neg(self, a: Element) -> Element:
        self.validate(a)
        self._counts["neg_count"] += 1
        return self._neg(a)

    def sub(self, a: Element, b: Element) -> Element:
        """a - b, charged as one oracle access (the negation is fused)."""
        self.validate(a)
        self.validate(b)
        self._counts["neg_count"] += 1
        self._counts["add_count"] += 1
        self._counts["fused_sub_count"] += 1
        return self._add(a, self._neg(b))

    # -- free operations ------------------------------------------------
    @property
    @abc.abstractmethod
    def zero(self) -> Element: ...

    def eq(self, a: Element, b: Element) -> bool:
        return a == b

    def is_zero(self, a: Element) -> bool:
        return a == self.zero

    def validate(self, a: Element) -> None:
        if not isinstance(a, bytes) or len(a) != self.width:
            raise InvalidElement(f"{self!r}: expected {self.width}-byte encoding, got {a!r}")
        self._validate_value(a)

    # -- subclass hooks -------------------------------------------------
    @abc.abstractmethod
    def _validate_value(self, a: Element) -> None: ...

    @abc.abstractmethod
    def _add(self, a: Element, b: Element) -> Element: ...

    @abc.abstractmethod
    def _mul(self, a: Element, b: Element) -> Element: ...

    @abc.abstractmethod
    def _neg(self, a: Element) -> Element: ...

    @property
    @abc.abstractmethod
    def order(self) -> int: ...

    @abc.abstractmethod
    def elements(self) -> Iterable[Element]: ...

    @abc.abstractmethod
    def random_element(self, rng: np.random.Generator) -> Element: ...

    @abc.abstractmethod
    def from_literal(self, lit) -> Element: ...

    @abc.abstractmethod
    def to_literal(self, a: Element): ...

    @abc.abstractmethod
    def spec(self) -> dict: ...

    def __eq__(self, other) -> bool:
        return isinstance(other, BlackBoxRing) and self.spec() == other.spec()

    def __hash__(self) -> int:
        return hash(repr(self.spec()))


def _nbytes(bits: int) -> int:
    return max(1, (bits + 7) // 8)


class IntegersModN(BlackBoxRing):
    def __init__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"modulus must be a positive integer, got {n!r}")
        super().__init__()
        self.n = n
        self.width = _nbytes((n - 1).bit_length())
        self._zero = self.encode(0)

    def __repr__(self) -> str:
        return f"IntegersModN({self.n})"

    def encode(self, v: int) -> Element:
        return (v % self.n).to_bytes(self.width, "little")

    def decode(self, a: Element) -> int:
        return int.from_bytes(a, "little")

    @property
    def zero(self) -> Element:
        return self._zero

    @property
    def order(self) -> int:
        return self.n

    def _validate_value(self, a):
        if self.decode(a) >= self.n:
            raise InvalidElement(f"{a!r} is not a residue mod {self.n}")

    def _add(self, a, b):
        return self.encode(self.decode(a) + self.decode(b))

    def _mul(self, a, b):
        return self.encode(self.decode(a) * self.decode(b))

    def _neg(self, a):
        return self.encode(-self.decode(a))

    def elements(self):
        return (self.encode(v) for v in range(self.n))

    def random_element(self, rng):
        return self.encode(int(rng.integers(self.n)))

    def from_literal(self, lit) -> Element:
        if isinstance(lit, bool) or not isinstance(lit, int):
            raise InvalidElement(f"Zn literal must be an integer, got {lit!r}")
        if not 0 <= lit < self.n:
            raise InvalidElement(f"Zn literal {lit} out of range [0, {self.n})")
        return self.encode(lit)

    def to_literal(self, a):
        return self.decode(a)

    def spec(self):
        return {"type": "Zn", "n": self.n}


class MatrixRingGF2(BlackBoxRing):
    """The ring M_t(F_2) with row-major bit-packed matrices."""

    def __init__(self, t: int):
        if not isinstance(t, int) or t < 1:
            raise ValueError(f"matrix size must be a positive integer, got {t!r}")
        super().__init__()
        self.t = t
        self.nbits = t * t
        self.width = _nbytes(self.nbits)
        self._row_mask = (1 << t) - 1
        self._zero = self.encode(0)

    def __repr__(self) -> str:
        return f"MatrixRingGF2({self.t})"

    def encode(self, bits: int) -> Element:
        return bits.to_bytes(self.width, "little")

    def decode(self, a: Element) -> int:
        return int.from_bytes(a, "little")

    @property
    def zero(self):
        return self._zero

    @property
    def order(self):
        return 1 << self.nbits

    def _validate_value(self, a):
        if self.decode(a) >> self.nbits:
            raise InvalidElement(f"{a!r} has nonzero padding bits for t={self.t}")

    def _rows(self, bits: int) -> list[int]:
        t, mask = self.t, self._row_mask
        return [(bits >> (r * t)) & mask for r in range(t)]

    def _add(self, a, b):
        return self.encode(self.decode(a) ^ self.decode(b))

    def _neg(self, a):
        return a

    def _mul(self, a, b):
        return _gf2_matmul(self.t, a, b)

    # -- construction helpers ---------------------------------------------
    def from_rows(self, rows: Sequence[Sequence[int]]) -> Element:
        t = self.t
        if len(rows) != t or any(len(r) != t for r in rows):
            raise InvalidElement(f"expected a {t}x{t} matrix")
        bits = 0
        for r, row in enumerate(rows):
            for c, v in enumerate(row):
                if v & 1:
                    bits |= 1 << (r * t + c)
        return self.encode(bits)

    def to_array(self, a: Element) -> np.ndarray:
        bits = self.decode(a)
        flat = [(bits >> i) & 1 for i in range(self.nbits)]
        return np.array(flat, dtype=np.uint8).reshape(self.t, self.t)

    def entry(self, a: Element, r: int, c: int) -> int:
        return (self.decode(a) >> (r * self.t + c)) & 1

    def unit(self, r: int, c: int) -> Element:
        """The matrix unit E_rc (0-based indices)."""
        return self.encode(1 << (r * self.t + c))

    def identity(self) -> Element:
        return self.from_function(range(self.t))

    def from_function(self, image: Sequence[int]) -> Element:
        """Adjacency matrix of the function graph q -> image[q]."""
        if len(image) != self.t:
            raise InvalidElement("function image must have one entry per row")
        bits = 0
        for q, q2 in enumerate(image):
            bits |= 1 << (q * self.t + q2)
        return self.encode(bits)

    def is_row_functional(self, a: Element) -> bool:
        return all(row != 0 and row & (row - 1) == 0 for row in self._rows(self.decode(a)))

    def elements(self):
        if self.nbits > 24:
            raise SpanTooLarge(f"{self!r} has 2^{self.nbits} elements")
        return (self.encode(v) for v in range(1 << self.nbits))

    def random_element(self, rng):
        bits = 0
        for i in range(0, self.nbits, 32):
            bits |= int(rng.integers(1 << 32)) << i
        return self.encode(bits & ((1 << self.nbits) - 1))

    def from_literal(self, lit) -> Element:
        if not isinstance(lit, str) or len(lit) != self.nbits or set(lit) - {"0", "1"}:
            raise InvalidElement(f"MatF2 literal must be a {self.nbits}-char bit string, got {lit!r}")
        bits = 0
        for i, ch in enumerate(lit):
            if ch == "1":
                bits |= 1 << i
        return self.encode(bits)

    def to_literal(self, a):
        bits = self.decode(a)
        return "".join("1" if (bits >> i) & 1 else "0" for i in range(self.nbits))

    def spec(self):
        return {"type": "MatF2", "t": self.t}


@functools.lru_cache(maxsize=1 << 16)
def _gf2_matmul(t: int, a: Element, b: Element) -> Element:
    # row r of a*b is the XOR of the rows of b selected by the bits of row r of a;
    # cached because verifiers multiply the same few matrices over and over
    mask = (1 << t) - 1
    x, y = int.from_bytes(a, "little"), int.from_bytes(b, "little")
    rows_b = [(y >> (r * t)) & mask for r in range(t)]
    out = 0
    for r in range(t):
        row = (x >> (r * t)) & mask
        acc = 0
        c = 0
        while row:
            if row & 1:
                acc ^= rows_b[c]
            row >>= 1
            c += 1
        out |= acc << (r * t)
    return out.to_bytes(len(a), "little")


class ProductRing(BlackBoxRing):
    """Direct product of rings; every operation is componentwise."""

    def __init__(self, factors: Sequence[BlackBoxRing]):
        if not factors:
            raise ValueError("product ring needs at least one factor")
        super().__init__()
        self.factors = tuple(factors)
        self.offsets = []
        off = 0
        for r in self.factors:
            self.offsets.append(off)
            off += r.width
        self.width = off
        self._zero = b"".join(r.zero for r in self.factors)

    def __repr__(self) -> str:
        return f"ProductRing({list(self.factors)!r})"

    def split(self, a: Element) -> list[Element]:
        return [a[o:o + r.width] for o, r in zip(self.offsets, self.factors)]

    def join(self, parts: Sequence[Element]) -> Element:
        if len(parts) != len(self.factors):
            raise InvalidElement(f"expected {len(self.factors)} components, got {len(parts)}")
        for r, p in zip(self.factors, parts):
            r.validate(p)
        return b"".join(parts)

    @property
    def zero(self):
        return self._zero

    @property
    def order(self):
        out = 1
        for r in self.factors:
            out *= r.order
        return out

    def _validate_value(self, a):
        for r, p in zip(self.factors, self.split(a)):
            r.validate(p)

    def _add(self, a, b):
        return b"".join(r._add(x, y) for r, x, y in zip(self.factors, self.split(a), self.split(b)))

    def _mul(self, a, b):
        return b"".join(r._mul(x, y) for r, x, y in zip(self.factors, self.split(a), self.split(b)))

    def _neg(self, a):
        return b"".join(r._neg(x) for r, x in zip(self.factors, self.split(a)))

    def elements(self):
        if self.order > DEFAULT_SPAN_CAP:
            raise SpanTooLarge(f"{self!r} has {self.order} elements")
        return (b"".join(p) for p in itertools.product(*(list(r.elements()) for r in self.factors)))

    def random_element(self, rng):
        return b"".join(r.random_element(rng) for r in self.factors)

    def from_literal(self, lit) -> Element:
        if not isinstance(lit, list) or len(lit) != len(self.factors):
            raise InvalidElement(f"product literal must be a list of {len(self.factors)} components")
        return b"".join(r.from_literal(x) for r, x in zip(self.factors, lit))

    def to_literal(self, a):
        return [r.to_literal(p) for r, p in zip(self.factors, self.split(a))]

    def spec(self):
        return {"type": "Product", "factors": [r.spec() for r in self.factors]}


def ring_from_spec(spec: dict, field: str = "ring") -> BlackBoxRing:
    """Build a ring from its JSON description."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise SchemaError("ring spec must be an object with a 'type'", field)
    kind = spec["type"]
    if kind == "Zn":
        n = spec.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise SchemaError("'n' must be a positive integer", f"{field}.n")
        return IntegersModN(n)
    if kind == "MatF2":
        t = spec.get("t")
        if isinstance(t, bool) or not isinstance(t, int) or t < 1:
            raise SchemaError("'t' must be a positive integer", f"{field}.t")
        return MatrixRingGF2(t)
    if kind == "Product":
        factors = spec.get("factors")
        if not isinstance(factors, list) or not factors:
            raise SchemaError("'factors' must be a non-empty list", f"{field}.factors")
        return ProductRing([ring_from_spec(f, f"{field}.factors[{i}]") for i, f in enumerate(factors)])
    raise SchemaError(f"unknown ring type {kind!r}", f"{field}.type")


def ledger_snapshot(ring: BlackBoxRing) -> QueryLedger:
    c = ring._counts
    return QueryLedger(
        add_count=c["add_count"],
        mul_count=c["mul_count"],
        neg_count=c["neg_count"],
        f_eval_count=c["f_eval_count"],
        fused_sub_count=c["fused_sub_count"],
    )


# Functional aliases for the oracle calls.
def add(ring: BlackBoxRing, a: Element, b: Element) -> Element:
    return ring.add(a, b)


def mul(ring: BlackBoxRing, a: Element, b: Element) -> Element:
    return ring.mul(a, b)


def neg(ring: BlackBoxRing, a: Element) -> Element:
    return ring.neg(a)


@dataclass(frozen=True)
class AdditiveBasis:
    """Additive generators r_1..r_k with the zero element in position 0.

    Build with :meth:`build`, which canonicalizes, drops duplicates and moves
    (or prepends) zero to the front.
    """

    generators: tuple[Element, ...]
    # build metadata, not part of the basis identity
    zero_prepended: bool = field(default=False, compare=False)
    duplicates_dropped: int = field(default=0, compare=False)

    @property
    def k(self) -> int:
        return len(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __getitem__(self, i: int) -> Element:
        return self.generators[i]

    def __iter__(self):
        return iter(self.generators)

    @classmethod
    def build(cls, ring: BlackBoxRing, generators: Iterable[Element], ensure_zero: bool = True) -> AdditiveBasis:
        seen: dict[Element, None] = {}
        total = 0
        for g in generators:
            ring.validate(g)
            seen.setdefault(g, None)
            total += 1
        gens = list(seen)
        dropped = total - len(gens)
        prepended = False
        if ensure_zero:
            if ring.zero in seen:
                gens.remove(ring.zero)
            else:
                prepended = True
            gens.insert(0, ring.zero)
        return cls(tuple(gens), prepended, dropped)


def subset_sum(ring: BlackBoxRing, basis: AdditiveBasis, u: Iterable[int]) -> Element:
    """r_u = sum of r_i for i in u, using exactly |u| - 1 add queries."""
    idx = list(u)
    if not idx:
        raise InvalidIndex("subset must be nonempty")
    if len(set(idx)) != len(idx):
        raise InvalidIndex(f"subset has repeated indices: {idx}")
    k = basis.k
    for i in idx:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < k:
            raise InvalidIndex(f"index {i} out of range [0, {k})")
    acc = basis[idx[0]]
    for i in idx[1:]:
        acc = ring.add(acc, basis[i])
    return acc


def enumerate_additive_span(ring: BlackBoxRing, generators: Iterable[Element],
                            cap: int = DEFAULT_SPAN_CAP) -> frozenset[Element]:
    """Additive closure of the generators, by BFS from zero.

    In a finite group the additive monoid generated by a set is already the
    subgroup, so repeated addition reaches every integer combination.
    Oracle-free: this is a verification tool, not part of any tested algorithm.
    """
    gens = list(dict.fromkeys(generators))
    for g in gens:
        ring.validate(g)
    zero = ring.zero
    span = {zero}
    queue = deque([zero])
    add_ = ring._add
    while queue:
        x = queue.popleft()
        for g in gens:
            y = add_(x, g)
            if y not in span:
                span.add(y)
                if len(span) > cap:
                    raise SpanTooLarge(f"additive span exceeds {cap} elements")
                queue.append(y)
    return frozenset(span)


def enumerate_subgroups(ring: BlackBoxRing, group: frozenset[Element]) -> list[frozenset[Element]]:
    """All additive subgroups of a finite additive group given as a set."""
    zero = ring.zero
    trivial = frozenset([zero])
    found = {trivial}
    queue = deque([trivial])
    while queue:
        h = queue.popleft()
        for g in group:
            if g in h:
                continue
            bigger = _join(ring, h, g)
            if bigger not in found:
                found.add(bigger)
                queue.append(bigger)
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _join(ring: BlackBoxRing, h: frozenset[Element], g: Element) -> frozenset[Element]:
    # <H, g> = union over multiples j*g of the cosets H + j*g
    out = set(h)
    mult = g
    while mult not in h:
        out.update(ring._add(x, mult) for x in h)
        mult = ring._add(mult, g)
    return frozenset(out)


def cosets(ring: BlackBoxRing, group: frozenset[Element], subgroup: frozenset[Element]) -> list[frozenset[Element]]:
    """Distinct additive cosets g + H of ``subgroup`` inside ``group``."""
    out = []
    covered: set[Element] = set()
    for g in sorted(group):
        if g in covered:
            continue
        c = frozenset(ring._add(g, h) for h in subgroup)
        covered |= c
        out.append(c)
    return out


def is_subgroup(ring: BlackBoxRing, s: frozenset[Element]) -> bool:
    if ring.zero not in s:
        return False
    return all(ring._add(a, b) in s for a in s for b in s)
