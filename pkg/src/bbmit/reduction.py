"""Split-collision instances compiled into matrix-ring identity testing.

The subset automaton over letters {b, c, b1..bm} accepts exactly the words
that contain every b_j.  Its per-letter transition matrices over GF(2) give
the generators T_i in the k-fold product ring (M_t(F_2))^k, and the
polynomial A x1 ... xm B with A = E_{1,1}, B = E_{t,1} fires on a generator
tuple exactly when some component multiplies out to an accepted word.

Domain points and function values are 0-based here; instance JSON uses 1-based.
States are subset bitmasks, so label = mask + 1 puts the initial state (empty
set) at 1 and the final state (all of [m]) at t = 2^m.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import EnumerationTooLarge, MalformedInstance, MTooLarge, UnknownLetter
from .polynomial import Const, MultilinearPolynomial, Term, Var
from .ring import AdditiveBasis, Element, MatrixRingGF2, ProductRing, enumerate_additive_span

MAX_AUTOMATON_M = 12
MAX_REDUCTION_M = 6
DEFAULT_TUPLE_CAP = 10**6


@dataclass(frozen=True)
class DFA:
    """Deterministic automaton with a single accepting state."""

    n_states: int
    alphabet: tuple[str, ...]
    delta: dict  # letter -> tuple of next states indexed by state
    initial: int
    final: int

    def next(self, q: int, a: str) -> int:
        try:
            return self.delta[a][q]
        except KeyError:
            raise UnknownLetter(a) from None

    def run(self, word: Iterable[str]) -> int:
        q = self.initial
        for a in word:
            q = self.next(q, a)
        return q

    def accepts(self, word: Iterable[str]) -> bool:
        return self.run(word) == self.final


def letter(j: int) -> str:
    """Name of the letter b_j (1-based j)."""
    return f"b{j}"


def build_automaton(m: int) -> DFA:
    if not 1 <= m <= MAX_AUTOMATON_M:
        raise MTooLarge(f"m must lie in [1, {MAX_AUTOMATON_M}], got {m}")
    t = 1 << m
    states = range(t)
    delta = {"b": tuple(states), "c": tuple(states)}
    for j in range(1, m + 1):
        delta[letter(j)] = tuple(q | (1 << (j - 1)) for q in states)
    return DFA(t, ("b", "c") + tuple(letter(j) for j in range(1, m + 1)), delta, 0, t - 1)


def state_label(q: int) -> int:
    return q + 1


def matrix_ring(aut: DFA) -> MatrixRingGF2:
    return MatrixRingGF2(aut.n_states)


def letter_matrix(aut: DFA, a: str, ring: MatrixRingGF2 | None = None) -> Element:
    """M_a with M_a[q, q'] = 1 iff delta_a(q) = q'."""
    ring = ring or matrix_ring(aut)
    if a not in aut.delta:
        raise UnknownLetter(a)
    return ring.from_function(aut.delta[a])


def word_matrix(aut: DFA, word: Sequence[str], ring: MatrixRingGF2 | None = None) -> Element:
    """M_{w1} M_{w2} ... by GF(2) matrix multiplication; identity for the empty word."""
    ring = ring or matrix_ring(aut)
    out = ring.identity()
    for a in word:
        out = ring.unmetered.mul(out, letter_matrix(aut, a, ring))
    return out


def boundary_matrices(t: int, ring: MatrixRingGF2 | None = None) -> tuple[Element, Element]:
    """A = E_{1,1} and B = E_{t,1} (1-based), selecting entry (initial, final)."""
    ring = ring or MatrixRingGF2(t)
    return ring.unit(0, 0), ring.unit(t - 1, 0)


def sandwich_nonzero(aut: DFA, word: Sequence[str]) -> bool:
    """Whether A M_w B != 0."""
    ring = matrix_ring(aut)
    A, B = boundary_matrices(aut.n_states, ring)
    mul = ring.unmetered.mul
    return not ring.is_zero(mul(mul(A, word_matrix(aut, word, ring)), B))


@dataclass(frozen=True)
class SplitCollisionInstance:
    k: int
    m: int
    f: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise MalformedInstance("k and m must be positive")
        if self.k % self.m:
            raise MalformedInstance(f"k={self.k} is not a multiple of m={self.m}")
        if len(self.f) != self.k:
            raise MalformedInstance(f"function table has {len(self.f)} entries, expected {self.k}")
        if any(not 0 <= v < self.k for v in self.f):
            raise MalformedInstance("function values must lie in the domain")

    @property
    def block(self) -> int:
        return self.k // self.m

    def interval_of(self, i: int) -> int:
        """0-based interval index j with i in I_{j+1}."""
        return i // self.block

    @property
    def intervals(self) -> list[range]:
        n = self.block
        return [range(j * n, (j + 1) * n) for j in range(self.m)]

    def fiber(self, v: int) -> list[int]:
        return [i for i, fi in enumerate(self.f) if fi == v]


def split_collision_value(inst: SplitCollisionInstance) -> int | None:
    """Smallest v with exactly m preimages, one in each interval, if any."""
    for v in range(inst.k):
        pre = inst.fiber(v)
        if len(pre) == inst.m and sorted(inst.interval_of(i) for i in pre) == list(range(inst.m)):
            return v
    return None


def has_split_collision(inst: SplitCollisionInstance) -> bool:
    return split_collision_value(inst) is not None


def has_covering_collision(inst: SplitCollisionInstance) -> bool:
    """Some fiber meets every interval (possibly with more than m points)."""
    return any({inst.interval_of(i) for i in inst.fiber(v)} == set(range(inst.m)) for v in range(inst.k))


def has_m_collision(f: Sequence[int], m: int) -> bool:
    counts = np.bincount(np.asarray(f), minlength=len(f))
    return bool(np.any(counts == m))


@dataclass(frozen=True)
class ReductionOutput:
    instance: SplitCollisionInstance
    automaton: DFA
    ring: ProductRing
    generators: tuple[Element, ...]
    polynomial: MultilinearPolynomial
    clashes: tuple[int, ...]
    clash_rule: str

    @property
    def basis(self) -> AdditiveBasis:
        return AdditiveBasis.build(self.ring, self.generators)

    @property
    def t(self) -> int:
        return self.automaton.n_states


def build_instance(inst: SplitCollisionInstance, clash_rule: str = "letter") -> ReductionOutput:
    """Generators T_i and polynomial A x1 ... xm B for the instance.

    T_i carries M_b in slot i, M_{b_j} in slot f(i) (i in I_j) and M_c
    elsewhere.  When f(i) = i both claims hit one slot: ``clash_rule="letter"``
    keeps M_{b_j}; ``"b"`` keeps M_b (offered only for comparison).
    """
    if inst.m > MAX_REDUCTION_M:
        raise MTooLarge(f"m={inst.m} exceeds reduction cap {MAX_REDUCTION_M}")
    if clash_rule not in ("letter", "b"):
        raise ValueError(f"unknown clash rule {clash_rule!r}")
    aut = build_automaton(inst.m)
    mat = matrix_ring(aut)
    ring = ProductRing([mat] * inst.k)
    Mb, Mc = letter_matrix(aut, "b", mat), letter_matrix(aut, "c", mat)
    gens = []
    clashes = []
    for i in range(inst.k):
        slots = [Mc] * inst.k
        slots[i] = Mb
        fi = inst.f[i]
        if fi == i:
            clashes.append(i)
            if clash_rule == "b":
                gens.append(ring.join(slots))
                continue
        slots[fi] = letter_matrix(aut, letter(inst.interval_of(i) + 1), mat)
        gens.append(ring.join(slots))
    A, B = boundary_matrices(aut.n_states, mat)
    A_bar, B_bar = ring.join([A] * inst.k), ring.join([B] * inst.k)
    poly = MultilinearPolynomial(
        inst.m,
        (Term((Const(A_bar),) + tuple(Var(j) for j in range(inst.m)) + (Const(B_bar),)),),
        "noncommuting",
    )
    return ReductionOutput(inst, aut, ring, tuple(gens), poly, tuple(clashes), clash_rule)


@dataclass(frozen=True)
class EquivalenceReport:
    identity: bool  # P vanishes on every generator tuple
    split_collision: bool
    covering_collision: bool
    witness: tuple[int, ...] | None  # generator indices of the first nonzero tuple
    f_evals: int
    span_identity: bool | None = None

    @property
    def agrees(self) -> bool:
        return self.identity == (not self.split_collision)


def verify_equivalence(inst: SplitCollisionInstance, span_check: bool = False,
                       cap: int = DEFAULT_TUPLE_CAP, clash_rule: str = "letter") -> EquivalenceReport:
    """Evaluate P on all k^m generator tuples and compare with brute force.

    With ``span_check`` P is also evaluated on all m-tuples from the full
    GF(2) span of the generators.
    """
    if inst.k ** inst.m > cap:
        raise EnumerationTooLarge(f"{inst.k}^{inst.m} tuples exceed cap {cap}")
    red = build_instance(inst, clash_rule)
    ring, P = red.ring, red.polynomial
    before = ring.ledger
    witness = None
    for idx in itertools.product(range(inst.k), repeat=inst.m):
        if not ring.is_zero(P.evaluate(ring, [red.generators[i] for i in idx])) and witness is None:
            witness = idx
    f_evals = (ring.ledger - before).f_eval_count
    span_identity = None
    if span_check:
        span = sorted(enumerate_additive_span(ring, red.generators))
        if len(span) ** inst.m > cap:
            raise EnumerationTooLarge(f"{len(span)}^{inst.m} span tuples exceed cap {cap}")
        span_identity = all(ring.is_zero(P.evaluate(ring, tup))
                            for tup in itertools.product(span, repeat=inst.m))
    return EquivalenceReport(
        identity=witness is None,
        split_collision=has_split_collision(inst),
        covering_collision=has_covering_collision(inst),
        witness=witness,
        f_evals=f_evals,
        span_identity=span_identity,
    )


def random_partition_lift(f_table: Sequence[int], m: int, rng: np.random.Generator) -> SplitCollisionInstance:
    """Relabel the domain by a uniform permutation so that a uniform
    equal-sized m-partition becomes the consecutive intervals."""
    k = len(f_table)
    if m < 1 or k % m:
        raise MalformedInstance(f"k={k} is not a multiple of m={m}")
    perm = rng.permutation(k)
    return SplitCollisionInstance(k, m, tuple(int(f_table[p]) for p in perm))


def planted_collision(k: int, m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """A table with one fiber of size exactly m and all other fibers singletons."""
    if not 1 <= m <= k:
        raise MalformedInstance("need 1 <= m <= k")
    points = rng.permutation(k)
    target = int(points[0])
    f = list(range(k))
    values = [v for v in range(k) if v != target]
    rng.shuffle(values)
    fiber = set(int(p) for p in points[:m])
    rest = iter(values)
    for i in range(k):
        f[i] = target if i in fiber else next(rest)
    return tuple(f)


def split_probability(k: int, m: int) -> Fraction:
    """Probability that m fixed domain points land one per part: (k/m)^m / C(k, m)."""
    return Fraction((k // m) ** m, math.comb(k, m))
