"""Classical identity tests and exhaustive checks of the subsum lemmas.

All probabilities are exact ``Fraction`` values.  Subset indices are 0-based
positions into an :class:`AdditiveBasis` whose position 0 holds zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    EnumerationTooLarge,
    InvalidIndex,
    LemmaViolation,
    NotAProperCoset,
    NotApplicable,
)
from .polynomial import BlackBox, require_multilinear
from .ring import (
    DEFAULT_SPAN_CAP,
    AdditiveBasis,
    BlackBoxRing,
    Element,
    QueryLedger,
    enumerate_additive_span,
    is_subgroup,
    subset_sum,
)
from .rng import make_rng

DEFAULT_ENUMERATION_CAP = 10**6


class Outcome(str, Enum):
    IDENTITY_CONSISTENT = "IdentityConsistent"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class TestVerdict:
    __test__ = False  # not a pytest class

    outcome: Outcome
    witness: tuple[Element, ...] | None
    ledger_delta: QueryLedger
    trials: int | None = None
    trials_run: int | None = None
    ell: int | None = None
    witness_subsets: tuple[tuple[int, ...], ...] | None = None
    per_trial_bound: Fraction | None = None

    @property
    def violated(self) -> bool:
        return self.outcome is Outcome.VIOLATED


@dataclass(frozen=True)
class SamplerConfig:
    ell: int | None = None
    trials: int | None = None
    seed: int = 0
    failure_bound: float = 0.01

    def resolve_ell(self, k: int) -> int:
        ell = self.ell if self.ell is not None else max(1, k // 2)
        if not 1 <= ell <= k:
            raise InvalidIndex(f"subset size {ell} outside [1, {k}]")
        return ell

    def resolve_trials(self, m: int) -> int:
        if not 0 < self.failure_bound < 1:
            raise ValueError(f"failure_bound must lie in (0, 1), got {self.failure_bound}")
        trials = self.trials if self.trials is not None else trial_count(m, self.failure_bound)
        if trials < 1:
            raise ValueError("need at least one trial")
        return trials


def trial_count(m: int, failure_bound: float) -> int:
    """ceil(4^m ln(1/failure_bound)): enough trials when each succeeds w.p. >= 4^-m."""
    return math.ceil(4**m * math.log(1 / failure_bound))


def collision_parameter(k: int, ell: int) -> Fraction:
    """p = (l(l-1) + (k-l)(k-l-1)) / (k(k-1))."""
    return Fraction(ell * (ell - 1) + (k - ell) * (k - ell - 1), k * (k - 1))


def subsum_bound(k: int, ell: int) -> Fraction:
    """(1-p)/2 = l(k-l) / (k(k-1)), the per-coordinate escape probability."""
    if k < 2:
        raise ValueError("the subsum bound needs k >= 2")
    bound = Fraction(ell * (k - ell), k * (k - 1))
    assert bound == (1 - collision_parameter(k, ell)) / 2
    return bound


def deterministic_test(f: BlackBox, ring: BlackBoxRing, basis: AdditiveBasis) -> TestVerdict:
    """Evaluate f on all k^m tuples of generators.

    Zero everywhere on generator tuples implies zero on the whole additive
    span for multilinear f.  Always spends exactly k^m f-evals; the witness is
    the first nonzero tuple in lexicographic basis order.
    """
    require_multilinear(f)
    before = ring.ledger
    witness = None
    for tup in itertools.product(basis.generators, repeat=f.m):
        if not ring.is_zero(f.evaluate(ring, tup)) and witness is None:
            witness = tup
    outcome = Outcome.VIOLATED if witness is not None else Outcome.IDENTITY_CONSISTENT
    return TestVerdict(outcome, witness, ring.ledger - before)


def random_subsum(ring: BlackBoxRing, basis: AdditiveBasis, ell: int,
                  rng: np.random.Generator) -> tuple[tuple[int, ...], Element]:
    """Uniform ell-subset u of the basis positions together with r_u (ell - 1 adds)."""
    k = basis.k
    if not 1 <= ell <= k:
        raise InvalidIndex(f"subset size {ell} outside [1, {k}]")
    u = tuple(sorted(int(i) for i in rng.choice(k, size=ell, replace=False)))
    return u, subset_sum(ring, basis, u)


def randomized_test(f: BlackBox, ring: BlackBoxRing, basis: AdditiveBasis,
                    config: SamplerConfig = SamplerConfig(),
                    rng: np.random.Generator | None = None) -> TestVerdict:
    """Random-subsum test with one-sided error.

    Each trial draws m independent ell-subsets, evaluates f once on their sums
    and stops at the first nonzero value.  A true identity is never flagged.
    """
    require_multilinear(f)
    k = basis.k
    ell = config.resolve_ell(k)
    trials = config.resolve_trials(f.m)
    rng = make_rng(config.seed) if rng is None else rng
    bound = subsum_bound(k, ell) ** f.m if k >= 2 else Fraction(1)

    before = ring.ledger
    for t in range(1, trials + 1):
        draws = [random_subsum(ring, basis, ell, rng) for _ in range(f.m)]
        values = tuple(v for _, v in draws)
        if not ring.is_zero(f.evaluate(ring, values)):
            return TestVerdict(Outcome.VIOLATED, values, ring.ledger - before, trials, t, ell,
                               tuple(u for u, _ in draws), bound)
    return TestVerdict(Outcome.IDENTITY_CONSISTENT, None, ring.ledger - before, trials, trials, ell,
                       None, bound)


# ---------------------------------------------------------------------------
# exhaustive lemma verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosetReport:
    coordinate: int
    span_size: int
    zero_set: frozenset  # R_i
    representative: Element | None
    subgroup: frozenset | None
    is_coset: bool
    half_bound: bool

    @property
    def size(self) -> int:
        return len(self.zero_set)

    @property
    def holds(self) -> bool:
        return self.is_coset and self.half_bound


def _vanishing_set(f: BlackBox, ring: BlackBoxRing, span: Sequence[Element], i: int) -> frozenset:
    out = set()
    for u in span:
        for rest in itertools.product(span, repeat=f.m - 1):
            vals = list(rest)
            vals.insert(i, u)
            if not ring.is_zero(f.evaluate(ring, vals)):
                break
        else:
            out.add(u)
    return frozenset(out)


def verify_coset_lemma(f: BlackBox, ring: BlackBoxRing, basis: AdditiveBasis, i: int,
                       span_cap: int = DEFAULT_SPAN_CAP) -> CosetReport:
    """Brute-force R_i (elements that force f to vanish in coordinate i) and
    check that it is a coset of a proper subgroup of size at most half the span.

    An empty R_i (e.g. a nonzero constant f) satisfies the size bound and is
    reported as vacuously a coset.
    """
    require_multilinear(f)
    if not 0 <= i < f.m:
        raise InvalidIndex(f"coordinate {i} out of range for m={f.m}")
    span = sorted(enumerate_additive_span(ring, basis, span_cap))
    zero_set = _vanishing_set(f, ring, span, i)
    if not deterministic_test(f, ring, basis).violated:
        if len(zero_set) != len(span):
            raise LemmaViolation("f vanishes on generator tuples but not on the whole span")
        raise NotApplicable("f vanishes on the span, so R_i is the whole span")
    if zero_set:
        rep = min(zero_set)
        sub = frozenset(ring.unmetered.sub(x, rep) for x in zero_set)
        is_coset = is_subgroup(ring, sub) and len(sub) < len(span)
    else:
        rep, sub, is_coset = None, None, True
    report = CosetReport(i, len(span), zero_set, rep, sub, is_coset, 2 * len(zero_set) <= len(span))
    if not report.holds:
        raise LemmaViolation(f"coset property fails in coordinate {i}: {report}")
    return report


class ProbabilityCheck(NamedTuple):
    probability: Fraction
    bound: Fraction


def verify_subsum_lemma(ring: BlackBoxRing, basis: AdditiveBasis, coset: frozenset, ell: int,
                        span_cap: int = DEFAULT_SPAN_CAP) -> ProbabilityCheck:
    """Exact Prob over ell-subsets u that r_u avoids the coset, against (1-p)/2."""
    span = enumerate_additive_span(ring, basis, span_cap)
    coset = frozenset(coset)
    if not coset or not coset <= span:
        raise NotAProperCoset("T must be a nonempty subset of the span")
    rep = min(coset)
    sub = frozenset(ring.unmetered.sub(x, rep) for x in coset)
    if not is_subgroup(ring, sub):
        raise NotAProperCoset("T - t is not closed under addition")
    if len(sub) == len(span):
        raise NotAProperCoset("T's subgroup is the whole span")
    k = basis.k
    if not 1 <= ell <= k:
        raise InvalidIndex(f"subset size {ell} outside [1, {k}]")

    sums = subset_sums(ring, basis, ell)
    prob = Fraction(sum(v not in coset for _, v in sums), len(sums))
    bound = subsum_bound(k, ell)
    if prob < bound:
        raise LemmaViolation(f"Prob[r_u not in T] = {prob} < {bound} for ell={ell}")
    return ProbabilityCheck(prob, bound)


def subset_sums(ring: BlackBoxRing, basis: AdditiveBasis, ell: int) -> list[tuple[tuple[int, ...], Element]]:
    """All (u, r_u) for ell-subsets u, oracle-free."""
    add = ring.unmetered.add
    out = []
    for u in itertools.combinations(range(basis.k), ell):
        acc = basis[u[0]]
        for j in u[1:]:
            acc = add(acc, basis[j])
        out.append((u, acc))
    return out


def exhaustive_nonzero_fraction(f: BlackBox, ring: BlackBoxRing, basis: AdditiveBasis, ell: int,
                                cap: int = DEFAULT_ENUMERATION_CAP) -> ProbabilityCheck:
    """Exact fraction of m-tuples of ell-subsets on which f is nonzero,
    with the lower bound ((1-p)/2)^m that must hold unless f is an identity."""
    require_multilinear(f)
    k = basis.k
    if not 1 <= ell <= k:
        raise InvalidIndex(f"subset size {ell} outside [1, {k}]")
    total = math.comb(k, ell) ** f.m
    if total > cap:
        raise EnumerationTooLarge(f"{total} subset tuples exceed cap {cap}")
    sums = [v for _, v in subset_sums(ring, basis, ell)]
    hits = sum(not ring.is_zero(f.evaluate(ring, tup)) for tup in itertools.product(sums, repeat=f.m))
    fraction = Fraction(hits, total)
    bound = subsum_bound(k, ell) ** f.m
    if hits == 0:
        if deterministic_test(f, ring, basis).violated:
            raise LemmaViolation("f is not an identity but never fires on subset sums")
    elif fraction < bound:
        raise LemmaViolation(f"nonzero fraction {fraction} < bound {bound}")
    return ProbabilityCheck(fraction, bound)
