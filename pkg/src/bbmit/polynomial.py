"""Multilinear polynomials over a black-box ring.

A polynomial is a signed sum of terms; each term is an ordered product of
atoms, where an atom is either a ring constant or a variable.  This covers
both coefficient-free noncommuting monomials such as ``x1*x2 - x2*x1`` and
two-sided coefficients such as ``A * x1 * ... * xm * B``.  Integer
coefficients other than +-1 are written by repeating the term.

Evaluation goes through the f-oracle: one call charges exactly one
``f_eval_count`` and none of the ring operations performed inside.
Variable indices are 0-based here (JSON uses 1-based, see ``bbmit.io``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, Union

from .errors import ArityError, NotMultilinear
from .ring import BlackBoxRing, Element


@dataclass(frozen=True)
class Const:
    value: Element


@dataclass(frozen=True)
class Var:
    index: int


Atom = Union[Const, Var]


@dataclass(frozen=True)
class Term:
    atoms: tuple[Atom, ...]
    sign: int = 1

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a term needs at least one atom; use Const(zero) for the empty term")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def variables(self) -> list[int]:
        return [a.index for a in self.atoms if isinstance(a, Var)]

    def is_multilinear(self) -> bool:
        vs = self.variables
        return len(vs) == len(set(vs))


class BlackBox(Protocol):
    """Anything the testers can query: an arity and a unit-cost evaluator."""

    m: int

    def evaluate(self, ring: BlackBoxRing, values: Sequence[Element]) -> Element: ...


@dataclass(frozen=True)
class MultilinearPolynomial:
    m: int
    terms: tuple[Term, ...]
    mode: str = "noncommuting"

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("variable count must be non-negative")
        if self.mode not in ("commuting", "noncommuting"):
            raise ValueError(f"unknown variable mode {self.mode!r}")
        for t in self.terms:
            for v in t.variables:
                if not 0 <= v < self.m:
                    raise ArityError(f"variable index {v} out of range for m={self.m}")

    @property
    def is_multilinear(self) -> bool:
        return check_multilinear(self)

    def evaluate(self, ring: BlackBoxRing, values: Sequence[Element]) -> Element:
        return evaluate(self, ring, values)

    def __call__(self, ring, *values):
        return evaluate(self, ring, values)


@dataclass(frozen=True)
class BlackBoxFunction:
    """An opaque f : R^m -> R wrapped so that calls are charged as f-evals.

    ``fn`` receives the ring's unmetered view and the argument tuple.
    """

    m: int
    fn: Callable
    name: str = "f"

    def evaluate(self, ring: BlackBoxRing, values: Sequence[Element]) -> Element:
        _check_assignment(self.m, ring, values)
        ring.charge("f_eval_count")
        out = self.fn(ring.unmetered, tuple(values))
        ring.validate(out)
        return out


def _check_assignment(m: int, ring: BlackBoxRing, values: Sequence[Element]) -> None:
    if len(values) != m:
        raise ArityError(f"expected {m} values, got {len(values)}")
    for v in values:
        ring.validate(v)


def evaluate(f: MultilinearPolynomial, ring: BlackBoxRing, values: Sequence[Element]) -> Element:
    """Unit-cost evaluation f(a_1, ..., a_m)."""
    _check_assignment(f.m, ring, values)
    ring.charge("f_eval_count")
    ops = ring.unmetered
    total = ring.zero
    for term in f.terms:
        acc = None
        for atom in term.atoms:
            if isinstance(atom, Var):
                x = values[atom.index]
            else:
                ring.validate(atom.value)
                x = atom.value
            acc = x if acc is None else ops.mul(acc, x)
        total = ops.add(total, acc) if term.sign > 0 else ops.sub(total, acc)
    return total


def check_multilinear(f: MultilinearPolynomial) -> bool:
    return all(t.is_multilinear() for t in f.terms)


def require_multilinear(f) -> None:
    if isinstance(f, MultilinearPolynomial) and not check_multilinear(f):
        raise NotMultilinear("polynomial repeats a variable inside a term")


def commutator_polynomial() -> MultilinearPolynomial:
    """x1*x2 - x2*x1 in noncommuting variables."""
    return MultilinearPolynomial(
        m=2,
        terms=(Term((Var(0), Var(1)), 1), Term((Var(1), Var(0)), -1)),
        mode="noncommuting",
    )


def linear_polynomial(coeff: Element, constant: Element | None = None,
                      constant_sign: int = 1) -> MultilinearPolynomial:
    """c*x (+/- d), a convenient univariate family."""
    terms = [Term((Const(coeff), Var(0)))]
    if constant is not None:
        terms.append(Term((Const(constant),), constant_sign))
    return MultilinearPolynomial(1, tuple(terms), "commuting")


def coordinate_additivity_check(f: BlackBox, ring: BlackBoxRing, i: int, a: Element, b: Element,
                                rest: Sequence[Element]) -> bool:
    """Whether f(a+b, y) == f(a, y) + f(b, y) - f(0, y) in coordinate i.

    Splitting f = A + B where every monomial of A contains x_i, A is additive in
    x_i and A(0, y) = 0; this is the identity that decomposition implies.
    Costs four f-evals plus three ring oracle calls.
    """
    if not 0 <= i < f.m:
        raise ArityError(f"coordinate {i} out of range for m={f.m}")
    if len(rest) != f.m - 1:
        raise ArityError(f"expected {f.m - 1} remaining values, got {len(rest)}")

    def at(x):
        vals = list(rest)
        vals.insert(i, x)
        return f.evaluate(ring, vals)

    lhs = at(ring.add(a, b))
    rhs = ring.sub(ring.add(at(a), at(b)), at(ring.zero))
    return lhs == rhs
