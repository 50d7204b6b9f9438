from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbmit.errors import ArityError, InvalidElement, NotMultilinear
from bbmit.polynomial import (
    BlackBoxFunction,
    Const,
    MultilinearPolynomial,
    Term,
    Var,
    check_multilinear,
    commutator_polynomial,
    coordinate_additivity_check,
    evaluate,
    linear_polynomial,
    require_multilinear,
)
from bbmit.reduction import SplitCollisionInstance, build_instance
from bbmit.ring import IntegersModN, MatrixRingGF2, QueryLedger


def test_commutator_shape():
    f = commutator_polynomial()
    assert f.m == 2 and f.mode == "noncommuting"
    assert [t.sign for t in f.terms] == [1, -1]
    assert [t.variables for t in f.terms] == [[0, 1], [1, 0]]


def test_commutator_over_z6():
    Z6 = IntegersModN(6)
    f = commutator_polynomial()
    assert evaluate(f, Z6, [Z6.encode(4), Z6.encode(5)]) == Z6.zero
    for a in Z6.elements():
        for b in Z6.elements():
            assert f(Z6, a, b) == Z6.zero


def test_commutator_over_m2f2():
    M = MatrixRingGF2(2)
    f = commutator_polynomial()
    assert evaluate(f, M, [M.unit(0, 0), M.unit(0, 1)]) == M.unit(0, 1)
    assert M.ledger == QueryLedger(f_eval_count=1)


def test_evaluation_charges_one_f_eval_only():
    M = MatrixRingGF2(3)
    rng = np.random.default_rng(0)
    A, B = M.random_element(rng), M.random_element(rng)
    f = MultilinearPolynomial(3, (Term((Const(A), Var(0), Var(1), Var(2), Const(B))),
                                  Term((Var(2), Var(0)), -1)))
    for n in range(1, 6):
        f.evaluate(M, [M.random_element(rng) for _ in range(3)])
        assert M.ledger == QueryLedger(f_eval_count=n)


def test_evaluation_is_deterministic_and_folds_left_to_right():
    M = MatrixRingGF2(2)
    u = M.unmetered
    rng = np.random.default_rng(1)
    A, x, y, B = (M.random_element(rng) for _ in range(4))
    f = MultilinearPolynomial(2, (Term((Const(A), Var(0), Var(1), Const(B))),))
    expected = u.mul(u.mul(u.mul(A, x), y), B)
    assert evaluate(f, M, [x, y]) == evaluate(f, M, [x, y]) == expected


def test_split_collision_witness_fires():
    red = build_instance(SplitCollisionInstance(4, 2, (1, 0, 1, 3)))
    values = [red.generators[0], red.generators[2]]
    assert not red.ring.is_zero(evaluate(red.polynomial, red.ring, values))


def test_arity_and_element_errors():
    Z = IntegersModN(6)
    f = commutator_polynomial()
    with pytest.raises(ArityError):
        evaluate(f, Z, [Z.zero])
    with pytest.raises(InvalidElement):
        evaluate(f, Z, [Z.zero, b"\x09"])
    assert Z.ledger.f_eval_count == 0
    with pytest.raises(ArityError):
        MultilinearPolynomial(1, (Term((Var(1),)),))


def test_term_invariants():
    with pytest.raises(ValueError):
        Term(())
    with pytest.raises(ValueError):
        Term((Var(0),), sign=2)


def test_check_multilinear():
    assert check_multilinear(commutator_polynomial())
    square = MultilinearPolynomial(1, (Term((Var(0), Var(0))),))
    assert not check_multilinear(square)
    Z = IntegersModN(6)
    assert check_multilinear(MultilinearPolynomial(0, (Term((Const(Z.encode(3)),)),)))
    with pytest.raises(NotMultilinear):
        require_multilinear(square)


def test_additivity_commutator_m2f2_100_samples():
    M = MatrixRingGF2(2)
    f = commutator_polynomial()
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, y = (M.random_element(rng) for _ in range(3))
        for i in (0, 1):
            assert coordinate_additivity_check(f, M, i, a, b, [y])


def test_additivity_for_constant_coordinate():
    Z = IntegersModN(4)
    f = MultilinearPolynomial(2, (Term((Var(1),)),))
    for a in Z.elements():
        assert coordinate_additivity_check(f, Z, 0, a, Z.encode(3), [Z.encode(2)])


def test_additivity_fails_for_square_over_z4():
    Z = IntegersModN(4)
    square = MultilinearPolynomial(1, (Term((Var(0), Var(0))),))
    one = Z.encode(1)
    assert not coordinate_additivity_check(square, Z, 0, one, one, [])


def test_additivity_arity_errors():
    Z = IntegersModN(4)
    f = commutator_polynomial()
    with pytest.raises(ArityError):
        coordinate_additivity_check(f, Z, 2, Z.zero, Z.zero, [Z.zero])
    with pytest.raises(ArityError):
        coordinate_additivity_check(f, Z, 0, Z.zero, Z.zero, [])


def _random_multilinear(draw, m, n_consts):
    terms = []
    for _ in range(draw(st.integers(1, 4))):
        vars_ = draw(st.permutations(range(m)))[: draw(st.integers(0, m))]
        atoms = [Var(v) for v in vars_]
        for _ in range(draw(st.integers(0, 2))):
            pos = draw(st.integers(0, len(atoms)))
            atoms.insert(pos, Const(draw(st.integers(0, n_consts - 1))))
        if not atoms:
            atoms = [Const(0)]
        terms.append((tuple(atoms), draw(st.sampled_from([1, -1]))))
    return terms


@st.composite
def m2f2_polynomials(draw):
    M = MatrixRingGF2(2)
    m = draw(st.integers(1, 3))
    raw = _random_multilinear(draw, m, 16)
    terms = tuple(Term(tuple(Const(M.encode(a.value)) if isinstance(a, Const) else a for a in atoms), s)
                  for atoms, s in raw)
    return MultilinearPolynomial(m, terms)


@settings(max_examples=80, deadline=None)
@given(m2f2_polynomials(), st.data())
def test_additivity_holds_for_every_multilinear_polynomial(f, data):
    M = MatrixRingGF2(2)
    vals = [M.encode(data.draw(st.integers(0, 15))) for _ in range(f.m + 1)]
    i = data.draw(st.integers(0, f.m - 1))
    assert coordinate_additivity_check(f, M, i, vals[0], vals[1], vals[2:])


@settings(max_examples=50, deadline=None)
@given(m2f2_polynomials(), st.integers(1, 10))
def test_f_eval_count_equals_number_of_calls(f, calls):
    M = MatrixRingGF2(2)
    rng = np.random.default_rng(calls)
    for _ in range(calls):
        f.evaluate(M, [M.random_element(rng) for _ in range(f.m)])
    assert M.ledger == QueryLedger(f_eval_count=calls)


def test_black_box_function_costs_one_eval():
    Z = IntegersModN(7)
    f = BlackBoxFunction(2, lambda ops, v: ops.mul(ops.add(v[0], v[1]), v[1]))
    assert Z.decode(f.evaluate(Z, [Z.encode(2), Z.encode(3)])) == 1
    assert Z.ledger == QueryLedger(f_eval_count=1)


def test_linear_polynomial():
    Z6 = IntegersModN(6)
    f = linear_polynomial(Z6.encode(3), Z6.encode(3), -1)
    assert [Z6.decode(f(Z6, Z6.encode(x))) for x in range(6)] == [3, 0, 3, 0, 3, 0]
