from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbmit.errors import InvalidElement, InvalidIndex, SchemaError, SpanTooLarge
from bbmit.ring import (
    AdditiveBasis,
    IntegersModN,
    MatrixRingGF2,
    ProductRing,
    QueryLedger,
    add,
    cosets,
    enumerate_additive_span,
    enumerate_subgroups,
    is_subgroup,
    ledger_snapshot,
    mul,
    neg,
    ring_from_spec,
    subset_sum,
)

RINGS = [
    IntegersModN(6),
    IntegersModN(12),
    IntegersModN(1000003),
    MatrixRingGF2(2),
    MatrixRingGF2(5),
    ProductRing([IntegersModN(6), MatrixRingGF2(3)]),
]


def E(ring, r, c):
    return ring.unit(r, c)


@pytest.mark.parametrize("ring", RINGS, ids=repr)
def test_axioms_on_1000_random_triples(ring):
    rng = np.random.default_rng(7)
    u = ring.unmetered
    for _ in range(1000):
        a, b, c = (ring.random_element(rng) for _ in range(3))
        assert u.add(u.add(a, b), c) == u.add(a, u.add(b, c))
        assert u.add(a, b) == u.add(b, a)
        assert u.mul(u.mul(a, b), c) == u.mul(a, u.mul(b, c))
        assert u.mul(a, u.add(b, c)) == u.add(u.mul(a, b), u.mul(a, c))
        assert u.mul(u.add(a, b), c) == u.add(u.mul(a, c), u.mul(b, c))
        assert u.add(a, u.neg(a)) == ring.zero
        assert u.add(a, ring.zero) == a


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**25 - 1), st.integers(0, 2**25 - 1), st.integers(0, 2**25 - 1))
def test_matrix_ring_distributes(x, y, z):
    R = MatrixRingGF2(5)
    a, b, c = R.encode(x), R.encode(y), R.encode(z)
    u = R.unmetered
    assert u.mul(a, u.add(b, c)) == u.add(u.mul(a, b), u.mul(a, c))
    assert np.array_equal(R.to_array(u.mul(a, b)), (R.to_array(a) @ R.to_array(b)) % 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 50), st.data())
def test_zn_matches_integer_arithmetic(n, data):
    R = IntegersModN(n)
    x, y = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    assert R.decode(R.unmetered.add(R.encode(x), R.encode(y))) == (x + y) % n
    assert R.decode(R.unmetered.mul(R.encode(x), R.encode(y))) == (x * y) % n
    assert R.decode(R.unmetered.neg(R.encode(x))) == (-x) % n


def test_zn_examples():
    Z6 = IntegersModN(6)
    four, five = Z6.encode(4), Z6.encode(5)
    assert Z6.decode(add(Z6, four, five)) == 3
    assert Z6.decode(mul(Z6, four, five)) == 2
    assert Z6.decode(neg(Z6, four)) == 2
    assert neg(Z6, Z6.zero) == Z6.zero
    assert Z6.ledger == QueryLedger(add_count=1, mul_count=1, neg_count=2)


def test_matrix_examples():
    M = MatrixRingGF2(2)
    a = M.from_rows([[1, 0], [0, 0]])
    b = M.from_rows([[1, 1], [0, 0]])
    assert M.add(a, b) == M.from_rows([[0, 1], [0, 0]])
    assert M.mul(E(M, 0, 0), E(M, 0, 1)) == E(M, 0, 1)
    assert M.mul(E(M, 0, 1), E(M, 0, 0)) == M.zero
    assert M.neg(b) == b
    assert M.add(a, M.zero) == a


def test_product_is_componentwise():
    Z6, M = IntegersModN(6), MatrixRingGF2(2)
    P = ProductRing([Z6, M])
    x = P.join([Z6.encode(4), E(M, 0, 0)])
    y = P.join([Z6.encode(5), E(M, 0, 1)])
    assert P.split(P.mul(x, y)) == [Z6.encode(2), E(M, 0, 1)]
    assert P.split(P.add(x, y)) == [Z6.encode(3), M.from_rows([[1, 1], [0, 0]])]


def test_encodings_are_canonical_and_fixed_width():
    Z = IntegersModN(1000)
    assert len(Z.encode(0)) == len(Z.encode(999)) == 2
    assert Z.encode(3) == (3).to_bytes(2, "little")
    M = MatrixRingGF2(3)
    assert M.from_rows([[0, 1, 0], [0, 0, 0], [0, 0, 0]]) == (2).to_bytes(2, "little")
    assert M.zero == bytes(2)


@pytest.mark.parametrize("ring, bad", [
    (IntegersModN(6), b"\x06"),
    (IntegersModN(6), b"\x00\x00"),
    (MatrixRingGF2(2), b"\x10"),
    (MatrixRingGF2(2), "0000"),
    (ProductRing([IntegersModN(6), IntegersModN(6)]), b"\x01"),
])
def test_malformed_encodings_raise(ring, bad):
    with pytest.raises(InvalidElement):
        ring.add(bad, ring.zero)
    assert ring.ledger.add_count == 0


def test_literals_round_trip():
    P = ProductRing([IntegersModN(6), MatrixRingGF2(2)])
    lit = [5, "1001"]
    assert P.to_literal(P.from_literal(lit)) == lit
    assert P.split(P.from_literal(lit))[1] == MatrixRingGF2(2).identity()
    with pytest.raises(InvalidElement):
        IntegersModN(6).from_literal(6)
    with pytest.raises(InvalidElement):
        MatrixRingGF2(2).from_literal("10")


def test_ring_from_spec():
    assert ring_from_spec({"type": "Zn", "n": 6}) == IntegersModN(6)
    assert ring_from_spec({"type": "MatF2", "t": 4}) == MatrixRingGF2(4)
    spec = {"type": "Product", "factors": [{"type": "Zn", "n": 2}, {"type": "MatF2", "t": 2}]}
    assert ring_from_spec(spec).spec() == spec
    with pytest.raises(SchemaError) as err:
        ring_from_spec({"type": "Product", "factors": [{"type": "Zn", "n": 0}]})
    assert err.value.field == "ring.factors[0].n"


def test_ledger_snapshots_and_diffs():
    Z = IntegersModN(7)
    assert ledger_snapshot(Z) == QueryLedger()
    one = Z.encode(1)
    for _ in range(3):
        Z.add(one, one)
    assert ledger_snapshot(Z).add_count == 3
    before = ledger_snapshot(Z)
    Z.sub(one, one)
    d = ledger_snapshot(Z) - before
    assert (d.add_count, d.neg_count, d.fused_sub_count, d.ring_accesses) == (1, 1, 1, 1)
    Z.eq(one, one), Z.is_zero(one)
    assert ledger_snapshot(Z) - before == d
    Z.unmetered.mul(one, one)
    assert ledger_snapshot(Z).mul_count == 0


def test_subset_sum_examples_and_costs():
    Z6 = IntegersModN(6)
    basis = AdditiveBasis.build(Z6, [Z6.encode(i) for i in range(4)])
    assert not basis.zero_prepended
    before = Z6.ledger
    assert subset_sum(Z6, basis, [0]) == Z6.zero
    assert (Z6.ledger - before).add_count == 0
    assert subset_sum(Z6, basis, [1, 2, 3]) == Z6.zero
    assert (Z6.ledger - before).add_count == 2

    Z = IntegersModN(101)
    b = AdditiveBasis.build(Z, [Z.encode(i) for i in range(1, 10)])
    before = Z.ledger
    subset_sum(Z, b, [1, 3, 5, 7, 9])
    assert (Z.ledger - before).add_count == 4
    with pytest.raises(InvalidIndex):
        subset_sum(Z, b, [10])
    with pytest.raises(InvalidIndex):
        subset_sum(Z, b, [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 11), min_size=1, max_size=12, unique=True))
def test_subset_sum_cost_is_size_minus_one(u):
    Z = IntegersModN(13)
    basis = AdditiveBasis.build(Z, [Z.encode(i) for i in range(12)])
    before = Z.ledger
    s = subset_sum(Z, basis, u)
    assert (Z.ledger - before) == QueryLedger(add_count=len(u) - 1)
    assert Z.decode(s) == sum(u) % 13


def test_basis_prepends_zero_and_dedupes():
    Z = IntegersModN(6)
    b = AdditiveBasis.build(Z, [Z.encode(1), Z.encode(2), Z.encode(1)])
    assert b.generators == (Z.zero, Z.encode(1), Z.encode(2))
    assert b.zero_prepended and b.duplicates_dropped == 1
    b = AdditiveBasis.build(Z, [Z.encode(3), Z.zero])
    assert b.generators == (Z.zero, Z.encode(3)) and not b.zero_prepended


def test_span_examples():
    Z6 = IntegersModN(6)
    assert enumerate_additive_span(Z6, [Z6.encode(2)]) == {Z6.encode(v) for v in (0, 2, 4)}
    M = MatrixRingGF2(2)
    e11, e12 = E(M, 0, 0), E(M, 0, 1)
    assert enumerate_additive_span(M, [e11, e12]) == {M.zero, e11, e12, M.add(e11, e12)}
    assert enumerate_additive_span(Z6, []) == {Z6.zero}
    assert Z6.ledger.add_count == 0
    with pytest.raises(SpanTooLarge):
        enumerate_additive_span(MatrixRingGF2(3), [MatrixRingGF2(3).unit(r, c) for r in range(3) for c in range(3)],
                                cap=100)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 15), max_size=4))
def test_span_is_closed_subgroup(gens):
    M = MatrixRingGF2(2)
    span = enumerate_additive_span(M, [M.encode(g) for g in gens])
    assert M.zero in span
    assert all(M.unmetered.add(a, b) in span for a in span for b in span)
    assert all(M.unmetered.neg(a) in span for a in span)


def test_subgroups_and_cosets_of_z12():
    Z = IntegersModN(12)
    group = frozenset(Z.elements())
    subs = enumerate_subgroups(Z, group)
    assert sorted(len(s) for s in subs) == [1, 2, 3, 4, 6, 12]  # divisors of 12
    assert all(is_subgroup(Z, s) for s in subs)
    four = next(s for s in subs if len(s) == 4)
    cs = cosets(Z, group, four)
    assert len(cs) == 3 and frozenset().union(*cs) == group


def test_m2f2_has_67_subgroups():
    # (Z/2)^4 has 1 + 15 + 35 + 15 + 1 subgroups by dimension
    M = MatrixRingGF2(2)
    subs = enumerate_subgroups(M, frozenset(M.elements()))
    assert len(subs) == 67
