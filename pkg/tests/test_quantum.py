from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbmit.errors import AlphaInfeasible, MarkedFractionZero, MarkedSetEmpty, MatrixTooLarge
from bbmit.quantum import (
    COST_CURVE_COLUMNS,
    CostInputs,
    alpha_admissible,
    bound_chain,
    cost_curve,
    feasibility,
    mnrs_cost,
    optimize_parameters,
    stationary_distribution,
    szegedy_detect,
    szegedy_walk,
    theorem38_bound,
    walk_cost_inputs,
)
from bbmit.testers import subsum_bound
from bbmit.walk import walk_matrices


def test_mnrs_cost_examples():
    assert mnrs_cost(CostInputs(2, 3, 1, 0.25, 0.04)) == pytest.approx(42)
    assert mnrs_cost(CostInputs(5, 3, 1, 0.25, 1.0)) == pytest.approx(5 + 4 / 0.5)
    with pytest.raises(MarkedSetEmpty):
        mnrs_cost(CostInputs(1, 1, 1, 0.5, 0.0))
    with pytest.raises(ValueError):
        CostInputs(1, 1, 1, 0.0, 0.5)
    with pytest.raises(ValueError):
        CostInputs(-1, 1, 1, 0.5, 0.5)


def test_walk_cost_inputs_instantiate_the_search():
    c = walk_cost_inputs(1000, 2, 100)
    assert (c.S, c.U, c.C) == (2 * 99, 4, 1)
    assert c.delta == pytest.approx(1000 / (2 * 100 * 900))
    assert c.epsilon == pytest.approx(float(subsum_bound(1000, 100)) ** 2)


def test_unrelaxed_form_with_constant_three():
    # S + 3 (U + C) / sqrt(delta_hat eps) with delta_hat >= 1/(2 ell) becomes m[(ell-1) + 3 sqrt(2 ell) / esc^(m/2)]
    for k, m, ell in [(100, 2, 20), (1000, 3, 150), (50, 1, 7)]:
        c = walk_cost_inputs(k, m, ell)
        relaxed_gap = CostInputs(c.S, c.U, c.C, 1 / (2 * ell), c.epsilon)
        lhs = relaxed_gap.S + 3 * m * 1 / math.sqrt(relaxed_gap.delta * relaxed_gap.epsilon)
        assert lhs == pytest.approx(theorem38_bound(k, m, ell, 10.0, check=False).unrelaxed)


def test_theorem38_examples():
    alpha = 3 / math.log(1000)
    pair = theorem38_bound(1000, 2, 100, alpha)
    assert math.isfinite(pair.relaxed) and math.isfinite(pair.unrelaxed)
    assert pair.relaxed >= pair.unrelaxed
    k, a = 400, 0.5
    assert theorem38_bound(k, 1, 1, a).relaxed == pytest.approx(3 * math.sqrt(2) * math.sqrt(k) * math.sqrt(1 + a))
    with pytest.raises(AlphaInfeasible):
        theorem38_bound(100, 2, 90, 0.5)


def test_theorem38_terms_are_monotone_in_ell():
    k, m, alpha = 10_000, 2, 1.0
    prev_first, prev_second = -1.0, math.inf
    for ell in range(1, 4000, 37):
        q = theorem38_bound(k, m, ell, alpha, check=False).relaxed
        first = m * (ell - 1)
        second = q - first
        assert first > prev_first and second < prev_second
        prev_first, prev_second = first, second


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 5000), st.integers(1, 4), st.data())
def test_bound_chain_holds(k, m, data):
    ell = data.draw(st.integers(1, k - 1))
    alpha = data.draw(st.floats(0.01, 20))
    chain = bound_chain(k, m, ell, alpha)
    assert chain.holds()
    assert chain.szegedy <= chain.combined <= chain.gap_relaxed * (1 + 1e-12)
    assert (chain.alpha_relaxed is None) == (not alpha_admissible(k, ell, alpha))


def test_optimize_k1000_m2():
    opt = optimize_parameters(1000, 2)
    assert opt.ell_star == 100
    assert opt.alpha_star == pytest.approx(3 / math.log(1000))
    assert round(opt.alpha_star, 4) == 0.4343
    assert opt.feasible == feasibility(1000, 2, opt.alpha_star)
    assert opt.q_star == theorem38_bound(1000, 2, 100, opt.alpha_star, check=False).relaxed
    # 1000^(2/3) evaluates to 99.99999999999997 in floating point
    assert set(opt.neighbors) == {99, 100}


@pytest.mark.parametrize("k, m", [(1000, 2), (1000, 3), (10_000, 2), (10_000, 3)])
def test_argmin_within_window(k, m):
    opt = optimize_parameters(k, m)
    assert opt.ell_star / 2 <= opt.argmin_ell <= 2 * opt.ell_star


def test_ell_star_exponent_tends_to_m_over_m_plus_1():
    for m in (1, 2, 3):
        errs = [abs(math.log(optimize_parameters(k, m).ell_star) / math.log(k) - m / (m + 1))
                for k in (10**2, 10**4, 10**6)]
        assert errs[-1] < 1e-3 and errs[-1] <= errs[0] + 1e-12


def test_feasibility_is_exact():
    # (1 + 1/alpha)^(m+1) == 8 exactly at alpha = 1, m = 2
    assert feasibility(8, 2, 1)
    assert not feasibility(7, 2, 1)
    assert feasibility(8, 2, Fraction(1))
    # the float 1/3 sits just below 1/3, so (1 + 1/alpha)^2 is just above 16;
    # naive float arithmetic rounds it to exactly 16.0 and would call k = 16 feasible
    assert (1 + 1 / (1 / 3)) ** 2 == 16.0
    assert not feasibility(16, 1, 1 / 3)
    assert feasibility(16, 1, Fraction(1, 3))
    assert feasibility(17, 1, 1 / 3)
    assert not feasibility(10**9, 2, 0)


def test_cost_curve_rows():
    rows = cost_curve(100, 2, alpha=0.1)
    assert [r["ell"] for r in rows] == list(range(1, 100))
    assert set(rows[0]) == set(COST_CURVE_COLUMNS)
    for r in rows:
        assert (r["Q_relaxed"] is None) == (not alpha_admissible(100, r["ell"], 0.1))


# -- Szegedy ------------------------------------------------------------------

def test_walk_is_unitary_and_fixes_start_without_marks():
    for k, ell in [(6, 2), (8, 2), (5, 2)]:
        A = walk_matrices(k, ell).A
        sim = szegedy_walk(A)
        assert sim.unitarity_error() < 1e-10
        assert np.allclose(sim.W @ sim.init, sim.init, atol=1e-12)
        res = szegedy_detect(A, [])
        assert all(abs(f - 1) < 1e-9 for f in res.fidelities) and not res.detected


def test_stationary_distribution_is_uniform_for_johnson():
    pi = stationary_distribution(walk_matrices(6, 3).A)
    assert np.allclose(pi, 1 / 20)


def test_single_marked_vertex_j62():
    A = walk_matrices(6, 2).A
    res = szegedy_detect(A, [0])
    assert res.horizon == math.ceil(4 / math.sqrt(0.375 / 15))
    assert res.delta_hat == pytest.approx(0.375)
    assert res.min_fidelity <= 0.9 and res.detected
    assert res.unitarity_error < 1e-10


def test_more_marks_drop_fidelity_faster():
    A = walk_matrices(8, 2).A
    first = []
    steps = []
    for n_marked in (1, 2, 4, 8):
        res = szegedy_detect(A, range(n_marked))
        first.append(res.fidelities[0])
        steps.append(res.steps_used)
    assert all(a > b for a, b in zip(first, first[1:]))
    assert all(a >= b for a, b in zip(steps, steps[1:]))


def test_szegedy_errors():
    A = walk_matrices(6, 2).A
    with pytest.raises(MarkedFractionZero):
        szegedy_detect(A, [0], epsilon=0)
    with pytest.raises(MatrixTooLarge):
        szegedy_walk(walk_matrices(8, 3).A, cap=1000)
    with pytest.raises(ValueError):
        szegedy_walk(np.ones((3, 3)))
