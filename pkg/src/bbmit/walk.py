"""Lazy random walk on ell-subsets of [k] (the Johnson graph J(k, ell)).

A walk state carries, per coordinate, a sorted subset u and its cached subsum
r_u.  Moving swaps one element out and one in, so the cached sum is updated
with one subtraction and one addition: two oracle accesses per moved
coordinate, never a full recomputation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import InvalidIndex, MatrixTooLarge
from .polynomial import BlackBox
from .ring import AdditiveBasis, BlackBoxRing, Element, QueryLedger, subset_sum

DEFAULT_MATRIX_CAP = 4096


@dataclass(frozen=True)
class SubsetState:
    u: tuple[int, ...]
    cached_sum: Element


@dataclass(frozen=True)
class WalkState:
    coords: tuple[SubsetState, ...]
    k: int
    ell: int

    @property
    def m(self) -> int:
        return len(self.coords)

    @property
    def values(self) -> tuple[Element, ...]:
        return tuple(c.cached_sum for c in self.coords)

    @property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.u for c in self.coords)


def init_uniform(ring: BlackBoxRing, basis: AdditiveBasis, ell: int, m: int,
                 rng: np.random.Generator) -> WalkState:
    """m independent uniform ell-subsets with their sums; m(ell - 1) adds."""
    k = basis.k
    if not 1 <= ell <= k:
        raise InvalidIndex(f"subset size {ell} outside [1, {k}]")
    coords = []
    for _ in range(m):
        u = tuple(sorted(int(i) for i in rng.choice(k, size=ell, replace=False)))
        coords.append(SubsetState(u, subset_sum(ring, basis, u)))
    return WalkState(tuple(coords), k, ell)


def step(state: WalkState, ring: BlackBoxRing, basis: AdditiveBasis, rng: np.random.Generator,
         debug: bool = False) -> WalkState:
    """One step of the lazy walk, applied to every coordinate independently."""
    k, ell = state.k, state.ell
    out = []
    for c in state.coords:
        # with ell == k there is no neighbour, so the walk can only hold
        if rng.random() < 0.5 or ell == k:
            out.append(c)
            continue
        pos = int(rng.integers(ell))
        outside = [j for j in range(k) if j not in c.u]
        j = outside[int(rng.integers(len(outside)))]
        removed = c.u[pos]
        new_sum = ring.add(ring.sub(c.cached_sum, basis[removed]), basis[j])
        new_u = tuple(sorted(c.u[:pos] + c.u[pos + 1:] + (j,)))
        out.append(SubsetState(new_u, new_sum))
    new = WalkState(tuple(out), k, ell)
    if debug and not check_state(ring, basis, new):
        raise AssertionError("cached subsum drifted from recomputed value")
    return new


def check_state(ring: BlackBoxRing, basis: AdditiveBasis, state: WalkState) -> bool:
    """Recompute every r_u without touching the ledger and compare."""
    add = ring.unmetered.add
    for c in state.coords:
        if len(c.u) != state.ell or list(c.u) != sorted(set(c.u)):
            return False
        acc = ring.zero
        for i in c.u:
            acc = add(acc, basis[i])
        if acc != c.cached_sum:
            return False
    return True


def is_marked(state: WalkState, f: BlackBox, ring: BlackBoxRing) -> bool:
    """f(r_u1, ..., r_um) != 0, at the cost of a single f-eval."""
    return not ring.is_zero(f.evaluate(ring, state.values))


@dataclass(frozen=True)
class SearchResult:
    hit: bool
    steps: int
    state: WalkState
    ledger: QueryLedger


def classical_search(f: BlackBox, ring: BlackBoxRing, basis: AdditiveBasis, ell: int,
                     max_steps: int, rng: np.random.Generator) -> SearchResult:
    """Walk from a uniform start until a marked state or ``max_steps`` moves.

    ``steps`` counts walk steps taken before the hit (0 if the start is marked).
    """
    before = ring.ledger
    state = init_uniform(ring, basis, ell, f.m, rng)
    if is_marked(state, f, ring):
        return SearchResult(True, 0, state, ring.ledger - before)
    for s in range(1, max_steps + 1):
        state = step(state, ring, basis, rng)
        if is_marked(state, f, ring):
            return SearchResult(True, s, state, ring.ledger - before)
    return SearchResult(False, max_steps, state, ring.ledger - before)


# ---------------------------------------------------------------------------
# spectral analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkMatrices:
    vertices: tuple[tuple[int, ...], ...]
    P: np.ndarray
    A: np.ndarray
    delta: float
    delta_hat: float


class GapResult(NamedTuple):
    delta_exact: Fraction
    delta_numeric: float
    delta_hat_exact: Fraction
    delta_hat_numeric: float


def johnson_vertices(k: int, ell: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(k), ell))


def johnson_eigenvalues(k: int, ell: int) -> list[tuple[Fraction, int]]:
    """Eigenvalues of the normalized adjacency of J(k, ell) with multiplicities.

    lambda_j = ((ell-j)(k-ell-j) - j) / (ell(k-ell)), multiplicity C(k,j) - C(k,j-1),
    for j = 0..min(ell, k-ell).
    """
    deg = ell * (k - ell)
    out = []
    for j in range(min(ell, k - ell) + 1):
        lam = Fraction((ell - j) * (k - ell - j) - j, deg)
        mult = math.comb(k, j) - (math.comb(k, j - 1) if j else 0)
        out.append((lam, mult))
    return out


def walk_matrices(k: int, ell: int, cap: int = DEFAULT_MATRIX_CAP) -> WalkMatrices:
    if not 1 <= ell < k:
        raise InvalidIndex(f"need 1 <= ell < k, got k={k}, ell={ell}")
    n = math.comb(k, ell)
    if n > cap:
        raise MatrixTooLarge(f"C({k},{ell}) = {n} exceeds dense cap {cap}")
    verts = johnson_vertices(k, ell)
    masks = np.array([sum(1 << i for i in v) for v in verts], dtype=np.int64)
    inter = np.bitwise_count(masks[:, None] & masks[None, :])
    P = (inter == ell - 1).astype(float) / (ell * (k - ell))
    A = (np.eye(n) + P) / 2
    ev = np.sort(np.linalg.eigvalsh(P))[::-1]
    delta = float(1.0 - ev[1])
    return WalkMatrices(tuple(verts), P, A, delta, delta / 2)


def spectral_gap(k: int, ell: int, cap: int = DEFAULT_MATRIX_CAP) -> GapResult:
    """Closed-form gap k/(ell(k-ell)) next to the dense eigendecomposition value."""
    exact = Fraction(k, ell * (k - ell))
    numeric = walk_matrices(k, ell, cap).delta
    return GapResult(exact, numeric, exact / 2, numeric / 2)


GAP_TABLE_COLUMNS = ("k", "ell", "delta_exact", "delta_numeric", "delta_hat", "bound_1_over_2ell")


def gap_table(k_max: int = 12, k_min: int = 2, cap: int = DEFAULT_MATRIX_CAP) -> list[dict]:
    """Rows for every k in [k_min, k_max] and 1 <= ell <= k/2."""
    rows = []
    for k in range(k_min, k_max + 1):
        for ell in range(1, k // 2 + 1):
            g = spectral_gap(k, ell, cap)
            rows.append({
                "k": k,
                "ell": ell,
                "delta_exact": g.delta_exact,
                "delta_numeric": g.delta_numeric,
                "delta_hat": g.delta_hat_exact,
                "bound_1_over_2ell": Fraction(1, 2 * ell),
            })
    return rows
