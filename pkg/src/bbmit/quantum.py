"""Quantum-walk cost model and a dense Szegedy-walk simulator.

The cost side evaluates the walk-search formula S + (U + C)/sqrt(delta*eps)
and the chain of upper bounds used to pick the subset size ell and the slack
alpha.  The simulation side builds the bipartite two-reflection walk for a
small reversible Markov chain and tracks how fast the stationary start state
loses fidelity once marked vertices are made absorbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .errors import AlphaInfeasible, MarkedFractionZero, MarkedSetEmpty, MatrixTooLarge
from .testers import subsum_bound

DEFAULT_DIM_CAP = 4096
DETECTION_CONSTANT = 4.0  # c in T = ceil(c / sqrt(delta_hat * eps))
FIDELITY_DROP = 0.1  # gamma: detection means min F(s) <= 1 - gamma


@dataclass(frozen=True)
class CostInputs:
    S: float
    U: float
    C: float
    delta: float
    epsilon: float

    def __post_init__(self):
        if min(self.S, self.U, self.C) < 0:
            raise ValueError("query costs must be non-negative")
        if not 0 < self.delta <= 1:
            raise ValueError(f"spectral gap must lie in (0, 1], got {self.delta}")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"marked fraction must lie in [0, 1], got {self.epsilon}")


def mnrs_cost(inputs: CostInputs, constant: float = 1.0) -> float:
    """S + constant * (U + C) / sqrt(delta * eps)."""
    if inputs.epsilon == 0:
        raise MarkedSetEmpty("no marked fraction: detection cost undefined")
    return inputs.S + constant * (inputs.U + inputs.C) / math.sqrt(inputs.delta * inputs.epsilon)


def walk_cost_inputs(k: int, m: int, ell: int) -> CostInputs:
    """Setup m(ell-1), update 2m, check 1, lazy gap k/(2 ell(k-ell)), eps = ((1-p)/2)^m."""
    delta_hat = k / (2 * ell * (k - ell))
    eps = float(subsum_bound(k, ell)) ** m
    return CostInputs(m * (ell - 1), 2 * m, 1, min(delta_hat, 1.0), eps)


def alpha_admissible(k: int, ell: int, alpha) -> bool:
    """(k-1)/(k-ell) <= 1 + alpha, compared exactly."""
    return Fraction(k - 1, k - ell) <= 1 + Fraction(alpha)


def feasibility(k: int, m: int, alpha) -> bool:
    """k >= (1 + 1/alpha)^(m+1), compared exactly on the rational value of alpha."""
    a = Fraction(alpha)
    if a <= 0:
        return False
    return Fraction(k) >= (1 + 1 / a) ** (m + 1)


@dataclass(frozen=True)
class BoundChain:
    """Successive upper bounds on the walk-search query count.

    ``szegedy`` <= ``combined`` <= ``gap_relaxed`` == ``substituted`` <= ``alpha_relaxed``;
    ``alpha_relaxed`` is None when (k-1)/(k-ell) > 1 + alpha.
    """

    k: int
    m: int
    ell: int
    alpha: float
    szegedy: float
    combined: float
    gap_relaxed: float
    substituted: float
    alpha_relaxed: float | None

    def holds(self, rtol: float = 1e-12) -> bool:
        ok = (self.szegedy <= self.combined * (1 + rtol)
              and self.combined <= self.gap_relaxed * (1 + rtol)
              and math.isclose(self.gap_relaxed, self.substituted, rel_tol=1e-9))
        if self.alpha_relaxed is not None:
            ok = ok and self.substituted <= self.alpha_relaxed * (1 + rtol)
        return ok


def bound_chain(k: int, m: int, ell: int, alpha: float) -> BoundChain:
    if not 1 <= ell < k:
        raise ValueError(f"need 1 <= ell < k, got k={k}, ell={ell}")
    esc = float(subsum_bound(k, ell))
    inputs = walk_cost_inputs(k, m, ell)
    szegedy = mnrs_cost(inputs)
    combined = m * ((ell - 1) + 3 / math.sqrt(inputs.delta * inputs.epsilon))
    gap_relaxed = m * ((ell - 1) + 3 * math.sqrt(2 * ell) / esc ** (m / 2))
    substituted = m * ((ell - 1) + 3 * math.sqrt(2) * k ** (m / 2)
                       / (ell ** ((m - 1) / 2) * ((k - ell) / (k - 1)) ** (m / 2)))
    alpha_relaxed = None
    if alpha_admissible(k, ell, alpha):
        alpha_relaxed = m * ((ell - 1) + 3 * math.sqrt(2) * (1 + alpha) ** (m / 2) * k ** (m / 2)
                             / ell ** ((m - 1) / 2))
    return BoundChain(k, m, ell, alpha, szegedy, combined, gap_relaxed, substituted, alpha_relaxed)


class BoundPair(NamedTuple):
    relaxed: float
    unrelaxed: float


def theorem38_bound(k: int, m: int, ell: int, alpha: float, check: bool = True) -> BoundPair:
    """m[(ell-1) + 3 sqrt(2) (1+alpha)^(m/2) k^(m/2) / ell^((m-1)/2)] and its
    un-relaxed form m[(ell-1) + 3 sqrt(2 ell) ((1-p)/2)^(-m/2)].

    With ``check`` the alpha admissibility condition is enforced; without it the
    relaxed formula is evaluated regardless.
    """
    if check and not alpha_admissible(k, ell, alpha):
        raise AlphaInfeasible(f"(k-1)/(k-ell) = {(k - 1) / (k - ell):.6g} > 1 + alpha = {1 + alpha:.6g}")
    relaxed = m * ((ell - 1) + 3 * math.sqrt(2) * (1 + alpha) ** (m / 2) * k ** (m / 2)
                   / ell ** ((m - 1) / 2))
    unrelaxed = m * ((ell - 1) + 3 * math.sqrt(2 * ell) / float(subsum_bound(k, ell)) ** (m / 2))
    return BoundPair(relaxed, unrelaxed)


def unrelaxed_curve(k: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Un-relaxed bound for every integer ell in [1, k-1]."""
    ell = np.arange(1, k, dtype=float)
    esc = ell * (k - ell) / (k * (k - 1))
    return ell.astype(int), m * ((ell - 1) + 3 * np.sqrt(2 * ell) / esc ** (m / 2))


@dataclass(frozen=True)
class Optimization:
    k: int
    m: int
    ell_star: int
    alpha_star: float
    q_star: float
    feasible: bool
    alpha_admissible: bool
    neighbors: dict
    argmin_ell: int
    argmin_q: float

    @property
    def argmin_in_window(self) -> bool:
        return self.ell_star / 2 <= self.argmin_ell <= 2 * self.ell_star


def optimize_parameters(k: int, m: int) -> Optimization:
    """ell* = round(k^(m/(m+1))), alpha* = (m+1)/ln k, plus an integer scan."""
    if k < 2 or m < 1:
        raise ValueError("need k >= 2 and m >= 1")
    target = k ** (m / (m + 1))
    ell_star = min(max(1, round(target)), k - 1)
    alpha_star = (m + 1) / math.log(k)
    neighbors = {}
    for ell in {max(1, math.floor(target)), min(k - 1, math.ceil(target))}:
        neighbors[ell] = theorem38_bound(k, m, ell, alpha_star, check=False).relaxed
    ells, q = unrelaxed_curve(k, m)
    i = int(np.argmin(q))
    return Optimization(
        k=k, m=m, ell_star=ell_star, alpha_star=alpha_star,
        q_star=theorem38_bound(k, m, ell_star, alpha_star, check=False).relaxed,
        feasible=feasibility(k, m, alpha_star),
        alpha_admissible=alpha_admissible(k, ell_star, alpha_star),
        neighbors=dict(sorted(neighbors.items())),
        argmin_ell=int(ells[i]), argmin_q=float(q[i]),
    )


COST_CURVE_COLUMNS = ("ell", "Q_relaxed", "Q_unrelaxed")


def cost_curve(k: int, m: int, alpha: float | None = None, ells: Iterable[int] | None = None) -> list[dict]:
    """Rows (ell, relaxed, un-relaxed); relaxed is None where alpha is not admissible."""
    alpha = (m + 1) / math.log(k) if alpha is None else alpha
    rows = []
    for ell in ells if ells is not None else range(1, k):
        pair = theorem38_bound(k, m, ell, alpha, check=False)
        rows.append({
            "ell": ell,
            "Q_relaxed": pair.relaxed if alpha_admissible(k, ell, alpha) else None,
            "Q_unrelaxed": pair.unrelaxed,
        })
    return rows


# ---------------------------------------------------------------------------
# dense Szegedy walk
# ---------------------------------------------------------------------------

def stationary_distribution(P: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(P.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    return v / v.sum()


def second_eigen_gap(P: np.ndarray) -> float:
    ev = np.sort(np.real(np.linalg.eigvals(P)))[::-1]
    return float(1 - ev[1])


@dataclass(frozen=True)
class SzegedySim:
    W: np.ndarray
    init: np.ndarray
    marked: frozenset[int]

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    def unitarity_error(self) -> float:
        return float(np.abs(self.W.conj().T @ self.W - np.eye(self.dim)).max())


def szegedy_walk(P: np.ndarray, marked: Iterable[int] = (), cap: int = DEFAULT_DIM_CAP) -> SzegedySim:
    """W = (S R S) R on the pair space, R = 2 Pi - I the reflection through
    span{|x> (x) sum_y sqrt(P'_xy)|y>}, S the swap, P' = P with marked rows absorbing.

    The start state is the stationary lift of the unmodified chain, which W
    fixes whenever no vertex is marked and P is reversible.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise ValueError("transition matrix must be square")
    if not np.allclose(P.sum(axis=1), 1.0):
        raise ValueError("transition matrix rows must sum to 1")
    if n * n > cap:
        raise MatrixTooLarge(f"pair space dimension {n * n} exceeds cap {cap}")
    marked = frozenset(int(x) for x in marked)
    if any(not 0 <= x < n for x in marked):
        raise ValueError("marked vertex out of range")

    Pm = P.copy()
    for x in marked:
        Pm[x] = 0.0
        Pm[x, x] = 1.0
    psi = np.zeros((n * n, n))
    for x in range(n):
        psi[x * n:(x + 1) * n, x] = np.sqrt(Pm[x])
    reflect = 2 * psi @ psi.T - np.eye(n * n)
    swap = np.eye(n * n)[np.arange(n * n).reshape(n, n).T.ravel()]
    W = swap @ reflect @ swap @ reflect

    pi = stationary_distribution(P)
    init = np.zeros(n * n)
    for x in range(n):
        init[x * n:(x + 1) * n] = np.sqrt(pi[x] * P[x])
    return SzegedySim(W, init, marked)


@dataclass(frozen=True)
class SzegedyResult:
    min_fidelity: float
    steps_used: int
    detected: bool
    horizon: int
    fidelities: tuple[float, ...]
    delta_hat: float
    epsilon: float
    unitarity_error: float


def szegedy_detect(P: np.ndarray, marked: Iterable[int] = (), c: float = DETECTION_CONSTANT,
                   gamma: float = FIDELITY_DROP, epsilon: float | None = None,
                   cap: int = DEFAULT_DIM_CAP) -> SzegedyResult:
    """Run W^s on the stationary lift for s = 1..T, T = ceil(c / sqrt(delta_hat eps)).

    ``delta_hat`` is the spectral gap of the given chain (pass the lazy chain).
    ``epsilon`` defaults to |M|/n, or to 1/n when M is empty so the horizon
    matches a single marked vertex.  ``steps_used`` is the first s with
    F(s) <= 1 - gamma, or T if that never happens.
    """
    marked = frozenset(marked)
    n = np.asarray(P).shape[0]
    if epsilon is None:
        epsilon = len(marked) / n if marked else 1 / n
    elif epsilon == 0 and marked:
        raise MarkedFractionZero("marked set is nonempty but epsilon = 0")
    if epsilon <= 0:
        raise MarkedSetEmpty("horizon undefined for epsilon = 0")
    sim = szegedy_walk(P, marked, cap)
    delta_hat = second_eigen_gap(np.asarray(P, dtype=float))
    horizon = math.ceil(c / math.sqrt(delta_hat * epsilon))

    state = sim.init.copy()
    fids = []
    crossed = None
    for s in range(1, horizon + 1):
        state = sim.W @ state
        F = float(abs(sim.init @ state) ** 2)
        fids.append(F)
        if crossed is None and F <= 1 - gamma:
            crossed = s
    return SzegedyResult(
        min_fidelity=min(fids),
        steps_used=crossed if crossed is not None else horizon,
        detected=crossed is not None,
        horizon=horizon,
        fidelities=tuple(fids),
        delta_hat=delta_hat,
        epsilon=epsilon,
        unitarity_error=sim.unitarity_error(),
    )
