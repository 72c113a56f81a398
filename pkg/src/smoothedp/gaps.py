"""Winner and loser gaps, Pareto sets, and their probabilistic checks.

For a threshold ``t`` the winner is the highest-ranked ``x in S`` with
``w.x <= t``; the loser minimises ``w.x - t`` over solutions ranked above the
winner (all of S when there is no winner), ties going to the higher rank.
``None`` stands for an undefined gap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .binopt import BinDecisionInstance, Structure, solutions
from .dist import CoefficientFamily, CoordinateDist, Phi

MAX_GAP_ENUM = 20
MAX_COEFF_SPACE = 1 << 20

# A ranking maps the lexicographically sorted solution matrix to a
# permutation listing row indices from highest to lowest rank.
Ranking = Callable[[np.ndarray], np.ndarray]


def lexicographic(X: np.ndarray) -> np.ndarray:
    return np.arange(len(X))


def scrambled(seed: int = 0) -> Ranking:
    """A fixed pseudo-random, generally non-monotone ranking."""

    def order(X: np.ndarray) -> np.ndarray:
        return np.random.default_rng(seed).permutation(len(X))

    order.monotone = False
    return order


lexicographic.monotone = True


def is_monotone(ranking: Ranking) -> bool:
    return getattr(ranking, "monotone", False)


@dataclass(frozen=True)
class GapReport:
    winner: tuple[int, ...] | None
    loser: tuple[int, ...] | None
    gamma: int | None
    lam: int | None
    index_lambdas: tuple[int | None, ...]
    pareto_set: tuple[tuple[int, ...], ...]


def ranked_solutions(structure: Structure, n: int, ranking: Ranking = lexicographic) -> np.ndarray:
    if n > MAX_GAP_ENUM:
        raise ValueError(f"structure with n={n} is too large to enumerate")
    X = solutions(structure, n)
    if ranking is lexicographic:
        return X
    return X[ranking(X)]


def batch_gaps(costs: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Winner/loser positions and gaps for each row of a rank-ordered cost matrix.

    Returns ``(winner_pos, gamma, loser_pos, lam)``; positions are -1 when the
    solution does not exist, and the matching gap entry is meaningless.
    """
    costs = np.atleast_2d(costs)
    rows, m = costs.shape
    feasible = costs <= t
    has = feasible.any(axis=1)
    wpos = np.where(has, feasible.argmax(axis=1), -1)
    r = np.arange(rows)
    gamma = np.where(has, t - costs[r, np.maximum(wpos, 0)], 0)
    limit = np.where(has, wpos, m)
    above = np.arange(m)[None, :] < limit[:, None]
    big = np.iinfo(np.int64).max
    masked = np.where(above, costs, big)
    lpos = masked.argmin(axis=1)  # first minimum = highest rank
    has_loser = limit > 0
    lpos = np.where(has_loser, lpos, -1)
    lam = np.where(has_loser, costs[r, np.maximum(lpos, 0)] - t, 0)
    return wpos, gamma, lpos, lam


def pareto_mask(costs: np.ndarray) -> np.ndarray:
    """Rows (in rank order) not undercut or matched by any higher-ranked row."""
    prior = np.minimum.accumulate(np.concatenate(([np.iinfo(np.int64).max], costs[:-1])))
    return costs < prior


def index_lambdas(X: np.ndarray, costs: np.ndarray, t: int) -> tuple[int | None, ...]:
    out = []
    for i in range(X.shape[1]):
        in_bar = X[:, i] == 0
        feasible_bar = np.flatnonzero(in_bar & (costs <= t))
        limit = feasible_bar[0] if len(feasible_bar) else len(X)
        cand = np.flatnonzero(~in_bar[:limit])
        out.append(int(costs[cand].min() - t) if len(cand) else None)
    return tuple(out)


def compute_gaps(inst: BinDecisionInstance, ranking: Ranking = lexicographic) -> GapReport:
    inst.require_no_zero()
    X = ranked_solutions(inst.structure, inst.n, ranking)
    costs = X @ np.array(inst.w, dtype=np.int64)
    wpos, gamma, lpos, lam = (int(a[0]) for a in batch_gaps(costs, inst.t))
    as_vec = lambda pos: tuple(int(b) for b in X[pos]) if pos >= 0 else None
    pareto = tuple(tuple(int(b) for b in row) for row in X[pareto_mask(costs)])
    return GapReport(
        winner=as_vec(wpos),
        loser=as_vec(lpos),
        gamma=gamma if wpos >= 0 else None,
        lam=lam if lpos >= 0 else None,
        index_lambdas=index_lambdas(X, costs, inst.t),
        pareto_set=pareto,
    )


def compute_index_gaps(inst: BinDecisionInstance, ranking: Ranking = lexicographic) -> tuple[int | None, ...]:
    inst.require_no_zero()
    X = ranked_solutions(inst.structure, inst.n, ranking)
    costs = X @ np.array(inst.w, dtype=np.int64)
    return index_lambdas(X, costs, inst.t)


# ---------------------------------------------------------------------------
# exhaustive coefficient space


def coefficient_space(dists: Sequence[CoordinateDist]) -> tuple[np.ndarray, list[int], int]:
    """All coefficient vectors with integer weights over a common denominator."""
    size = math.prod(len(d.support()) for d in dists)
    if size > MAX_COEFF_SPACE:
        raise ValueError(f"coefficient space of {size} points exceeds 2^20")
    dens = [math.lcm(*(d.mass(v).denominator for v in d.support())) for d in dists]
    supports = [d.support() for d in dists]
    vectors = np.array(list(itertools.product(*supports)), dtype=np.int64).reshape(size, len(dists))
    ints = [{v: int(d.mass(v) * den) for v in sup} for d, sup, den in zip(dists, supports, dens)]
    weights = [math.prod(ints[j][v] for j, v in enumerate(vec)) for vec in itertools.product(*supports)]
    return vectors, weights, math.prod(dens)


@dataclass(frozen=True)
class Duality:
    lhs: Fraction
    rhs: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def gap_duality_exact(structure: Structure, dists: Sequence[CoordinateDist], t: int, delta: int,
                      ranking: Ranking = lexicographic, space=None) -> Duality:
    """Exact ``Pr(gamma(t) < delta)`` and ``Pr(lambda(t - delta) <= delta)``."""
    if delta < 1:
        raise ValueError("delta must be a positive integer")
    n = len(dists)
    vectors, weights, den = space if space is not None else coefficient_space(dists)
    X = ranked_solutions(structure, n, ranking)
    costs = vectors @ X.T
    wpos, gamma, _, _ = batch_gaps(costs, t)
    _, _, lpos, lam = batch_gaps(costs, t - delta)
    left = (wpos >= 0) & (gamma < delta)
    right = (lpos >= 0) & (lam <= delta)
    lhs = sum(w for w, e in zip(weights, left) if e)
    rhs = sum(w for w, e in zip(weights, right) if e)
    return Duality(Fraction(lhs, den), Fraction(rhs, den))


def index_gap_exceptions(structure: Structure, dists: Sequence[CoordinateDist], thresholds: Sequence[int]) -> list:
    """Coefficient vectors and thresholds where the loser gap is not an index gap."""
    n = len(dists)
    vectors, _, _ = coefficient_space(dists)
    X = ranked_solutions(structure, n)
    bad = []
    for w in vectors:
        costs = X @ w
        for t in thresholds:
            _, _, lpos, lam = batch_gaps(costs, t)
            if lpos[0] < 0:
                continue
            if int(lam[0]) not in index_lambdas(X, costs, t):
                bad.append((tuple(int(v) for v in w), t))
    return bad


# ---------------------------------------------------------------------------
# Monte Carlo and interval checks


def separating_bound(delta: int, phi: Phi, n: int, monotone: bool = True) -> float:
    """``delta * phi**(1/n) * n`` (``n**2`` for non-monotone rankings), rounded up."""
    factor = n if monotone else n * n
    return math.nextafter(delta * factor * phi.root_float(n), math.inf)


@dataclass(frozen=True)
class GapRow:
    delta: int
    p_gamma: float
    p_lambda: float
    stderr_gamma: float
    stderr_lambda: float
    bound: float
    trials: int

    @property
    def stderr(self) -> float:
        return max(self.stderr_gamma, self.stderr_lambda)

    @property
    def ok(self) -> bool:
        return (self.p_gamma - 3 * self.stderr_gamma <= self.bound
                and self.p_lambda - 3 * self.stderr_lambda <= self.bound)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials) if trials else 0.0


def sample_gap_values(structure: Structure, family: CoefficientFamily, t: int, seeds: Sequence[int],
                      ranking: Ranking = lexicographic) -> tuple[list[int | None], list[int | None]]:
    """Winner and loser gap for one coefficient draw per seed."""
    n = family.n
    X = ranked_solutions(structure, n, ranking)
    zero = (0,) * n
    if structure.contains(zero):
        raise ValueError("gap analysis needs the zero vector excluded from S")
    W = np.array([family.sample_values(s) for s in seeds], dtype=np.int64).reshape(len(seeds), n)
    costs = W @ X.T
    wpos, gamma, lpos, lam = batch_gaps(costs, t)
    gammas = [int(g) if p >= 0 else None for p, g in zip(wpos, gamma)]
    lams = [int(v) if p >= 0 else None for p, v in zip(lpos, lam)]
    return gammas, lams


def gap_table(gammas, lams, deltas, phi: Phi, n: int, monotone: bool = True) -> list[GapRow]:
    trials = len(gammas)
    rows = []
    for d in deltas:
        pg = sum(1 for g in gammas if g is not None and g < d) / trials if trials else 0.0
        pl = sum(1 for v in lams if v is not None and v <= d) / trials if trials else 0.0
        rows.append(GapRow(d, pg, pl, binomial_stderr(pg, trials), binomial_stderr(pl, trials),
                           separating_bound(d, phi, n, monotone), trials))
    return rows


def separating_mc(structure: Structure, family: CoefficientFamily, t: int, deltas: Sequence[int],
                  trials: int, seed: int, ranking: Ranking = lexicographic) -> list[GapRow]:
    """Empirical winner/loser gap probabilities against the separating bound."""
    from .harness import derive_seed

    report = family.mass_bound_check()
    if not report.ok:
        raise ValueError(f"coefficient mass {report.worst_mass} at {report.worst_point} exceeds phi^(1/n)")
    seeds = [derive_seed(seed, i) for i in range(trials)]
    gammas, lams = sample_gap_values(structure, family, t, seeds, ranking)
    return gap_table(gammas, lams, deltas, family.phi, family.n, is_monotone(ranking))


@dataclass(frozen=True)
class DensityCheck:
    prob: Fraction
    bound: float
    ok: bool


def bounded_density_check(dist: CoordinateDist, z: int, delta: int, phi: Phi, n: int) -> DensityCheck:
    """Exact ``Pr(a in [z, z + delta))`` against ``phi**(1/n) * delta``."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    prob = dist.below(z + delta) - dist.below(z)
    # prob <= phi^(1/n) * delta  <=>  (prob / delta)^n <= phi
    ok = prob == 0 or (delta > 0 and (prob / delta) ** n <= phi.value)
    return DensityCheck(prob, delta * phi.root_float(n), ok)
