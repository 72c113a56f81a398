import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothedp.binopt import AllSubsets, BinDecisionInstance, CardinalityExact, ExplicitList
from smoothedp.dist import CoefficientFamily, Phi, TableCoordinate, UniformWindow, coefficient_family
from smoothedp.gaps import (
    batch_gaps,
    bounded_density_check,
    index_gap_exceptions,
    compute_gaps,
    compute_index_gaps,
    gap_duality_exact,
    is_monotone,
    lexicographic,
    pareto_mask,
    scrambled,
    separating_bound,
    separating_mc,
)


def plain_gaps(S, w, t):
    """Oracle straight from the definitions; S listed highest rank first."""
    cost = lambda x: sum(a * b for a, b in zip(w, x))
    winner = next((x for x in S if cost(x) <= t), None)
    above = S[:S.index(winner)] if winner is not None else S
    loser = min(above, key=cost, default=None)  # min keeps the first (highest-ranked) tie
    gamma = t - cost(winner) if winner is not None else None
    lam = cost(loser) - t if loser is not None else None
    return winner, gamma, loser, lam


def lex_desc(n, include_zero=False):
    return [x for x in itertools.product((1, 0), repeat=n) if include_zero or any(x)]


# --- compute_gaps -----------------------------------------------------------

def test_three_solution_example():
    inst = BinDecisionInstance(2, 3, AllSubsets(), (4, 2), 3)
    rep = compute_gaps(inst)
    assert rep.winner == (0, 1) and rep.gamma == 1
    assert rep.loser == (1, 0) and rep.lam == 1
    same = compute_gaps(BinDecisionInstance(2, 3, ExplicitList(((0, 1), (1, 0), (1, 1))), (4, 2), 3))
    assert (same.winner, same.gamma, same.loser, same.lam) == ((0, 1), 1, (1, 0), 1)


def test_threshold_above_total_has_no_loser():
    inst = BinDecisionInstance(3, 4, AllSubsets(), (5, 9, 2), 16)
    rep = compute_gaps(inst)
    assert rep.winner == (1, 1, 1) and rep.gamma == 0
    assert rep.loser is None and rep.lam is None


def test_threshold_below_min_cost_has_no_winner():
    inst = BinDecisionInstance(3, 4, AllSubsets(), (5, 9, 2), 1)
    rep = compute_gaps(inst)
    assert rep.winner is None and rep.gamma is None
    assert rep.loser == (0, 0, 1) and rep.lam == 1


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        compute_gaps(BinDecisionInstance(2, 2, AllSubsets(True), (1, 1), 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 15), min_size=n, max_size=n), st.integers(-3, 6 * 15 + 3))))
def test_gaps_match_definitions(args):
    w, t = args
    n = len(w)
    rep = compute_gaps(BinDecisionInstance(n, 4, AllSubsets(), w, t))
    assert (rep.winner, rep.gamma, rep.loser, rep.lam) == plain_gaps(lex_desc(n), w, t)
    # winners and losers are Pareto-optimal
    for x in (rep.winner, rep.loser):
        if x is not None:
            assert x in rep.pareto_set


def test_pareto_set_by_definition():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        w = [int(v) for v in rng.integers(0, 32, size=n)]
        S = lex_desc(n)
        cost = lambda x: sum(a * b for a, b in zip(w, x))
        expect = [x for i, x in enumerate(S) if all(cost(y) > cost(x) for y in S[:i])]
        got = compute_gaps(BinDecisionInstance(n, 5, AllSubsets(), w, 0)).pareto_set
        assert list(got) == expect


def test_pareto_mask_ties_go_to_higher_rank():
    assert pareto_mask(np.array([5, 3, 3, 4, 1])).tolist() == [True, True, False, False, True]


def test_batch_gaps_rows_independent():
    costs = np.array([[4, 6, 2], [1, 1, 1], [9, 9, 9]])
    wpos, gamma, lpos, lam = batch_gaps(costs, 3)
    assert wpos.tolist() == [2, 0, -1]
    assert gamma[:2].tolist() == [1, 2]
    assert lpos.tolist() == [0, -1, 0]
    assert lam[[0, 2]].tolist() == [1, 6]


# --- index gaps -------------------------------------------------------------

def plain_index_lambdas(S, w, t):
    cost = lambda x: sum(a * b for a, b in zip(w, x))
    out = []
    for i in range(len(w)):
        bar = [x for x in S if x[i] == 0]
        win = next((x for x in bar if cost(x) <= t), None)
        limit = S.index(win) if win is not None else len(S)
        cand = [x for x in S[:limit] if x[i] == 1]
        out.append(min(cost(x) for x in cand) - t if cand else None)
    return tuple(out)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 7), min_size=2, max_size=2), st.integers(-2, 16))
def test_index_lambdas_match_definitions_n2(w, t):
    got = compute_index_gaps(BinDecisionInstance(2, 3, AllSubsets(), w, t))
    assert got == plain_index_lambdas(lex_desc(2), w, t)


def test_empty_index_class_gives_none():
    # S_1 is empty: no member has x_1 = 1
    assert compute_index_gaps(BinDecisionInstance(2, 3, ExplicitList(((0, 1),)), (3, 3), 0))[0] is None


@pytest.mark.parametrize("structure", [AllSubsets(), CardinalityExact(1), CardinalityExact(2)])
def test_loser_gap_is_index_gap(structure):
    dists = [UniformWindow(0, 3, 3)] * 3
    assert index_gap_exceptions(structure, dists, range(0, 22)) == []


# --- duality ----------------------------------------------------------------

@pytest.mark.parametrize("t", range(0, 7))
@pytest.mark.parametrize("delta", [1, 2, 3])
def test_duality_uniform_two_bits(t, delta):
    dists = [UniformWindow(0, 2, 2)] * 2
    d = gap_duality_exact(AllSubsets(), dists, t, delta)
    assert d.equal


def plain_duality(dists, t, delta):
    n = len(dists)
    S = lex_desc(n)
    lhs = rhs = Fraction(0)
    for w in itertools.product(*(d.support() for d in dists)):
        p = Fraction(1)
        for d, v in zip(dists, w):
            p *= d.mass(v)
        _, g, _, _ = plain_gaps(S, w, t)
        _, _, _, lam = plain_gaps(S, w, t - delta)
        lhs += p if g is not None and g < delta else 0
        rhs += p if lam is not None and lam <= delta else 0
    return lhs, rhs


def test_duality_matches_plain_enumeration():
    dists = [TableCoordinate(((0, Fraction(1, 3)), (2, Fraction(1, 6)), (3, Fraction(1, 2))), 2),
             UniformWindow(1, 1, 2), UniformWindow(0, 2, 2)]
    for t in range(-2, 9):
        for delta in (1, 2, 3):
            d = gap_duality_exact(AllSubsets(), dists, t, delta)
            assert (d.lhs, d.rhs) == plain_duality(dists, t, delta)
            assert d.equal


def test_duality_negative_shifted_threshold():
    dists = [UniformWindow(0, 2, 2)] * 2
    d = gap_duality_exact(AllSubsets(), dists, 1, 3)  # t - delta = -2
    assert d.equal and d.lhs == plain_duality(dists, 1, 3)[0]


def test_duality_point_mass():
    dists = [UniformWindow(2, 0, 2), UniformWindow(3, 0, 2)]
    for t in range(0, 7):
        for delta in (1, 2, 3):
            d = gap_duality_exact(AllSubsets(), dists, t, delta)
            assert d.lhs in (0, 1) and d.equal


def test_duality_space_limit():
    with pytest.raises(ValueError):
        gap_duality_exact(AllSubsets(), [UniformWindow(0, 11, 11)] * 2, 3, 1)
    with pytest.raises(ValueError):
        gap_duality_exact(AllSubsets(), [UniformWindow(0, 2, 2)] * 2, 3, 0)


# --- small-gap bound --------------------------------------------------------

def test_separating_bound_value():
    phi = Phi(1, 16)  # phi^(1/4) = 1/16
    assert separating_bound(3, phi, 4) >= 3 * 4 / 16
    assert separating_bound(3, phi, 4) < 3 * 4 / 16 * (1 + 1e-12)
    assert separating_bound(3, phi, 4, monotone=False) >= 3 * 16 / 16


def test_separating_mc_within_bound():
    fam = coefficient_family(6, 6, rho=1)
    rows = separating_mc(AllSubsets(), fam, 6 * 16, [0, 1, 2, 4, 8], 4000, seed=11)
    assert rows[0].p_gamma == 0
    assert all(r.ok for r in rows)
    assert rows[-1].p_gamma > 0  # the estimate is not trivially zero


def test_separating_mc_vacuous_regime():
    fam = coefficient_family(4, 4, rho=16)
    rows = separating_mc(AllSubsets(), fam, 20, [16 * 4], 500, seed=2)
    assert rows[0].bound >= 1 and rows[0].p_lambda <= 1 and rows[0].ok


def test_separating_mc_nonmonotone_ranking():
    ranking = scrambled(5)
    assert not is_monotone(ranking) and is_monotone(lexicographic)
    fam = coefficient_family(6, 6, rho=1)
    rows = separating_mc(AllSubsets(), fam, 6 * 16, [1, 2, 4, 8], 3000, seed=4, ranking=ranking)
    assert all(r.ok for r in rows)
    assert rows[0].bound == separating_bound(1, fam.phi, 6, monotone=False)


def test_separating_mc_refuses_mass_violation():
    fam = CoefficientFamily((UniformWindow(0, 1, 4),) * 2, 4, Phi(1, 8))
    with pytest.raises(ValueError):
        separating_mc(AllSubsets(), fam, 4, [1], 10, seed=0)


def test_separating_mc_is_deterministic():
    fam = coefficient_family(5, 5, rho=2)
    a = separating_mc(AllSubsets(), fam, 40, [1, 3], 300, seed=9)
    b = separating_mc(AllSubsets(), fam, 40, [1, 3], 300, seed=9)
    assert a == b


# --- bounded density --------------------------------------------------------

def test_density_uniform():
    dist = UniformWindow(0, 6, 6)
    chk = bounded_density_check(dist, 10, 4, Phi(1, 6), 1)
    assert chk.prob == Fraction(4, 64) and chk.ok


def test_density_empty_interval():
    chk = bounded_density_check(UniformWindow(0, 3, 4), 2, 0, Phi(1, 3), 1)
    assert chk.prob == 0 and chk.ok


def test_density_partial_window_overlap():
    dist = UniformWindow(8, 3, 5)  # {8, ..., 15}
    chk = bounded_density_check(dist, 13, 5, Phi(1, 3), 1)
    assert chk.prob == Fraction(3, 8) and chk.ok


def test_density_violation_detected():
    dist = TableCoordinate(((3, Fraction(1, 2)), (4, Fraction(1, 2))), 3)
    assert not bounded_density_check(dist, 3, 1, Phi(1, 3), 2).ok
    assert bounded_density_check(dist, 3, 1, Phi(1, 2), 2).ok  # equality is allowed
