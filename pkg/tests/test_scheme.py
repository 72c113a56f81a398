import math
from fractions import Fraction

import numpy as np
import pytest

from smoothedp.binopt import AllSubsets, BinDecisionInstance, adaptive_solve
from smoothedp.dist import coefficient_family
from smoothedp.scheme import (
    ACCEPT,
    BOTTOM,
    REJECT,
    BudgetedOutcome,
    make_scheme,
    run_budgeted,
    scheme_budget,
    scheme_to_algorithm,
    step_count,
)
from smoothedp.steps import StepCounter


def count_ones(bits, counter):
    """Toy decider: one step per character, accepts an even number of ones."""
    ones = 0
    for c in bits:
        counter.tick()
        ones += c == "1"
    return ones % 2 == 0


def solver(inst, counter):
    return adaptive_solve(inst, counter=counter).answer


def knapsack_inputs(count, seed=0):
    fam = coefficient_family(8, 8, rho=1)
    rng = np.random.default_rng(seed)
    return [BinDecisionInstance(8, 8, AllSubsets(), fam.sample_values(1000 + i), int(rng.integers(0, 8 * 255)))
            for i in range(count)]


# --- run_budgeted -----------------------------------------------------------

def test_budget_zero_is_bottom():
    out = run_budgeted(count_ones, "0110", 0)
    assert out.result == BOTTOM and out.is_bottom and out.answer is None


def test_sufficient_budget_gives_answer():
    assert run_budgeted(count_ones, "0110", 100).result == ACCEPT
    assert run_budgeted(count_ones, "0111", 100).result == REJECT


def test_exact_budget_boundary_is_inclusive():
    answer, steps = step_count(count_ones, "110101")
    out = run_budgeted(count_ones, "110101", steps)
    assert out.answer == answer and out.steps_used == steps
    assert run_budgeted(count_ones, "110101", steps - 1).is_bottom


# --- make_scheme ------------------------------------------------------------

def test_budget_formula():
    assert scheme_budget(8, 1, Fraction(1, 2), Fraction(1, 3)) == 16**3
    assert scheme_budget(3, Fraction(5, 2), Fraction(1, 3), Fraction(1, 2)) == math.ceil(Fraction(45, 2) ** 2)
    with pytest.raises(ValueError):
        scheme_budget(3, 1, Fraction(1, 2), Fraction(2, 3))


def test_scheme_rejects_bad_delta():
    scheme = make_scheme(count_ones, Fraction(1, 2), 4, 16, Fraction(1, 16))
    for delta in (0, 1, Fraction(3, 2)):
        with pytest.raises(ValueError):
            scheme("0101", delta)


def test_constant_time_algorithm_never_bottoms():
    const = lambda item, counter: counter.tick(3) or True
    scheme = make_scheme(const, Fraction(1, 1), 2, 4, Fraction(1, 2))
    for k in range(1, 12):
        assert scheme("x", Fraction(1, 2**k)).result == ACCEPT


def test_budget_shrinks_as_delta_grows():
    scheme = make_scheme(count_ones, Fraction(1, 2), 4, 16, Fraction(1, 16))
    budgets = [scheme.budget(Fraction(1, d)) for d in (100, 10, 3, 2)]
    assert budgets == sorted(budgets, reverse=True)


def test_knapsack_bottom_rate_within_delta():
    scheme = make_scheme(solver, Fraction(1, 3), 8, 2**64, Fraction(1, 2**64))
    inputs = knapsack_inputs(2000)
    rates = []
    for delta in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
        outs = [scheme(inst, delta) for inst in inputs]
        rate = sum(o.is_bottom for o in outs) / len(outs)
        stderr = math.sqrt(rate * (1 - rate) / len(outs))
        assert rate <= float(delta) + 3 * stderr
        rates.append(rate)
    assert rates == sorted(rates, reverse=True)


def test_schemes_are_errorless():
    scheme = make_scheme(solver, Fraction(1, 2), 8, 2**64, Fraction(1, 2**64))
    for inst in knapsack_inputs(300, seed=1):
        truth = solver(inst, StepCounter())
        for delta in (Fraction(1, 2), Fraction(1, 64)):
            out = scheme(inst, delta)
            assert out.is_bottom or out.answer == truth


# --- scheme_to_algorithm ----------------------------------------------------

def test_never_bottom_scheme_takes_one_iteration():
    scheme = lambda item, delta: BudgetedOutcome(ACCEPT, 7, delta)
    res = scheme_to_algorithm(scheme).run("x")
    assert (res.answer, res.iterations, res.steps) == (True, 1, 7)


def test_bottom_above_quarter_answers_at_iteration_two():
    def scheme(item, delta):
        if delta > Fraction(1, 4):
            return BudgetedOutcome(BOTTOM, 10, delta)
        return BudgetedOutcome(REJECT, 25, delta)

    res = scheme_to_algorithm(scheme).run("x")
    assert (res.answer, res.iterations, res.iteration_steps, res.steps) == (False, 2, (10, 25), 35)


def test_iteration_limit():
    scheme = lambda item, delta: BudgetedOutcome(BOTTOM, 1, delta)
    with pytest.raises(RuntimeError):
        scheme_to_algorithm(scheme, max_iterations=5).run("x")


def test_round_trip_preserves_answers():
    scheme = make_scheme(solver, Fraction(1, 2), 8, 2**64, Fraction(1, 2**64))
    algorithm = scheme_to_algorithm(scheme)
    for inst in knapsack_inputs(1000, seed=2):
        assert algorithm(inst) == step_count(solver, inst)[0]


def test_round_trip_exhaustive_small_inputs():
    scheme = make_scheme(count_ones, Fraction(1, 1), 1, 2, Fraction(1, 2))
    algorithm = scheme_to_algorithm(scheme)
    for k in range(0, 7):
        for v in range(1 << k):
            bits = format(v, f"0{k}b") if k else ""
            assert algorithm(bits) == count_ones(bits, StepCounter())
