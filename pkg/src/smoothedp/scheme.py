"""Errorless heuristic schemes built from step-counted decision algorithms.

An *algorithm* here is any callable ``algorithm(input, counter) -> bool`` that
charges its work to the :class:`~smoothedp.steps.StepCounter` it is given.
A *scheme* is a callable ``scheme(input, delta) -> BudgetedOutcome``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from .steps import BudgetExceeded, StepCounter

ACCEPT = "accept"
REJECT = "reject"
BOTTOM = "bottom"

Algorithm = Callable[[Any, StepCounter], bool]


@dataclass(frozen=True)
class BudgetedOutcome:
    result: str
    steps_used: int
    delta: Fraction | None = None

    @property
    def is_bottom(self) -> bool:
        return self.result == BOTTOM

    @property
    def answer(self) -> bool | None:
        return None if self.is_bottom else self.result == ACCEPT


def run_budgeted(algorithm: Algorithm, item, budget: int, delta: Fraction | None = None) -> BudgetedOutcome:
    """Run until completion or until more than ``budget`` steps are spent."""
    counter = StepCounter(budget)
    try:
        answer = algorithm(item, counter)
    except BudgetExceeded:
        return BudgetedOutcome(BOTTOM, budget, delta)
    return BudgetedOutcome(ACCEPT if answer else REJECT, counter.count, delta)


def step_count(algorithm: Algorithm, item) -> tuple[bool, int]:
    counter = StepCounter()
    answer = algorithm(item, counter)
    return answer, counter.count


def scheme_budget(n: int, N_phi: Fraction | int, delta: Fraction, eps: Fraction) -> int:
    """``ceil((n * N * phi / delta) ** (1/eps))`` for ``eps = 1/m``.

    With ``eps`` the reciprocal of an integer the power is an exact rational.
    """
    eps = Fraction(eps)
    if eps.numerator != 1 or eps <= 0:
        raise ValueError("eps must be 1/m for a positive integer m")
    base = Fraction(n) * Fraction(N_phi) / Fraction(delta)
    return math.ceil(base ** eps.denominator)


class Scheme:
    """Budgeted wrapper of an algorithm whose running time has a polynomial tail."""

    def __init__(self, algorithm: Algorithm, eps: Fraction, n: int, N_phi: Fraction | int):
        self.algorithm = algorithm
        self.eps = Fraction(eps)
        self.n = n
        self.N_phi = Fraction(N_phi)
        scheme_budget(n, self.N_phi, Fraction(1, 2), self.eps)  # validates eps

    def budget(self, delta: Fraction) -> int:
        return scheme_budget(self.n, self.N_phi, delta, self.eps)

    def __call__(self, item, delta) -> BudgetedOutcome:
        delta = Fraction(delta)
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        return run_budgeted(self.algorithm, item, self.budget(delta), delta)


def make_scheme(algorithm: Algorithm, eps, n: int, N: int, phi) -> Scheme:
    return Scheme(algorithm, Fraction(eps), n, Fraction(N) * Fraction(phi))


@dataclass(frozen=True)
class IteratedResult:
    answer: bool
    steps: int
    iterations: int
    iteration_steps: tuple[int, ...]


class SchemeAlgorithm:
    """Run a scheme with ``delta = 1/2, 1/4, ...`` until it stops answering bottom."""

    def __init__(self, scheme: Callable[[Any, Fraction], BudgetedOutcome], max_iterations: int = 4096):
        self.scheme = scheme
        self.max_iterations = max_iterations

    def run(self, item) -> IteratedResult:
        costs = []
        for i in range(1, self.max_iterations + 1):
            out = self.scheme(item, Fraction(1, 1 << i))
            costs.append(out.steps_used)
            if not out.is_bottom:
                return IteratedResult(out.answer, sum(costs), i, tuple(costs))
        raise RuntimeError(f"scheme still answered bottom after {self.max_iterations} rounds")

    def __call__(self, item, counter: StepCounter | None = None) -> bool:
        res = self.run(item)
        if counter is not None:
            counter.tick(res.steps)
        return res.answer


def scheme_to_algorithm(scheme, max_iterations: int = 4096) -> SchemeAlgorithm:
    return SchemeAlgorithm(scheme, max_iterations)
