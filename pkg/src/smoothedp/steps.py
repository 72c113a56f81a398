"""Machine-independent step accounting shared by every algorithm."""

from __future__ import annotations


class BudgetExceeded(Exception):
    """Raised by :class:`StepCounter` once the count passes its budget."""


class StepCounter:
    """Counts elementary steps and optionally aborts past a budget.

    The budget is inclusive: a run using exactly ``budget`` steps completes.
    """

    __slots__ = ("count", "budget")

    def __init__(self, budget: int | None = None):
        self.count = 0
        self.budget = budget

    def tick(self, k: int = 1) -> None:
        self.count += k
        if self.budget is not None and self.count > self.budget:
            raise BudgetExceeded(self.count)
