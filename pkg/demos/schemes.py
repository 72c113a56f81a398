"""Errorless heuristic schemes.

A scheme runs an algorithm under a step budget that grows as the allowed
failure probability delta shrinks, answering bottom when the budget runs out.
Retrying with delta = 1/2, 1/4, ... turns a scheme back into an algorithm.
"""
from fractions import Fraction

import numpy as np

from smoothedp.binopt import AllSubsets, BinDecisionInstance, adaptive_solve
from smoothedp.dist import coefficient_family
from smoothedp.scheme import make_scheme, scheme_to_algorithm


def solver(inst, counter):
    return adaptive_solve(inst, counter=counter).answer


fam = coefficient_family(8, 8, rho=1)
rng = np.random.default_rng(0)
inputs = [BinDecisionInstance(8, 8, AllSubsets(), fam.sample_values(i), int(rng.integers(0, 8 * 255)))
          for i in range(2000)]
scheme = make_scheme(solver, Fraction(1, 3), 8, fam.N, fam.phi.value)
for delta in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
    bottom = sum(scheme(inst, delta).is_bottom for inst in inputs) / len(inputs)
    print(f"delta={delta}: budget {scheme.budget(delta):>7} steps, bottom rate {bottom:.4f}")

algorithm = scheme_to_algorithm(scheme)
runs = [algorithm.run(inst) for inst in inputs[:200]]
print("iterations needed:", {i: sum(r.iterations == i for r in runs) for i in sorted({r.iterations for r in runs})})
