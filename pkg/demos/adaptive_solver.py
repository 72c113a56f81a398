"""Bit-revealing solver for exists x in S with w.x <= t.

Start with a few leading bits per coefficient, solve the rounded instance by
dynamic programming, and reveal one more bit only when the rounded witness
fails on the true weights.  Perturbed inputs rarely need many bits.
"""
import numpy as np

from smoothedp.binopt import AllSubsets, BinDecisionInstance, adaptive_solve, brute_force_decide
from smoothedp.dist import coefficient_family

n, W, trials = 10, 12, 300
rng = np.random.default_rng(1)
for rho in (1, n**2, 2 ** (n * W)):
    fam = coefficient_family(n, W, rho)
    bits, steps, agree = [], [], 0
    for i in range(trials):
        inst = BinDecisionInstance(n, W, AllSubsets(), fam.sample_values(i), int(rng.integers(0, n << W)))
        trace = adaptive_solve(inst)
        agree += trace.answer == brute_force_decide(inst)[0]
        bits.append(trace.bits_revealed)
        steps.append(trace.steps)
    label = "worst case" if rho == 2 ** (n * W) else f"rho={rho}"
    print(f"{label:>11}: mean bits {np.mean(bits):5.2f}  max bits {max(bits):2d}  "
          f"median steps {int(np.median(steps)):>7}  oracle agreement {agree}/{trials}")
