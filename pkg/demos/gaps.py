"""Winner and loser gaps.

The winner gap is the slack of the best feasible solution, the loser gap the
excess of the best solution cut off by the threshold.  Their distributions are
tied by an exact duality and both are rarely small under perturbation.
"""
from smoothedp.binopt import AllSubsets, BinDecisionInstance
from smoothedp.dist import UniformWindow, coefficient_family
from smoothedp.gaps import compute_gaps, gap_duality_exact, separating_mc

rep = compute_gaps(BinDecisionInstance(3, 4, AllSubsets(), (9, 5, 4), 10))
print("w=(9,5,4), t=10")
print("  winner", rep.winner, "gap", rep.gamma, "| loser", rep.loser, "gap", rep.lam)
print("  index gaps", rep.index_lambdas, "| pareto set", rep.pareto_set)

dists = [UniformWindow(0, 3, 3)] * 3
print("\nexact duality, three uniform 3-bit coefficients")
for t, delta in [(5, 1), (9, 2), (12, 3), (1, 3)]:
    d = gap_duality_exact(AllSubsets(), dists, t, delta)
    print(f"  t={t:2d} delta={delta}: Pr(winner gap < delta) = {d.lhs}  Pr(loser gap at t-delta <= delta) = {d.rhs}")

fam = coefficient_family(8, 8, rho=8)
print("\nMonte Carlo, n=8, W=8, rho=8")
for row in separating_mc(AllSubsets(), fam, 8 * 64, [1, 4, 16, 32], trials=5000, seed=3):
    print(f"  delta={row.delta:3d}  winner {row.p_gamma:.4f}  loser {row.p_lambda:.4f}  bound {row.bound:.4f}")
