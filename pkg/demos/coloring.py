"""k-coloring perturbed graphs: look for a (k+1)-clique first, search only if none.

Flipping each pair with probability eps plants cliques quickly, so the
expensive backtracking branch becomes rare as eps grows.
"""
from fractions import Fraction

from smoothedp.graphs import Graph, PerturbedGraphModel, color_decide, noclique_bound, perturb

n, k, trials = 12, 3, 1000
base = Graph.empty(n).to_bits()
for eps in ("1/10", "1/5", "2/5", "1/2"):
    model = PerturbedGraphModel.from_eps(n, base, Fraction(eps))
    results = [color_decide(perturb(model, s), k) for s in range(trials)]
    searched = sum(not r.clique_found for r in results) / trials
    colorable = sum(r.answer for r in results) / trials
    print(f"eps={eps:>5}: exhaustive search {searched:.3f} (bound {noclique_bound(n, k, float(Fraction(eps))):.3f})  "
          f"3-colorable {colorable:.3f}  mean steps {sum(r.steps for r in results) / trials:.1f}")
