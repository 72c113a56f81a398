"""Smoothed extension of G(n, p) and the clique-first k-coloring decider.

Graphs on ``n`` vertices are stored as a tuple of neighbor bitmasks.  The
adjacency bitstring lists pairs ``(i, j)``, ``i < j``, in lexicographic order.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .dist import CoordinateDist, Phi, ProductFamily, MassReport, TableCoordinate, check_bits
from .steps import StepCounter

EPS_BITS = 64


def pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


@dataclass(frozen=True)
class Graph:
    n: int
    adj: tuple[int, ...]

    @classmethod
    def from_bits(cls, n: int, bits: str) -> "Graph":
        check_bits(bits, n * (n - 1) // 2)
        adj = [0] * n
        for (i, j), b in zip(pairs(n), bits):
            if b == "1":
                adj[i] |= 1 << j
                adj[j] |= 1 << i
        return cls(n, tuple(adj))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        adj = [0] * n
        for i, j in edges:
            if i == j:
                raise ValueError("self-loop")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(n, tuple(adj))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    def to_bits(self) -> str:
        return "".join("1" if self.adj[i] >> j & 1 else "0" for i, j in pairs(self.n))

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def degree(self, v: int) -> int:
        return bin(self.adj[v]).count("1")

    @property
    def edge_count(self) -> int:
        return sum(self.degree(v) for v in range(self.n)) // 2


# ---------------------------------------------------------------------------
# perturbation model


def eps_from_phi(phi: Phi, pair_count: int) -> Fraction:
    """Flip probability with ``(1 - eps)**pair_count <= phi``.

    ``1 - 2**(log2(phi)/pair_count)`` is evaluated with mpmath, rounded up to a
    multiple of ``2**-64`` and clamped to ``[0, 1/2]``.  Rounding up keeps the
    largest point mass at or below ``phi``.
    """
    if phi.value == 1 or pair_count == 0:
        return Fraction(0)
    import mpmath

    with mpmath.workdps(60):
        x = 1 - mpmath.power(mpmath.mpf(phi.num) / mpmath.mpf(2) ** phi.exp, mpmath.mpf(1) / pair_count)
        scaled = int(mpmath.ceil(x * mpmath.mpf(2) ** EPS_BITS))
    eps = Fraction(scaled, 1 << EPS_BITS)
    return min(max(eps, Fraction(0)), Fraction(1, 2))


@dataclass(frozen=True)
class PerturbedGraphModel:
    """Adversarial base graph plus an independent per-pair flip probability.

    ``additive=True`` selects the semi-random variant where absent pairs gain an
    edge with probability ``eps`` and present edges are never removed.
    """

    n: int
    base: str
    eps: Fraction
    phi: Phi | None = None
    additive: bool = False

    def __post_init__(self):
        check_bits(self.base, self.pair_count)
        if not 0 <= self.eps <= Fraction(1, 2):
            raise ValueError(f"eps must lie in [0, 1/2], got {self.eps}")

    @classmethod
    def from_phi(cls, n: int, base: str, phi: Phi, additive: bool = False) -> "PerturbedGraphModel":
        return cls(n, base, eps_from_phi(phi, n * (n - 1) // 2), phi, additive)

    @classmethod
    def from_eps(cls, n: int, base: str, eps: Fraction, additive: bool = False) -> "PerturbedGraphModel":
        return cls(n, base, Fraction(eps), None, additive)

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def N(self) -> int:
        return 1 << self.pair_count

    def edge_probability(self, bit: str) -> Fraction:
        if bit == "1":
            return Fraction(1) if self.additive else 1 - self.eps
        return self.eps

    def family(self) -> "GraphFlipFamily":
        coords = tuple(
            TableCoordinate(((0, 1 - self.edge_probability(b)), (1, self.edge_probability(b))), 1)
            for b in self.base
        )
        phi = self.phi if self.phi is not None else _tight_phi(coords)
        return GraphFlipFamily(self, coords, phi)


def _tight_phi(coords) -> Phi:
    top = Fraction(1)
    for c in coords:
        top *= c.max_mass()[1]
    exp = max(top.denominator.bit_length(), 1)
    num = -((-top.numerator << exp) // top.denominator)
    return Phi(num, exp)


class GraphFlipFamily(ProductFamily):
    """Adjacency bitstrings of a perturbed graph; ``N = 2**C(n, 2)``."""

    kind = "GraphFlip"

    def __init__(self, model: PerturbedGraphModel, coords: tuple[CoordinateDist, ...], phi: Phi):
        self.model = model
        self.coords = coords
        self.width = 1
        self.phi = phi

    @property
    def n(self):
        return self.model.n

    def mass_bound_check(self):
        worst = "".join(str(c.max_mass()[0]) for c in self.coords)
        mass = self.point_mass(worst)
        return MassReport(mass <= self.phi.value, worst, mass, "global")

    def to_json(self):
        out = {"kind": self.kind, "n": self.n, "base": self.model.base, "eps": str(self.model.eps),
               "additive": self.model.additive}
        if self.model.phi is not None:
            out["phi"] = self.model.phi.to_json()
        return out


def perturb(model: PerturbedGraphModel, seed: int) -> Graph:
    """Draw a perturbed graph; each pair gets its own 64-bit uniform draw."""
    rng = random.Random(seed)
    num, den = model.eps.numerator, model.eps.denominator
    bits = []
    for b in model.base:
        u = rng.getrandbits(EPS_BITS)
        hit = u * den < num << EPS_BITS  # u / 2^64 < eps
        if b == "1":
            bits.append("1" if model.additive or not hit else "0")
        else:
            bits.append("1" if hit else "0")
    return Graph.from_bits(model.n, "".join(bits))


# ---------------------------------------------------------------------------
# cliques


def find_clique(graph: Graph, size: int, counter: StepCounter | None = None) -> tuple[int, ...] | None:
    """First ``size``-clique in lexicographic subset order; one step per subset test."""
    if counter is None:
        counter = StepCounter()
    if size > graph.n:
        return None
    adj = graph.adj
    for subset in itertools.combinations(range(graph.n), size):
        counter.tick()
        if all(adj[u] >> v & 1 for u, v in itertools.combinations(subset, 2)):
            return subset
    return None


def has_clique_bitset(graph: Graph, size: int) -> bool:
    """Independent clique test by recursive candidate-set intersection."""

    def grow(candidates: int, need: int) -> bool:
        if need == 0:
            return True
        while candidates:
            if bin(candidates).count("1") < need:
                return False
            v = candidates.bit_length() - 1
            candidates &= ~(1 << v)
            if grow(candidates & graph.adj[v], need - 1):
                return True
        return False

    return grow((1 << graph.n) - 1, size)


# ---------------------------------------------------------------------------
# coloring


def backtrack_color(graph: Graph, k: int, counter: StepCounter | None = None) -> list[int] | None:
    """Exact k-coloring by backtracking, vertices by decreasing degree.

    One step per node expansion (a vertex receiving a tentative color).
    """
    if counter is None:
        counter = StepCounter()
    order = sorted(range(graph.n), key=lambda v: (-graph.degree(v), v))
    colors = [-1] * graph.n

    def place(idx: int, used: int) -> bool:
        if idx == len(order):
            return True
        v = order[idx]
        forbidden = {colors[u] for u in range(graph.n) if graph.adj[v] >> u & 1}
        # a fresh color is interchangeable with any other unused one
        for c in range(min(used + 1, k)):
            if c in forbidden:
                continue
            counter.tick()
            colors[v] = c
            if place(idx + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    return list(colors) if place(0, 0) else None


@dataclass(frozen=True)
class ColorResult:
    answer: bool
    steps: int
    clique: tuple[int, ...] | None
    coloring: list[int] | None = None

    @property
    def clique_found(self) -> bool:
        return self.clique is not None


def color_decide(graph: Graph, k: int, counter: StepCounter | None = None) -> ColorResult:
    """Decide k-colorability: reject on a (k+1)-clique, else search exhaustively."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if counter is None:
        counter = StepCounter()
    start = counter.count
    clique = find_clique(graph, k + 1, counter)
    if clique is not None:
        return ColorResult(False, counter.count - start, clique)
    coloring = backtrack_color(graph, k, counter)
    return ColorResult(coloring is not None, counter.count - start, None, coloring)


def is_colorable_oracle(graph: Graph, k: int) -> bool:
    """k-colorability by inclusion-exclusion over independent-set counts.

    The number of k-tuples of independent sets covering V is
    ``sum_X (-1)**(n-|X|) * i(X)**k`` where ``i(X)`` counts independent
    subsets of ``X``; the graph is k-colorable iff that number is positive.
    """
    n = graph.n
    full = 1 << n
    indep = [0] * full
    indep[0] = 1
    for mask in range(1, full):
        v = mask.bit_length() - 1
        rest = mask & ~(1 << v)
        # subsets without v, plus those with v avoiding its neighbours
        indep[mask] = indep[rest] + indep[rest & ~graph.adj[v]]
    total = 0
    for mask in range(full):
        sign = -1 if (n - bin(mask).count("1")) % 2 else 1
        total += sign * indep[mask] ** k
    return total > 0


def chromatic_number(graph: Graph) -> int:
    for k in range(1, graph.n + 1):
        if is_colorable_oracle(graph, k):
            return k
    return 0


def noclique_bound(n: int, k: int, eps: float) -> float:
    """Upper bound on Pr(no (k+1)-clique) for the flip model at rate ``eps``."""
    eps = float(eps)
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    return (1.0 - eps ** math.comb(k + 1, 2)) ** (n / (k + 1))
