"""Binary decision problems ``exists x in S with w.x <= t``.

Solutions are ranked lexicographically (``x`` beats ``y`` iff ``x > y`` read
as a binary number, first coordinate most significant).  The adaptive solver
runs the pseudo-polynomial dynamic program on the ``b`` most significant bits
of each coefficient and reveals one more bit whenever the truncated witness
fails against the true coefficients.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .steps import StepCounter

MAX_ENUM_BITS = 24


class StructureTooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# solution structures


@dataclass(frozen=True)
class AllSubsets:
    """Every 0/1 vector; the zero vector only when ``include_zero`` is set."""

    include_zero: bool = False

    def contains(self, x: Sequence[int]) -> bool:
        return self.include_zero or any(x)

    def describe(self) -> str:
        return "subsets0" if self.include_zero else "subsets"


@dataclass(frozen=True)
class CardinalityExact:
    """Vectors with exactly ``k`` ones."""

    k: int

    def contains(self, x):
        return sum(x) == self.k

    def describe(self):
        return f"card:{self.k}"


@dataclass(frozen=True)
class ExplicitList:
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        vecs = tuple(tuple(int(b) for b in v) for v in self.vectors)
        if len(set(vecs)) != len(vecs):
            raise ValueError("ExplicitList entries must be distinct")
        if len({len(v) for v in vecs}) > 1:
            raise ValueError("ExplicitList entries must share one length")
        if any(b not in (0, 1) for v in vecs for b in v):
            raise ValueError("ExplicitList entries must be 0/1 vectors")
        object.__setattr__(self, "vectors", tuple(sorted(vecs, reverse=True)))

    def contains(self, x):
        return tuple(int(b) for b in x) in set(self.vectors)

    def describe(self):
        return "list:" + ",".join("".join(map(str, v)) for v in self.vectors)


Structure = AllSubsets | CardinalityExact | ExplicitList


def parse_structure(text: str) -> Structure:
    """``subsets``, ``subsets0`` (zero vector allowed), ``card:k``, ``list:011,110``
    or a file (``file:path`` or an existing path) with one 0/1 vector per line.
    """
    if text == "subsets":
        return AllSubsets()
    if text == "subsets0":
        return AllSubsets(include_zero=True)
    if text.startswith("card:"):
        return CardinalityExact(int(text[5:]))
    if text.startswith("list:"):
        return ExplicitList(tuple(_vector(item) for item in text[5:].split(",") if item))
    path = text[5:] if text.startswith("file:") else text
    if os.path.isfile(path):
        with open(path) as fh:
            lines = [line.split("#")[0].strip() for line in fh]
        return ExplicitList(tuple(_vector(line) for line in lines if line))
    if text.startswith("file:"):
        raise ValueError(f"structure file {path!r} not found")
    raise ValueError(f"unknown structure {text!r}")


def _vector(item: str) -> tuple[int, ...]:
    if not item or set(item) - {"0", "1"}:
        raise ValueError(f"bad 0/1 vector {item!r}")
    return tuple(int(c) for c in item)


@functools.lru_cache(maxsize=64)
def solutions(structure: Structure, n: int) -> np.ndarray:
    """All members of S as rows of an int64 array, highest rank first."""
    if isinstance(structure, ExplicitList):
        if structure.vectors and len(structure.vectors[0]) != n:
            raise ValueError(f"ExplicitList vectors have length {len(structure.vectors[0])}, expected {n}")
        arr = np.array(structure.vectors, dtype=np.int64).reshape(len(structure.vectors), n)
    else:
        if n > MAX_ENUM_BITS:
            raise StructureTooLarge(f"refusing to enumerate 2^{n} vectors")
        codes = np.arange((1 << n) - 1, -1, -1, dtype=np.int64)
        arr = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)
        if isinstance(structure, AllSubsets):
            if not structure.include_zero:
                arr = arr[:-1]
        else:
            arr = arr[arr.sum(axis=1) == structure.k]
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class BinDecisionInstance:
    n: int
    W: int
    structure: Structure
    w: tuple[int, ...]
    t: int

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(int(v) for v in self.w))
        if len(self.w) != self.n:
            raise ValueError(f"expected {self.n} coefficients, got {len(self.w)}")
        if any(not 0 <= v < (1 << self.W) for v in self.w):
            raise ValueError(f"coefficients must be {self.W}-bit unsigned integers")
        if isinstance(self.structure, CardinalityExact) and not 0 <= self.structure.k <= self.n:
            raise ValueError("cardinality outside [0, n]")

    def cost(self, x: Sequence[int]) -> int:
        return sum(wj for wj, xj in zip(self.w, x) if xj)

    def require_no_zero(self) -> None:
        zero = (0,) * self.n
        if self.structure.contains(zero):
            raise ValueError("gap analysis needs the zero vector excluded from S")


@dataclass(frozen=True)
class SolveTrace:
    answer: bool
    witness: tuple[int, ...] | None
    bits_revealed: int
    steps: int


def truncate(a: int, b: int, W: int) -> int:
    """Keep the ``b`` most significant of ``W`` bits: ``2**(W-b) * (a // 2**(W-b))``."""
    if not 0 <= b <= W:
        raise ValueError(f"bit count {b} outside [0, {W}]")
    shift = W - b
    return (a >> shift) << shift


# ---------------------------------------------------------------------------
# dynamic program


def _layers(structure: Structure) -> int:
    if isinstance(structure, AllSubsets):
        return 1 if structure.include_zero else 2
    return structure.k + 1


def dp_solve(structure: Structure, v: Sequence[int], s: int,
             counter: StepCounter | None = None) -> tuple[int, ...] | None:
    """Lexicographically maximal ``x in S`` with ``v.x <= s``, or ``None``.

    For subset and cardinality structures a reachability table over costs
    ``0..s`` is built from the last coordinate backwards; every table cell
    written counts one step.  The witness is then read off greedily, trying
    ``x_i = 1`` before ``x_i = 0``.  Explicit lists are scanned in rank order.
    """
    if counter is None:
        counter = StepCounter()
    n = len(v)
    if s < 0:
        counter.tick()
        return None
    if isinstance(structure, ExplicitList):
        for x in structure.vectors:
            counter.tick()
            if sum(vj for vj, xj in zip(v, x) if xj) <= s:
                return x
        return None

    width = s + 1
    L = _layers(structure)
    cardinality = isinstance(structure, CardinalityExact)
    # reach[i][l, c]: suffix i..n-1 can reach cost c in layer l.
    # subsets: layer 0 = any subset; with the zero vector excluded, layer 1 =
    # nonempty subset (taking an item from any layer-0 completion lands in both).
    # cardinality: layer l = exactly l ones.
    reach = [None] * (n + 1)
    last = np.zeros((L, width), dtype=bool)
    last[0, 0] = True
    reach[n] = last
    counter.tick(L * width)
    for i in range(n - 1, -1, -1):
        prev = reach[i + 1]
        cur = prev.copy()
        vi = int(v[i])
        if vi < width:
            if cardinality:
                cur[1:, vi:] |= prev[:-1, :width - vi]
            else:
                cur[:, vi:] |= prev[0, :width - vi]
        counter.tick(L * width)
        reach[i] = cur

    state = structure.k if cardinality else L - 1
    if not reach[0][state].any():
        return None
    x = []
    budget = s
    for i in range(n):
        vi = int(v[i])
        nxt = reach[i + 1]
        # layer that must stay reachable if x_i = 1
        take = (state - 1 if state >= 1 else None) if cardinality else 0
        counter.tick()
        if take is not None and vi <= budget and nxt[take, :budget - vi + 1].any():
            x.append(1)
            budget -= vi
            state = take
        else:
            x.append(0)
    return tuple(x)


# ---------------------------------------------------------------------------
# solvers


def default_b0(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) + 1 if n > 1 else 1


def adaptive_solve(inst: BinDecisionInstance, b0: int | None = None,
                   counter: StepCounter | None = None) -> SolveTrace:
    """Reveal coefficient bits until the truncated problem settles the answer."""
    if counter is None:
        counter = StepCounter()
    if b0 is None:
        b0 = default_b0(inst.n)
    if b0 < 1:
        raise ValueError("b0 must be at least 1")
    b0 = min(b0, inst.W)
    start = counter.count
    for b in range(b0, inst.W + 1):
        shift = inst.W - b
        v = [wj >> shift for wj in inst.w]
        s = inst.t >> shift
        x = dp_solve(inst.structure, v, s, counter)
        if x is None:
            # truncation never increases w.x, so this is a certain no
            return SolveTrace(False, None, b, counter.count - start)
        counter.tick(inst.n)
        if inst.cost(x) <= inst.t:
            return SolveTrace(True, x, b, counter.count - start)
    raise AssertionError("full-precision DP returned an infeasible witness")


def brute_force_decide(inst: BinDecisionInstance) -> tuple[bool, tuple[int, ...] | None]:
    """Exact answer by enumerating S; the witness is lex-maximal."""
    X = solutions(inst.structure, inst.n)
    if len(X) == 0:
        return False, None
    costs = X @ np.array(inst.w, dtype=np.int64)
    feasible = np.flatnonzero(costs <= inst.t)
    if len(feasible) == 0:
        return False, None
    return True, tuple(int(b) for b in X[feasible[0]])


def random_instance(rng: np.random.Generator, n: int, W: int, structure: Structure, t: int | None = None,
                    family=None) -> BinDecisionInstance:
    """Instance with coefficients from ``family`` (uniform when omitted)."""
    if family is None:
        w = rng.integers(0, 1 << W, size=n)
    else:
        w = family.sample_values(int(rng.integers(0, 2**63)))
    if t is None:
        t = int(rng.integers(0, n * ((1 << W) - 1) + 1))
    return BinDecisionInstance(n, W, structure, tuple(int(v) for v in w), t)
