"""Parameterized families of discrete distributions with exact arithmetic.

A family is fixed by an instance size ``n``, an adversarial seed and a
density parameter ``phi``; every point mass is bounded by ``phi``.  Three
kinds are built in:

* :class:`TableFamily` -- an explicit map from fixed-length bitstrings to masses.
* :class:`CoefficientFamily` -- ``n`` independent ``W``-bit coefficients,
  encoded big-endian and concatenated.
* :class:`GraphFlipFamily` -- the adjacency bits of a base graph, each flipped
  independently (see :mod:`smoothedp.graphs`).

All probabilities are :class:`fractions.Fraction`.  Bitstrings are ``str``
objects over ``"01"``.
"""

from __future__ import annotations

import bisect
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

UNIFORM_BITS = 128


class EncodingError(ValueError):
    """A bitstring does not have the shape a family expects."""


class UnsupportedError(Exception):
    """The family does not provide the requested operation."""


# ---------------------------------------------------------------------------
# phi


@dataclass(frozen=True)
class Phi:
    """Dyadic density bound ``num / 2**exp``."""

    num: int
    exp: int

    def __post_init__(self):
        if self.num < 0 or self.exp < 0:
            raise ValueError("Phi needs a nonnegative numerator and exponent")
        if self.num > (1 << self.exp) or self.num == 0:
            raise ValueError(f"Phi {self.num}/2^{self.exp} is outside (0, 1]")

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def check(self, N: int, n: int | None = None, max_exp: int | None = None) -> None:
        """Raise if phi is outside ``[1/N, 1]`` or needs too many bits."""
        if self.value * N < 1:
            raise ValueError(f"phi = {self.value} is below 1/N = 1/{N}")
        if max_exp is None and n is not None:
            max_exp = default_exponent_bound(n)
        if max_exp is not None and self.exp > max_exp:
            raise ValueError(f"phi exponent {self.exp} exceeds bound {max_exp}")

    def root_float(self, n: int) -> float:
        """``phi**(1/n)`` as a float, rounded up so it never understates the bound."""
        import mpmath

        with mpmath.workdps(40):
            r = mpmath.root(mpmath.mpf(self.num) / mpmath.mpf(2) ** self.exp, n)
            x = float(r)
            if mpmath.mpf(x) < r:
                x = _next_up(x)
        return x

    def to_json(self) -> dict:
        return {"num": self.num, "exp": self.exp}


def _next_up(x: float) -> float:
    import math

    return math.nextafter(x, math.inf)


def default_exponent_bound(n: int) -> int:
    return n * n + 16


def phi_from_rho(rho: int, N: int, exponent: int | None = None) -> Phi:
    """Round ``rho / N`` up to the dyadic grid ``2**-exponent``.

    The default grid ``2**-ceil(log2 N)`` is exact whenever ``N`` is a power of two.
    """
    if not 1 <= rho <= N:
        raise ValueError(f"rho must lie in [1, N]; got rho={rho}, N={N}")
    if exponent is None:
        exponent = (N - 1).bit_length()
    num = -((-rho << exponent) // N)
    return Phi(num, exponent)


def _reduce(num: int, exp: int) -> Phi:
    while exp > 0 and num % 2 == 0:
        num //= 2
        exp -= 1
    return Phi(num, exp)


# ---------------------------------------------------------------------------
# helpers


def int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def check_bits(y: str, length: int) -> None:
    if len(y) != length or any(ch not in "01" for ch in y):
        raise EncodingError(f"expected a {length}-bit string, got {y!r}")


def uniform_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.getrandbits(UNIFORM_BITS), 1 << UNIFORM_BITS)


# ---------------------------------------------------------------------------
# coordinate distributions (the factors of a product family)


class CoordinateDist:
    """A distribution on ``{0, ..., 2**width - 1}`` with exact masses."""

    width: int

    def mass(self, v: int) -> Fraction:
        raise NotImplementedError

    def below(self, v: int) -> Fraction:
        """``Pr(X < v)``."""
        raise NotImplementedError

    def max_mass(self) -> tuple[int, Fraction]:
        raise NotImplementedError

    def support(self) -> list[int]:
        raise NotImplementedError

    def draw(self, rng: random.Random) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformWindow(CoordinateDist):
    """Uniform on ``{lo, ..., lo + 2**m - 1}`` inside ``W``-bit numbers."""

    lo: int
    m: int
    width: int

    def __post_init__(self):
        if self.lo < 0 or self.m < 0 or self.lo + (1 << self.m) > (1 << self.width):
            raise ValueError(f"window [{self.lo}, {self.lo}+2^{self.m}) does not fit {self.width} bits")

    @classmethod
    def centered(cls, center: int, m: int, width: int) -> "UniformWindow":
        size = 1 << m
        lo = min(max(center - size // 2, 0), (1 << width) - size)
        return cls(lo, m, width)

    def mass(self, v):
        return Fraction(1, 1 << self.m) if self.lo <= v < self.lo + (1 << self.m) else Fraction(0)

    def below(self, v):
        k = min(max(v - self.lo, 0), 1 << self.m)
        return Fraction(k, 1 << self.m)

    def max_mass(self):
        return self.lo, Fraction(1, 1 << self.m)

    def support(self):
        return list(range(self.lo, self.lo + (1 << self.m)))

    def draw(self, rng):
        return self.lo + (rng.getrandbits(UNIFORM_BITS) >> (UNIFORM_BITS - self.m)) if self.m else self.lo

    def to_json(self):
        return {"kind": "window", "lo": self.lo, "m": self.m}


@dataclass(frozen=True)
class TableCoordinate(CoordinateDist):
    """Explicit masses for a single coordinate."""

    masses: tuple[tuple[int, Fraction], ...]
    width: int
    _values: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _prefix: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        items = sorted((int(v), Fraction(p)) for v, p in self.masses)
        values = [v for v, _ in items]
        if len(set(values)) != len(values):
            raise ValueError("duplicate coordinate value")
        if any(not 0 <= v < (1 << self.width) for v in values):
            raise ValueError(f"coordinate value outside {self.width} bits")
        if any(p < 0 for _, p in items) or sum(p for _, p in items) != 1:
            raise ValueError("coordinate masses must be nonnegative and sum to 1")
        object.__setattr__(self, "masses", tuple(items))
        object.__setattr__(self, "_values", tuple(values))
        object.__setattr__(self, "_prefix", tuple(itertools.accumulate((p for _, p in items), initial=Fraction(0))))

    @classmethod
    def from_mapping(cls, masses: Mapping[int, Fraction], width: int) -> "TableCoordinate":
        return cls(tuple(masses.items()), width)

    def mass(self, v):
        i = bisect.bisect_left(self._values, v)
        if i < len(self._values) and self._values[i] == v:
            return self.masses[i][1]
        return Fraction(0)

    def below(self, v):
        return self._prefix[bisect.bisect_left(self._values, v)]

    def max_mass(self):
        v, p = max(self.masses, key=lambda item: item[1])
        return v, p

    def support(self):
        return [v for v, p in self.masses if p > 0]

    def draw(self, rng):
        u = uniform_fraction(rng)
        i = bisect.bisect_right(self._prefix, u) - 1
        while self.masses[i][1] == 0:
            i += 1
        return self._values[i]

    def to_json(self):
        return {"kind": "table", "masses": {str(v): str(p) for v, p in self.masses}}


def coordinate_from_json(obj: Mapping, width: int) -> CoordinateDist:
    kind = obj.get("kind")
    if kind == "window":
        if "lo" in obj:
            return UniformWindow(int(obj["lo"]), int(obj["m"]), width)
        return UniformWindow.centered(int(obj["center"]), int(obj["m"]), width)
    if kind == "table":
        return TableCoordinate(tuple((int(v), Fraction(p)) for v, p in obj["masses"].items()), width)
    raise ValueError(f"unknown coefficient kind {kind!r}")


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class MassReport:
    ok: bool
    worst_point: str
    worst_mass: Fraction
    rule: str


class Family:
    """Common interface of the built-in families."""

    n: int
    phi: Phi
    kind: str

    @property
    def length(self) -> int:
        """Bit length of every support string."""
        raise NotImplementedError

    @property
    def N(self) -> int:
        raise NotImplementedError

    def point_mass(self, y: str) -> Fraction:
        raise NotImplementedError

    def cumulative(self, y: str) -> Fraction:
        raise NotImplementedError

    def support(self) -> Iterator[str]:
        """Support strings in lexicographic order."""
        raise NotImplementedError

    def support_size(self) -> int:
        raise NotImplementedError

    def sample(self, seed: int) -> str:
        raise NotImplementedError

    def mass_bound_check(self) -> MassReport:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TableFamily(Family):
    """Explicit masses over fixed-length strings; ``N`` is the table size."""

    n: int
    bits: int
    masses: tuple[tuple[str, Fraction], ...]
    phi: Phi
    kind: str = field(default="ExplicitTable", init=False)
    _keys: tuple[str, ...] = field(init=False, repr=False, compare=False)
    _prefix: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        items = sorted((y, Fraction(p)) for y, p in self.masses)
        keys = [y for y, _ in items]
        for y in keys:
            check_bits(y, self.bits)
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate table entry")
        if any(p < 0 for _, p in items):
            raise ValueError("negative mass")
        if sum(p for _, p in items) != 1:
            raise ValueError("table masses must sum to exactly 1")
        object.__setattr__(self, "masses", tuple(items))
        object.__setattr__(self, "_keys", tuple(keys))
        object.__setattr__(self, "_prefix", tuple(itertools.accumulate((p for _, p in items), initial=Fraction(0))))

    @classmethod
    def from_mapping(cls, masses: Mapping[str, Fraction], phi: Phi | None = None, n: int | None = None) -> "TableFamily":
        keys = list(masses)
        bits = len(keys[0]) if keys else 0
        if phi is None:
            # tightest dyadic bound at or above the largest mass
            top = max(Fraction(p) for p in masses.values())
            exp = max(bits, top.denominator.bit_length())
            phi = _reduce(-((-top.numerator << exp) // top.denominator), exp)
        return cls(n if n is not None else max(bits, 1), bits, tuple(masses.items()), phi)

    @property
    def length(self):
        return self.bits

    @property
    def N(self):
        return len(self._keys)

    def point_mass(self, y):
        check_bits(y, self.bits)
        i = bisect.bisect_left(self._keys, y)
        if i < len(self._keys) and self._keys[i] == y:
            return self.masses[i][1]
        return Fraction(0)

    def cumulative(self, y):
        check_bits(y, self.bits)
        return self._prefix[bisect.bisect_right(self._keys, y)]

    def support(self):
        return (y for y, p in self.masses if p > 0)

    def support_size(self):
        return sum(1 for _, p in self.masses if p > 0)

    def sample(self, seed):
        u = uniform_fraction(random.Random(seed))
        i = bisect.bisect_right(self._prefix, u) - 1
        while self.masses[i][1] == 0:
            i += 1
        return self._keys[i]

    def mass_bound_check(self):
        worst, mass = max(self.masses, key=lambda item: item[1])
        return MassReport(mass <= self.phi.value, worst, mass, "global")

    def to_json(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "phi": self.phi.to_json(),
            "masses": {y: str(p) for y, p in self.masses},
        }


class ProductFamily(Family):
    """Independent fixed-width coordinates concatenated big-endian.

    ``cumulative`` uses the digit-by-digit identity
    ``F(y) = sum_i prod_{j<i} D_j(y_j) * Pr(X_i < y_i) + prod_j D_j(y_j)``.
    """

    coords: tuple[CoordinateDist, ...]
    width: int

    @property
    def length(self):
        return self.width * len(self.coords)

    @property
    def N(self):
        return 1 << self.length

    def split(self, y: str) -> list[int]:
        check_bits(y, self.length)
        w = self.width
        return [int(y[i * w:(i + 1) * w], 2) for i in range(len(self.coords))]

    def join(self, values: Sequence[int]) -> str:
        return "".join(int_to_bits(v, self.width) for v in values)

    def point_mass(self, y):
        p = Fraction(1)
        for dist, v in zip(self.coords, self.split(y)):
            p *= dist.mass(v)
            if not p:
                break
        return p

    def cumulative(self, y):
        total = Fraction(0)
        prefix = Fraction(1)
        for dist, v in zip(self.coords, self.split(y)):
            total += prefix * dist.below(v)
            prefix *= dist.mass(v)
            if not prefix:
                return total
        return total + prefix

    def support(self):
        for values in itertools.product(*(d.support() for d in self.coords)):
            yield self.join(values)

    def support_size(self):
        size = 1
        for d in self.coords:
            size *= len(d.support())
        return size

    def sample_values(self, seed: int) -> list[int]:
        rng = random.Random(seed)
        return [d.draw(rng) for d in self.coords]

    def sample(self, seed):
        return self.join(self.sample_values(seed))


@dataclass(frozen=True, eq=False)
class CoefficientFamily(ProductFamily):
    """``n`` independent ``W``-bit coefficients; ``N = 2**(n*W)``.

    The density bound applies per coefficient: ``max_mass**n <= phi``.
    """

    coords: tuple[CoordinateDist, ...]
    width: int
    phi: Phi
    kind: str = field(default="CoefficientProduct", init=False)

    def __post_init__(self):
        if any(d.width != self.width for d in self.coords):
            raise ValueError("all coefficients must share the bit width")

    @property
    def n(self):
        return len(self.coords)

    @property
    def W(self):
        return self.width

    def mass_bound_check(self):
        worst_i, (worst_v, worst_p) = max(enumerate(d.max_mass() for d in self.coords), key=lambda item: item[1][1])
        ok = worst_p ** self.n <= self.phi.value
        point = f"w{worst_i + 1}={worst_v}"
        return MassReport(ok, point, worst_p, "per-coefficient")

    def to_json(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "W": self.width,
            "phi": self.phi.to_json(),
            "coefficients": [d.to_json() for d in self.coords],
        }


def window_exponent(phi: Phi, n: int, W: int) -> int:
    """Smallest ``m <= W`` with ``2**(-m*n) <= phi``."""
    for m in range(W + 1):
        if Fraction(1, 1 << (m * n)) <= phi.value:
            return m
    raise ValueError(f"phi = {phi.value} is below the average case 2^-{n * W}")


def coefficient_family(n: int, W: int, rho: int = 1, centers: Sequence[int] | None = None,
                       phi: Phi | None = None) -> CoefficientFamily:
    """Narrowest uniform windows admitted by ``phi = rho / 2**(n*W)``.

    ``centers`` is the adversary's choice (default: the middle of the range).
    """
    if phi is None:
        phi = phi_from_rho(rho, 1 << (n * W))
    m = window_exponent(phi, n, W)
    if centers is None:
        centers = [1 << (W - 1)] * n
    if len(centers) != n:
        raise ValueError("need one center per coefficient")
    coords = tuple(UniformWindow.centered(c, m, W) for c in centers)
    return CoefficientFamily(coords, W, phi)


def family_from_json(obj: Mapping) -> Family:
    """Build a family from its JSON description (see README for the schema)."""
    kind = obj.get("kind")
    phi = Phi(int(obj["phi"]["num"]), int(obj["phi"]["exp"])) if "phi" in obj else None
    if kind == "ExplicitTable":
        masses = {y: Fraction(p) for y, p in obj["masses"].items()}
        if phi is None and "rho" in obj:
            phi = phi_from_rho(int(obj["rho"]), len(masses))
        return TableFamily.from_mapping(masses, phi, obj.get("n"))
    if kind == "CoefficientProduct":
        n, W = int(obj["n"]), int(obj["W"])
        if "coefficients" not in obj:
            return coefficient_family(n, W, int(obj.get("rho", 1)), obj.get("centers"), phi)
        if phi is None:
            phi = phi_from_rho(int(obj.get("rho", 1)), 1 << (n * W))
        coords = tuple(coordinate_from_json(c, W) for c in obj["coefficients"])
        if len(coords) != n:
            raise ValueError(f"expected {n} coefficients, got {len(coords)}")
        return CoefficientFamily(coords, W, phi)
    if kind == "GraphFlip":
        from .graphs import PerturbedGraphModel

        n = int(obj["n"])
        base = obj.get("base", "0" * (n * (n - 1) // 2))
        if "eps" in obj:
            model = PerturbedGraphModel(n, base, Fraction(obj["eps"]), phi, bool(obj.get("additive", False)))
        else:
            if phi is None:
                phi = phi_from_rho(int(obj.get("rho", 1)), 1 << (n * (n - 1) // 2))
            model = PerturbedGraphModel.from_phi(n, base, phi, bool(obj.get("additive", False)))
        return model.family()
    raise ValueError(f"unknown family kind {kind!r}")


# Module-level aliases mirroring the operation names.

def point_mass(fam: Family, y: str) -> Fraction:
    return fam.point_mass(y)


def cumulative(fam: Family, y: str) -> Fraction:
    return fam.cumulative(y)


def sample(fam: Family, seed: int) -> str:
    return fam.sample(seed)


def mass_bound_check(fam: Family) -> MassReport:
    return fam.mass_bound_check()


def exhaustive_cumulative(fam: Family, y: str) -> Fraction:
    """Reference cumulative by summing over the whole support."""
    return sum((fam.point_mass(z) for z in fam.support() if z <= y), Fraction(0))
