"""Injective, length-bounded compression driven by an exact cumulative distribution.

A support string ``y`` with mass ``D(y) < 2**-|y|`` is stored literally as
``0 y``.  Otherwise ``a`` is the longest bit prefix shared by every point of
the interval ``[F(pred y), F(pred y) + D(y))`` and the code is::

    1 | bin(|a|) | a | 0 * (ceil(log2 1/D(y)) - |a|)

with ``bin(|a|)`` written in a fixed field of ``c * ceil(log2 n)`` bits.
Because ``a`` is maximal the interval straddles the midpoint of the dyadic
cell named by ``a``, which makes codes of distinct strings differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dist import Family, int_to_bits

MAX_EXHAUSTIVE = 1 << 20


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class CodeWord:
    bits: str
    case_tag: str  # "Literal" or "Interval"

    def __len__(self):
        return len(self.bits)


def ceil_log2_inverse(p: Fraction) -> int:
    """``ceil(log2(1/p))`` for ``0 < p <= 1``, exactly."""
    k = 0
    while Fraction(1, 1 << k) > p:
        k += 1
    return k


def log_n_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def length_constant(fam: Family) -> int:
    """Smallest ``c`` whose ``c * ceil(log2 n)`` bits can hold any prefix length."""
    return max(1, math.ceil(fam.length.bit_length() / log_n_bits(fam.n)))


def field_width(fam: Family) -> int:
    return length_constant(fam) * log_n_bits(fam.n)


def common_prefix(lo: Fraction, hi: Fraction) -> str:
    """Longest ``a`` with ``[lo, hi)`` inside ``[0.a, 0.a + 2**-|a|)``."""
    if not 0 <= lo < hi <= 1:
        raise ValueError("need 0 <= lo < hi <= 1")
    bits = 0
    while True:
        k = bits + 1
        scale = 1 << k
        first = (lo * scale).__floor__()
        last = -((-hi * scale).__floor__()) - 1  # ceil(hi * 2^k) - 1
        if first != last:
            break
        bits = k
    if bits == 0:
        return ""
    return int_to_bits((lo * (1 << bits)).__floor__(), bits)


def compress(fam: Family, y: str) -> CodeWord:
    D = fam.point_mass(y)
    if D == 0:
        raise DomainError(f"{y!r} is outside the support")
    if D < Fraction(1, 1 << len(y)):
        return CodeWord("0" + y, "Literal")
    p = fam.cumulative(y) - D
    a = common_prefix(p, p + D)
    width = field_width(fam)
    pad = ceil_log2_inverse(D) - len(a)
    return CodeWord("1" + int_to_bits(len(a), width) + a + "0" * pad, "Interval")


def expected_length(fam: Family, y: str) -> int:
    D = fam.point_mass(y)
    if D < Fraction(1, 1 << len(y)):
        return 1 + len(y)
    return 1 + field_width(fam) + ceil_log2_inverse(D)


def decompress(fam: Family, code: CodeWord | str) -> str:
    """Invert :func:`compress` by binary search on the cumulative distribution."""
    bits = code.bits if isinstance(code, CodeWord) else code
    if bits[0] == "0":
        return bits[1:]
    width = field_width(fam)
    size = int(bits[1:1 + width], 2)
    a = bits[1 + width:1 + width + size]
    # midpoint of the cell named by a lies strictly inside y's interval
    mid = Fraction(2 * int(a or "0", 2) + 1, 1 << (size + 1))
    lo, hi = 0, (1 << fam.length) - 1
    while lo < hi:
        m = (lo + hi) // 2
        if fam.cumulative(int_to_bits(m, fam.length)) > mid:
            hi = m
        else:
            lo = m + 1
    return int_to_bits(lo, fam.length)


# ---------------------------------------------------------------------------
# exhaustive verification


def _check_size(fam: Family) -> None:
    size = fam.support_size()
    if size > MAX_EXHAUSTIVE:
        raise ValueError(f"support of {size} points exceeds the exhaustive limit 2^20")


@dataclass
class InjectivityReport:
    injective: bool
    checked: int
    collision: tuple[str, str] | None = None


def verify_injective(fam: Family) -> InjectivityReport:
    _check_size(fam)
    seen: dict[str, str] = {}
    for y in fam.support():
        c = compress(fam, y).bits
        if c in seen:
            return InjectivityReport(False, len(seen) + 1, (seen[c], y))
        seen[c] = y
    return InjectivityReport(True, len(seen))


@dataclass
class LengthReport:
    ok: bool
    checked: int
    violations: list = field(default_factory=list)
    worst_case: int = 0  # longest code seen


def verify_lengths(fam: Family) -> LengthReport:
    _check_size(fam)
    report = LengthReport(True, 0)
    for y in fam.support():
        code = compress(fam, y)
        want = expected_length(fam, y)
        report.checked += 1
        report.worst_case = max(report.worst_case, len(code))
        literal = fam.point_mass(y) < Fraction(1, 1 << len(y))
        if len(code) != want or (code.case_tag == "Literal") != literal:
            report.ok = False
            report.violations.append((y, len(code), want))
    return report


def verify_disjoint(fam: Family) -> bool:
    """Check that the support intervals ``[F(pred y), F(y))`` are pairwise disjoint."""
    _check_size(fam)
    intervals = sorted((fam.cumulative(y) - fam.point_mass(y), fam.cumulative(y)) for y in fam.support())
    return all(prev[1] <= cur[0] for prev, cur in zip(intervals, intervals[1:]))


def verify_roundtrip(fam: Family) -> list[str]:
    """Support strings that fail to decode back to themselves."""
    _check_size(fam)
    return [y for y in fam.support() if decompress(fam, compress(fam, y)) != y]


def codec_report(fam: Family) -> dict:
    inj = verify_injective(fam)
    lengths = verify_lengths(fam)
    return {
        "injective": inj.injective,
        "lengths_ok": lengths.ok,
        "worst_case": lengths.worst_case,
        "checked": inj.checked,
        "collision": list(inj.collision) if inj.collision else None,
        "disjoint": verify_disjoint(fam),
        "roundtrip_failures": len(verify_roundtrip(fam)),
    }
