"""Prefix-interval compression of smoothed inputs.

Light points (D(y) < 2^-|y|) are sent literally; heavy ones are named by the
longest binary prefix whose dyadic cell holds their cumulative interval.  The
code is injective and its length tracks log(1/D(y)).
"""
from fractions import Fraction

from smoothedp.codec import codec_report, compress, decompress, field_width
from smoothedp.dist import TableFamily, int_to_bits

masses = {int_to_bits(i, 8): Fraction(1, 2 ** (i + 1)) for i in range(11)}
masses[int_to_bits(11, 8)] = Fraction(1, 2**11)
fam = TableFamily.from_mapping(masses)

print(f"length field width: {field_width(fam)} bits\n")
print(f"{'y':>10} {'D(y)':>8} {'case':>9} {'code':>20}")
for y in sorted(fam.support()):
    code = compress(fam, y)
    assert decompress(fam, code) == y
    print(f"{y:>10} {str(fam.point_mass(y)):>8} {code.case_tag:>9} {code.bits:>20}")

print("\n", codec_report(fam))
