"""Smoothed input families: exact point masses, cumulatives and seeded sampling.

A coefficient family perturbs each W-bit coefficient uniformly inside a window
just wide enough that no point mass exceeds phi.  Shrinking rho (phi = rho/N)
widens the windows until the input is fully random.
"""
from fractions import Fraction

from smoothedp.dist import TableFamily, coefficient_family, window_exponent

n, W = 3, 6
for rho in (1, 2**6, 2**12, 2**18):
    fam = coefficient_family(n, W, rho)
    m = window_exponent(fam.phi, n, W)
    print(f"rho={rho:>7}  phi={fam.phi.value}  window=2^{m} values per coefficient  "
          f"mass bound ok={fam.mass_bound_check().ok}")

fam = coefficient_family(n, W, rho=2**6)
y = fam.sample(seed=2024)
print("\nsample  ", y, "->", fam.split(y))
print("D(y)    ", fam.point_mass(y))
print("F(y)    ", fam.cumulative(y))

table = TableFamily.from_mapping({"0011": Fraction(1, 2), "0101": Fraction(1, 3), "1110": Fraction(1, 6)})
print("\ntable family phi =", table.phi.value, " F(0101) =", table.cumulative("0101"))
