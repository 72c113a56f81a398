from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from smoothedp.dist import (
    CoefficientFamily,
    EncodingError,
    Phi,
    TableCoordinate,
    TableFamily,
    UniformWindow,
    coefficient_family,
    exhaustive_cumulative,
    family_from_json,
    int_to_bits,
    phi_from_rho,
    window_exponent,
)
from smoothedp.graphs import PerturbedGraphModel


def uniform_table(strings):
    return TableFamily.from_mapping({s: Fraction(1, len(strings)) for s in strings})


UNIFORM4 = uniform_table(["00", "01", "10", "11"])


# --- point_mass -------------------------------------------------------------

def test_point_mass_uniform_table():
    assert UNIFORM4.point_mass("10") == Fraction(1, 4)


def test_point_mass_product_of_uniforms():
    fam = coefficient_family(2, 2, rho=1)
    assert fam.point_mass(fam.join([3, 1])) == Fraction(1, 16)


def test_point_mass_outside_support():
    fam = uniform_table(["000", "011"])
    assert fam.point_mass("111") == 0
    narrow = CoefficientFamily((UniformWindow(4, 1, 3), UniformWindow(0, 1, 3)), 3, Phi(1, 0))
    assert narrow.point_mass(narrow.join([0, 0])) == 0


def test_point_mass_rejects_wrong_length():
    with pytest.raises(EncodingError):
        UNIFORM4.point_mass("101")
    with pytest.raises(EncodingError):
        coefficient_family(2, 2).point_mass("0a01")


# --- cumulative -------------------------------------------------------------

def test_cumulative_uniform_table():
    assert UNIFORM4.cumulative("01") == Fraction(1, 2)
    assert UNIFORM4.cumulative("11") == 1


def test_cumulative_product_matches_enumeration():
    fam = coefficient_family(2, 2, rho=1)
    y = fam.join([1, 2])
    # oracle: 4 points with w1 = 0, then (1,0), (1,1), (1,2)
    assert exhaustive_cumulative(fam, y) == Fraction(7, 16)
    assert fam.cumulative(y) == Fraction(7, 16)


def test_cumulative_of_maximum_is_one():
    fam = coefficient_family(3, 3, rho=5, centers=[1, 6, 3])
    top = max(fam.support())
    assert fam.cumulative(top) == 1


coord_tables = st.lists(st.integers(1, 9), min_size=1, max_size=4).flatmap(
    lambda weights: st.permutations(range(4)).map(
        lambda perm: TableCoordinate(
            tuple((perm[i], Fraction(w, sum(weights))) for i, w in enumerate(weights)), 2)))


@settings(max_examples=40, deadline=None)
@given(st.lists(coord_tables, min_size=1, max_size=3))
def test_product_cumulative_invariants(coords):
    fam = CoefficientFamily(tuple(coords), 2, Phi(1, 0))
    previous = Fraction(0)
    for value in range(1 << fam.length):
        y = int_to_bits(value, fam.length)
        f = fam.cumulative(y)
        assert f >= previous
        assert f - previous == fam.point_mass(y)
        assert f == exhaustive_cumulative(fam, y)
        previous = f
    assert previous == 1


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(0, 31), st.integers(1, 20), min_size=1, max_size=12))
def test_table_cumulative_invariants(weights):
    total = sum(weights.values())
    fam = TableFamily.from_mapping({int_to_bits(k, 5): Fraction(v, total) for k, v in weights.items()})
    assert sum(fam.point_mass(y) for y in fam.support()) == 1
    previous = Fraction(0)
    for value in range(32):
        y = int_to_bits(value, 5)
        f = fam.cumulative(y)
        assert f - previous == fam.point_mass(y)
        assert 0 <= fam.point_mass(y) <= fam.phi.value
        previous = f


def test_graph_family_cumulative_matches_enumeration():
    model = PerturbedGraphModel.from_eps(4, "101100", Fraction(1, 8))
    fam = model.family()
    assert sum(fam.point_mass(y) for y in fam.support()) == 1
    for value in range(0, 64, 7):
        y = int_to_bits(value, 6)
        assert fam.cumulative(y) == exhaustive_cumulative(fam, y)


# --- sample -----------------------------------------------------------------

def test_sample_is_deterministic():
    fam = coefficient_family(4, 5, rho=3)
    assert fam.sample(12345) == fam.sample(12345)
    assert UNIFORM4.sample(99) == UNIFORM4.sample(99)


def test_sample_degenerate():
    fam = TableFamily.from_mapping({"0110": Fraction(1)})
    assert fam.phi.value == 1
    assert {fam.sample(s) for s in range(200)} == {"0110"}


def test_sample_uniform_frequencies():
    counts = Counter(UNIFORM4.sample(s) for s in range(100_000))
    for y in ("00", "01", "10", "11"):
        assert abs(counts[y] / 100_000 - 0.25) <= 0.01


@pytest.mark.parametrize("fam", [
    TableFamily.from_mapping({int_to_bits(i, 8): Fraction(i + 1, 136) for i in range(16)}),
    CoefficientFamily((TableCoordinate(((0, Fraction(1, 3)), (2, Fraction(1, 6)), (3, Fraction(1, 2))), 2),
                       UniformWindow(1, 1, 2)), 2, Phi(1, 0)),
])
def test_sample_chi_square(fam):
    trials = 100_000
    counts = Counter(fam.sample(s) for s in range(trials))
    support = list(fam.support())
    observed = [counts[y] for y in support]
    expected = [float(fam.point_mass(y)) * trials for y in support]
    assert sum(observed) == trials
    assert stats.chisquare(observed, expected).pvalue > 1e-3


# --- phi --------------------------------------------------------------------

def test_phi_from_rho_average_case():
    assert phi_from_rho(1, 2**16).value == Fraction(1, 2**16)


def test_phi_from_rho_worst_case():
    assert phi_from_rho(2**16, 2**16).value == 1


def test_phi_from_rho_rounds_up_on_grid():
    phi = phi_from_rho(3, 2**10, exponent=12)
    assert (phi.num, phi.exp) == (12, 12)
    coarse = phi_from_rho(3, 1000, exponent=8)
    assert coarse.value >= Fraction(3, 1000)
    assert coarse.value - Fraction(1, 256) < Fraction(3, 1000)


@pytest.mark.parametrize("rho", [0, 17])
def test_phi_from_rho_range(rho):
    with pytest.raises(ValueError):
        phi_from_rho(rho, 16)


def test_phi_check_bounds():
    Phi(1, 4).check(16, n=2)
    with pytest.raises(ValueError):
        Phi(1, 5).check(16)
    with pytest.raises(ValueError):
        Phi(1, 30).check(2**40, n=2)  # exponent above n^2 + 16


def test_phi_root_rounds_up():
    phi = Phi(1, 64)
    assert phi.root_float(8) == 2.0 ** -8
    r = Phi(3, 10).root_float(3)
    assert Fraction(r) ** 3 >= Fraction(3, 1024)


# --- mass_bound_check -------------------------------------------------------

def test_mass_bound_equality_allowed():
    fam = TableFamily.from_mapping({"0": Fraction(1, 2), "1": Fraction(1, 2)}, Phi(1, 1))
    assert fam.mass_bound_check().ok


def test_mass_bound_violation_witness():
    fam = TableFamily.from_mapping({"0": Fraction(3, 4), "1": Fraction(1, 4)}, Phi(1, 1))
    report = fam.mass_bound_check()
    assert not report.ok
    assert report.worst_point == "0"
    assert report.worst_mass == Fraction(3, 4)


def test_mass_bound_per_coefficient():
    fam = CoefficientFamily((UniformWindow(0, 2, 3), UniformWindow(4, 2, 3)), 3, Phi(1, 4))
    assert fam.mass_bound_check().ok
    tight = CoefficientFamily((UniformWindow(0, 2, 3), UniformWindow(4, 1, 3)), 3, Phi(1, 4))
    report = tight.mass_bound_check()
    assert not report.ok and report.worst_point == "w2=4"


@pytest.mark.parametrize("n,W,rho", [(2, 3, 1), (3, 4, 27), (6, 6, 216), (8, 8, 64), (10, 10, 1000)])
def test_coefficient_family_meets_density_bound(n, W, rho):
    fam = coefficient_family(n, W, rho)
    assert fam.mass_bound_check().ok
    m = window_exponent(fam.phi, n, W)
    # the window is the narrowest admissible one
    assert m == 0 or Fraction(1, 1 << ((m - 1) * n)) > fam.phi.value


# --- json -------------------------------------------------------------------

def test_family_json_roundtrip():
    fams = [
        UNIFORM4,
        coefficient_family(3, 4, rho=9, centers=[2, 8, 14]),
        CoefficientFamily((TableCoordinate(((0, Fraction(1, 2)), (3, Fraction(1, 2))), 2),), 2, Phi(1, 1)),
        PerturbedGraphModel.from_phi(4, "110010", Phi(1, 3)).family(),
    ]
    for fam in fams:
        again = family_from_json(fam.to_json())
        assert list(again.support()) == list(fam.support())
        assert all(again.point_mass(y) == fam.point_mass(y) for y in fam.support())
        assert again.phi == fam.phi


def test_family_json_rho_shortcut():
    fam = family_from_json({"kind": "CoefficientProduct", "n": 2, "W": 3, "rho": 4})
    assert fam.phi.value == Fraction(4, 64)
    assert fam.mass_bound_check().ok
