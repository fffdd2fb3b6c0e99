from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from plocal.coeff import (FgModule, ModuleMap, PLocalScalar, Subquotient, canonical_module,
                          cyclic, determinant, direct_sum, is_unit, map_homology, matmul,
                          smith_normal_form, tensor, tor, valuation)
from plocal.errors import MalformedMapError, PreconditionError

from oracles import integer_invariant_factors, vp

PRIMES = (2, 3, 5, 7)


# ---------------------------------------------------------------------------
# scalars


def test_scalar_canonicalizes_and_rejects_nonlocal():
    x = PLocalScalar(6, 4, 3)
    assert (x.numerator, x.denominator) == (3, 2)
    assert x.valuation == 1
    with pytest.raises(PreconditionError):
        PLocalScalar(1, 3, 3)


def test_scalar_arithmetic_and_inverse():
    a, b = PLocalScalar(2, 5, 3), PLocalScalar(1, 2, 3)
    assert (a + b).as_fraction() == Fraction(9, 10)
    assert (a * b).as_fraction() == Fraction(1, 5)
    assert (a - 1).as_fraction() == Fraction(-3, 5)
    assert a.inverse().as_fraction() == Fraction(5, 2)
    with pytest.raises(PreconditionError):
        PLocalScalar(3, 1, 3).inverse()


def test_valuation_of_zero_is_infinite():
    assert valuation(0, 5) == float("inf")
    assert valuation(Fraction(50, 7), 5) == 2
    assert is_unit(Fraction(2, 7), 5) and not is_unit(10, 5)


def test_large_exponents_stay_exact():
    x = PLocalScalar(13 ** 6, 1, 13)
    assert x.valuation == 6
    assert (x * PLocalScalar(1, 2, 13)).as_fraction() == Fraction(13 ** 6, 2)


# ---------------------------------------------------------------------------
# Smith normal form


def _check_snf(M, p):
    U, D, V = smith_normal_form(M, p)
    assert matmul(matmul(U, M), V) == D
    assert is_unit(determinant(U), p) and is_unit(determinant(V), p)
    diag = []
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0
            elif x != 0:
                assert x == Fraction(p) ** valuation(x, p)
                diag.append(int(valuation(x, p)))
    assert diag == sorted(diag)
    return diag


def test_snf_examples():
    assert _check_snf([[0, 3], [3, 0]], 3) == [1, 1]
    assert _check_snf([[2, 4], [6, 8]], 3) == [0, 0]
    assert _check_snf([[2, 4], [6, 8]], 2) == [1, 2]


def test_snf_zero_and_empty_matrices():
    assert _check_snf([[0, 0], [0, 0]], 5) == []
    U, D, V = smith_normal_form([], 5)
    assert D == []


@st.composite
def integer_matrices(draw):
    p = draw(st.sampled_from(PRIMES))
    rows = draw(st.integers(1, 6))
    cols = draw(st.integers(1, 6))
    bound = p ** 3
    M = [[draw(st.integers(-bound, bound)) for _ in range(cols)] for _ in range(rows)]
    return p, M


@settings(max_examples=1000, deadline=None)
@given(integer_matrices())
def test_snf_matches_integer_oracle(case):
    p, M = case
    diag = _check_snf(M, p)
    expected = sorted(vp(d, p) for d in integer_invariant_factors(M) if d)
    assert diag == expected


# ---------------------------------------------------------------------------
# modules


def test_canonical_module_orders_free_then_torsion():
    M = canonical_module(2, [[3, 3]], 3, ["a", "b"])
    assert str(M) == "Z_(3) + Z/3"
    assert M.orders == (0, 1)
    assert M == FgModule(3, 1, (1,))


def test_canonical_module_tracks_named_generators():
    M = canonical_module(3, [[0, 9, 0], [0, 0, 3]], 3, ["x", "y", "z"])
    assert str(M) == "Z_(3) + Z/3 + Z/3^2"
    assert M.generator_names[0] == "x"
    assert set(M.generator_names[1:]) == {"y", "z"}


def test_module_constructors():
    a, b = FgModule(5, 1, (1,)), FgModule(5, 0, (2,))
    assert direct_sum(a, b) == FgModule(5, 1, (1, 2))
    assert tensor(a, b) == FgModule(5, 0, (2, 1))
    assert tor(a, b) == FgModule(5, 0, (1,))
    assert cyclic(5, 0) == FgModule(5, 1)
    assert FgModule(5).is_zero() and str(FgModule(5)) == "0"


def test_map_homology_multiplication_by_p():
    Z = FgModule(5, 1)
    k, i, c = map_homology(ModuleMap(Z, Z, ((5,),)))
    assert (k, i, c) == (FgModule(5), FgModule(5, 1), FgModule(5, 0, (1,)))


def test_map_homology_projection_z25_to_z5():
    k, i, c = map_homology(ModuleMap(cyclic(5, 2), cyclic(5, 1), ((1,),)))
    assert (k, i, c) == (cyclic(5, 1), cyclic(5, 1), FgModule(5))


def test_map_homology_diagonal():
    Z2 = FgModule(5, 2)
    k, i, c = map_homology(ModuleMap(Z2, Z2, ((1, 0), (0, 5))))
    assert (k, i, c) == (FgModule(5), FgModule(5, 2), cyclic(5, 1))


def test_map_homology_zero_module():
    k, i, c = map_homology(ModuleMap(FgModule(3), FgModule(3, 1), ()))
    assert k.is_zero() and i.is_zero() and c == FgModule(3, 1)


def test_malformed_map_rejected():
    with pytest.raises(MalformedMapError):
        ModuleMap(cyclic(3, 1), FgModule(3, 1), ((1,),)).validate()
    with pytest.raises(MalformedMapError):
        ModuleMap(FgModule(3, 2), FgModule(3, 1), ((1,),))


def test_subquotient_coordinates():
    sq = Subquotient([(1, 0), (0, 1)], [(0, 3)], 2, 3, ["a", "b"])
    assert sq.module() == FgModule(3, 1, (1,))
    assert sq.is_boundary((0, 6)) and not sq.is_boundary((0, 1))
    assert sq.contains((2, 5))
