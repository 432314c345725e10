import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from voaforge.exact import (GaussRational, SparseMatrix, SparseVector, format_scalar, gauss,
                            kernel_basis, nullity, parse_rational, parse_scalar, rank)

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10 ** 6)
gaussians = st.builds(gauss, rationals, rationals)


def _sympy(z):
    if isinstance(z, GaussRational):
        return sympy.Rational(z.re) + sympy.I * sympy.Rational(z.im)
    return sympy.Rational(Fraction(z))


@given(gaussians, gaussians, gaussians)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    if x != 0:
        assert (y / x) * x == y


@given(gaussians, gaussians)
def test_arithmetic_matches_sympy(x, y):
    assert sympy.simplify(_sympy(x * y) - _sympy(x) * _sympy(y)) == 0
    assert sympy.simplify(_sympy(x - y) - (_sympy(x) - _sympy(y))) == 0


def test_real_values_collapse():
    assert gauss(3, 0) == 3
    assert type(gauss(3, 0)) is int
    assert type(gauss(Fraction(1, 2), 0)) is Fraction
    i = gauss(0, 1)
    assert i * i == -1
    assert not isinstance(i * i, GaussRational)
    assert hash(gauss(2, 0)) == hash(Fraction(2))


@given(rationals)
def test_rational_round_trip(q):
    assert parse_rational(format_scalar(q)) == q


@given(gaussians)
def test_scalar_round_trip(z):
    assert parse_scalar(format_scalar(z)) == z


@pytest.mark.parametrize("text", ["0.5", "1e3", "abc", "1/0"])
def test_parse_rational_rejects(text):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(text)


def test_format_is_p_over_q():
    assert format_scalar(Fraction(4)) == "4/1"
    assert format_scalar(Fraction(-3, 6)) == "-1/2"
    assert format_scalar(gauss(1, -2)) == "1/1-2/1i"


def test_sparse_vector_drops_zeros():
    v = SparseVector({"a": 1, "b": 0})
    assert len(v) == 1
    assert (v - v).is_zero()
    assert SparseVector({"a": 2}) == v * 2


def _random_rows(rng, n, m, gaussian=False):
    rows = []
    for _ in range(n):
        row = []
        for _ in range(m):
            if rng.random() < 0.5:
                row.append(0)
            elif gaussian:
                row.append(gauss(rng.randint(-3, 3), rng.randint(-3, 3)))
            else:
                row.append(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        rows.append(row)
    return rows


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("gaussian", [False, True])
def test_rank_matches_sympy(seed, gaussian):
    rng = random.Random(seed)
    rows = _random_rows(rng, rng.randint(1, 7), rng.randint(1, 7), gaussian)
    expected = sympy.Matrix([[_sympy(x) for x in r] for r in rows]).rank(simplify=True)
    assert rank(rows) == expected


def test_rank_of_dependent_rows():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert rank(rows) == 2
    assert nullity(rows) == 1


@given(st.integers(0, 2 ** 16), st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_rank_invariant_under_shuffle(seed, n, m):
    rng = random.Random(seed)
    rows = _random_rows(rng, n, m)
    m0 = SparseMatrix.from_rows(rows)
    perm_r = list(range(n))
    perm_c = list(range(m))
    rng.shuffle(perm_r)
    rng.shuffle(perm_c)
    shuffled = [[rows[i][j] for j in perm_c] for i in perm_r]
    assert rank(m0) == rank(shuffled) == rank(m0.transpose())


@pytest.mark.parametrize("seed", range(8))
def test_kernel_vectors_are_killed(seed):
    rng = random.Random(100 + seed)
    rows = _random_rows(rng, rng.randint(1, 5), rng.randint(2, 7), gaussian=seed % 2 == 1)
    m = SparseMatrix.from_rows(rows)
    basis = kernel_basis(m)
    assert len(basis) == nullity(m)
    for v in basis:
        assert m.apply(v).is_zero()
        for x in v.entries.values():
            assert isinstance(x, (Fraction, GaussRational))
    # kernel vectors are independent
    if basis:
        assert rank([[v[j] for j in m.domain] for v in basis]) == len(basis)


def test_matrix_rejects_unknown_row_key():
    with pytest.raises(KeyError):
        SparseMatrix(["x"], ["y"], [SparseVector({"z": 1})])
