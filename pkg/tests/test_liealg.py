from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from voaforge.liealg import (BilinearForm, DimensionMismatch, JacobiViolation, LieAlgebra, NotSimple,
                             Representation, abelian, dual_coxeter, from_json, get_algebra,
                             invariance_check, killing_form, mutate_structure_constant,
                             normalized_killing, sl2, sl2_fundamental, so, so_standard, trace_form)

REGISTRY = ["abelian1", "abelian3", "sl2", "so3", "so4", "so5", "so6"]


@pytest.mark.parametrize("name", REGISTRY)
def test_registry_satisfies_jacobi(name):
    g = get_algebra(name)
    assert g.jacobi_violation() is None


def test_sl2_killing_form_from_explicit_ad_matrices():
    # ad matrices written out by hand in the basis (e, h, f)
    ad_e = sympy.Matrix([[0, -2, 0], [0, 0, 1], [0, 0, 0]])
    ad_h = sympy.Matrix([[2, 0, 0], [0, 0, 0], [0, 0, -2]])
    ad_f = sympy.Matrix([[0, 0, 0], [-1, 0, 0], [0, 2, 0]])
    ads = [ad_e, ad_h, ad_f]
    expected = [[(ads[a] * ads[b]).trace() for b in range(3)] for a in range(3)]
    kf = killing_form(sl2())
    assert [[int(x) for x in row] for row in kf.matrix] == expected
    assert [sympy.Matrix(m) for m in sl2().ad_matrix(0)] == [sympy.Matrix(r) for r in ad_e.tolist()]


def test_normalized_killing_sl2():
    lam0 = normalized_killing(sl2())
    assert lam0(1, 1) == 2
    assert lam0(0, 2) == lam0(2, 0) == 1
    assert lam0(0, 0) == 0


@pytest.mark.parametrize("n,h", [(3, 2), (4, 2), (5, 3), (6, 4)])
def test_dual_coxeter_so(n, h):
    assert dual_coxeter(so(n)) == h


@pytest.mark.parametrize("n", [4, 5, 6])
def test_normalized_killing_is_half_vector_trace(n):
    g = so(n)
    assert normalized_killing(g) == trace_form(g, so_standard(n, g)).scaled(Fraction(1, 2))


def test_so3_normalized_through_sl2():
    # so3 is sl2 with the vector module as adjoint
    g = so(3)
    assert normalized_killing(g) == trace_form(g, so_standard(3, g)).scaled(Fraction(1, 4))


def test_abelian_has_no_normalized_form():
    with pytest.raises(NotSimple):
        normalized_killing(abelian(2))
    assert killing_form(abelian(2)).is_zero()


@pytest.mark.parametrize("name", ["sl2", "so4", "so5"])
def test_killing_form_invariant(name):
    g = get_algebra(name)
    ok, witness = invariance_check(g, killing_form(g))
    assert ok and witness is None


def test_invariance_witness():
    g = sl2()
    ok, witness = invariance_check(g, BilinearForm([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    assert not ok
    assert witness is not None


def test_jacobi_checked_at_construction():
    with pytest.raises(JacobiViolation):
        LieAlgebra(3, {(1, 0): {0: 3}, (1, 2): {2: -2}, (0, 2): {1: 1}})


def test_mutation_changes_only_one_constant():
    g = sl2()
    m = mutate_structure_constant(g, 0, 2, 1, delta=2)
    assert m.structure_constant(1, 0, 2) == 3
    assert m.structure_constant(1, 2, 0) == -3
    assert m.structure_constant(0, 1, 0) == g.structure_constant(0, 1, 0)


def test_representations_and_trace_forms():
    g = sl2()
    fund = sl2_fundamental(g)
    assert fund.violation() is None
    assert trace_form(g, fund) == normalized_killing(g)
    assert trace_form(g, Representation.adjoint(g)) == killing_form(g)
    with pytest.raises(ValueError):
        Representation(g, [[[1, 0], [0, 0]], [[1, 0], [0, -1]], [[0, 0], [1, 0]]])


@pytest.mark.parametrize("name", REGISTRY)
def test_json_round_trip(name):
    g = get_algebra(name)
    h = from_json(g.to_json())
    assert h.dim == g.dim
    assert all(h.bracket_basis(a, b) == g.bracket_basis(a, b) for a in range(g.dim) for b in range(g.dim))


@given(st.integers(-6, 6), st.integers(1, 5))
def test_scaled_forms_add(p, q):
    lam0 = normalized_killing(sl2())
    k = Fraction(p, q)
    assert lam0.scaled(k) + lam0.scaled(1 - k) == lam0
    assert (lam0.scaled(k) - lam0.scaled(k)).is_zero()


def test_form_inverse():
    lam0 = normalized_killing(sl2())
    inv = lam0.inverse()
    prod = [[sum(lam0(i, k) * inv[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert prod == [[int(i == j) for j in range(3)] for i in range(3)]


def test_dimension_mismatch_in_fock():
    from voaforge.fock import FockSpace
    with pytest.raises(DimensionMismatch):
        FockSpace(affine=(sl2(), BilinearForm([[1]])))
