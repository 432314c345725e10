import pytest

from voaforge.brst import (FeiginComplex, NotAModule, NotInvariant, ObstructionNonzero, UnboundedBlock,
                           affine_matter, ce_build, centralizer_map_check, contract_left,
                           grading_bound_check, heisenberg_matter, induced_virasoro_check, invariants_dim,
                           jq_relations_check, q0_square, semiinf_cohomology, wedge_left)
from voaforge.dsl import evaluate
from voaforge.fock import FockSpace
from voaforge.liealg import BilinearForm, LieAlgebra, Representation, abelian, normalized_killing, sl2
from voaforge.voa import sugawara

# -- exterior algebra ----------------------------------------------------------


@pytest.mark.parametrize("mask", range(8))
@pytest.mark.parametrize("a", range(3))
def test_wedge_then_contract(mask, a):
    # iota_a (phi^a ^ w) = w when phi^a does not occur in w
    w = wedge_left(a, mask)
    if mask >> a & 1:
        assert w is None
        return
    sign, m2 = w
    back = contract_left(a, m2)
    assert back is not None
    assert back[1] == mask and back[0] * sign == 1


# -- Chevalley-Eilenberg -------------------------------------------------------


def test_sl2_trivial_coefficients():
    g = sl2()
    assert ce_build(g, Representation.trivial(g)).cohomology() == [1, 0, 0, 1]


def test_sl2_adjoint_coefficients_vanish():
    g = sl2()
    assert ce_build(g, Representation.adjoint(g)).cohomology() == [0, 0, 0, 0]


def test_abelian_cohomology_is_exterior_algebra():
    g = abelian(2)
    assert ce_build(g, Representation.trivial(g)).cohomology() == [1, 2, 1]


def test_invariants_of_adjoint():
    g = sl2()
    assert invariants_dim(g, Representation.adjoint(g)) == 0
    assert invariants_dim(g, Representation.trivial(g)) == 1


def test_ce_rejects_non_module():
    g = sl2()
    with pytest.raises(NotAModule):
        ce_build(g, [[[1, 0], [0, 1]]] * 3)


def test_jq_relations_hold_for_sl2():
    assert jq_relations_check(sl2()).passed


def test_jq_relations_detect_jacobi_failure():
    bad = LieAlgebra(3, {(1, 0): {0: 3}, (1, 2): {2: -2}, (0, 2): {1: 1}}, check=False)
    r = jq_relations_check(bad)
    assert not r.check("[q,q]=0").passed
    assert r.check("[q,q]=0").witness


# -- the obstruction -----------------------------------------------------------


@pytest.mark.parametrize("k,zero", [(-4, True), (0, False), (1, False)])
def test_q0_square_sl2(k, zero):
    g = sl2()
    res = q0_square(g, lam=normalized_killing(g).scaled(k))
    assert res.matches
    assert res.is_zero == zero


@pytest.mark.parametrize("level,zero", [(0, True), (1, False)])
def test_q0_square_abelian(level, zero):
    res = q0_square(abelian(1), lam=BilinearForm([[level]]))
    assert res.matches
    assert res.is_zero == zero


def test_cohomology_needs_square_zero():
    g = sl2()
    with pytest.raises(ObstructionNonzero):
        semiinf_cohomology(g, affine_matter(g, 1), 1)


# -- semi-infinite cohomology --------------------------------------------------


@pytest.fixture(scope="module")
def critical():
    g = sl2()
    return g, FeiginComplex(g, affine_matter(g, -4))


def test_weight_zero_block_is_ce(critical):
    g, cx = critical
    rep = semiinf_cohomology(g, cx, 0)
    assert [rep.dim_H(0, j) for j in range(4)] == ce_build(g, Representation.trivial(g)).cohomology()
    assert rep.dim_H(0, 0) == rep.invariants == 1


def test_euler_characteristic_of_chains_and_cohomology(critical):
    g, cx = critical
    rep = semiinf_cohomology(g, cx, 2)
    for w in range(3):
        assert rep.euler[w] == rep.chain_euler[w]


@pytest.mark.parametrize("seed", [1, 7])
def test_ranks_independent_of_basis_order(critical, seed):
    g, cx = critical
    assert semiinf_cohomology(g, cx, 1, shuffle_seed=seed).rows == semiinf_cohomology(g, cx, 1).rows


def test_block_budget(critical):
    g, cx = critical
    with pytest.raises(UnboundedBlock):
        semiinf_cohomology(g, cx, 2, budget=10)


def test_heisenberg_differential_vanishes():
    # abelian g acting trivially: Q_0 = 0 and every chain survives
    g = abelian(1)
    rep = semiinf_cohomology(g, heisenberg_matter(), 2)
    assert rep.rows
    assert all(r["dim_H"] == r["dim_chain"] for r in rep.rows)


@pytest.mark.parametrize("k", range(3))
def test_ghost_numbers_are_bounded(critical, k):
    assert grading_bound_check(critical[1], k)


# -- induced structures --------------------------------------------------------


def test_induced_central_charge_heisenberg():
    cx = FeiginComplex(abelian(1), heisenberg_matter())
    r = induced_virasoro_check(cx, sugawara(abelian(1), lam=BilinearForm([[1]])), 1)
    assert r.passed
    assert r.values["central_charge"] == -1


def test_induced_central_charge_critical_sl2(critical):
    g, cx = critical
    r = induced_virasoro_check(cx, sugawara(g, -4), 6, N=2, test_weight=1)
    assert r.passed
    assert r.values["central_charge"] == 0


def test_centralizer_map(critical):
    g, cx = critical
    sp = FockSpace(affine=(g, normalized_killing(g).scaled(-4)))
    assert centralizer_map_check(cx, sp.vacuum()).passed
    with pytest.raises(NotInvariant) as info:
        centralizer_map_check(cx, sp.state([("J", 1, -1)]))
    assert info.value.witness == ("e", 0)



def test_q0_square_at_level_zero_by_hand():
    # expanding the displayed operator at n = +-1: on del_{1,-1}|0> it gives
    # lambda_ad(t_1, t_b) phi^b_{-1}|0> = 4 phi^3_{-1}|0>, and phi^1_{-1}|0> is killed
    g = sl2()
    res = q0_square(g, lam=BilinearForm.zero(3))
    sp = res.complex.space
    assert res.operator(evaluate("del[1,-1] |0>", sp)) == evaluate("4 phi[3,-1] |0>", sp)
    assert res.operator(evaluate("phi[1,-1] |0>", sp)).is_zero()
