"""The twelve acceptance criteria, one test each, with exact equality.

A one-line PASS/FAIL summary per criterion is printed at the end of the run
(see conftest.py).
"""

from fractions import Fraction

import pytest

from voaforge.brst import (FeiginComplex, affine_matter, ce_build, heisenberg_matter, induced_virasoro_check,
                           q0_square, semiinf_cohomology)
from voaforge.liealg import BilinearForm, Representation, abelian, killing_form, mutate_structure_constant, \
    normalized_killing, sl2, so, so_matrix
from voaforge.spinor import build_S, clifford_virasoro_check, level_check, scf_check, scf_operators
from voaforge.voa import (CriticalLevel, algebroid_axiom_check, betagamma_conformal, canonical_splitting,
                          cdo_algebroid, compare_algebroids, delta_twist, extract_algebroid, free_generate,
                          ghost_conformal, lie_algebroid, linear_delta, one_form_zero_mode_check,
                          random_form_vector_pairs, sugawara, two_form_delta, virasoro_check)

CRITERIA = {
    1: ("test_betagamma_central_charge", "beta-gamma central charge 2d", 30),
    2: ("test_ghost_central_charge", "ghost central charge -2 dim g", 30),
    3: ("test_sugawara_central_charge", "Sugawara 3k/(k+2) and the critical level", 60),
    4: ("test_clifford_virasoro", "Ramond Clifford Virasoro c = d'", 60),
    5: ("test_level_one_spinor_action", "level-one so action on S", 60),
    6: ("test_brst_obstruction", "Q_0^2 vanishes iff the level is critical", 30),
    7: ("test_weight_zero_cohomology", "weight-zero cohomology equals CE invariants", 60),
    8: ("test_induced_virasoro_shift", "induced central charge c - 2 dim g", 60),
    9: ("test_superconformal_suite", "superconformal relations and Dirac square", 300),
    10: ("test_pbw_and_characters", "PBW dimensions and spinor characters", 60),
    11: ("test_algebroid_axioms_and_twists", "algebroid axioms, mutations and twists", 60),
    12: ("test_one_form_zero_modes", "one-form zero modes", 30),
}


def _distinct_part_counts(colours, w_max):
    """Coefficients of prod_n (1 + q^n)^colours, choosing each coloured part at most once."""
    counts = [1] + [0] * w_max
    for n in range(1, w_max + 1):
        for _ in range(colours):
            for w in range(w_max, n - 1, -1):
                counts[w] += counts[w - n]
    return counts


def _coloured_partitions(colours, w_max):
    """Coefficients of prod_n (1 - q^n)^(-colours)."""
    counts = [1] + [0] * w_max
    for n in range(1, w_max + 1):
        for _ in range(colours):
            for w in range(n, w_max + 1):
                counts[w] += counts[w - n]
    return counts


def test_betagamma_central_charge():
    for d in (1, 2):
        r = virasoro_check(betagamma_conformal(d), c_claim=2 * d, mode_range=3, weight_range=4)
        assert r.passed
        assert r.values["central_charge"] == 2 * d


def test_ghost_central_charge():
    # weights <= 3 keep the three runs inside the time budget
    for n in (1, 2, 3):
        r = virasoro_check(ghost_conformal(n), c_claim=-2 * n, mode_range=3, weight_range=3)
        assert r.passed
        assert r.values["central_charge"] == -2 * n


def test_sugawara_central_charge():
    g = sl2()
    for k in (1, 2, Fraction(-1, 2)):
        c = Fraction(3 * k, k + 2)
        r = virasoro_check(sugawara(g, k), c_claim=c, mode_range=2, weight_range=2)
        assert r.passed
        assert r.values["central_charge"] == c
    with pytest.raises(CriticalLevel):
        sugawara(g, -2)


def test_clifford_virasoro():
    for dprime in (1, 2):
        r = clifford_virasoro_check(build_S(dprime), N=2, test_weight=2)
        assert r.passed
        assert r.values["central_charge"] == dprime
        assert r.check("primary").passed


def test_level_one_spinor_action():
    for dprime in (1, 2):
        d = 2 * dprime
        r = level_check(build_S(dprime), N=2)
        assert r.passed
        for a, b, n, central, _ in r.tables["central"]:
            A, B = so_matrix(d, a - 1), so_matrix(d, b - 1)
            half_trace = Fraction(sum(A[i][j] * B[j][i] for i in range(d) for j in range(d)), 2)
            assert central == n * half_trace
        assert len(r.tables["central"]) == so(d).dim ** 2 * 2


def test_brst_obstruction():
    cases = [(abelian(1), [BilinearForm([[x]]) for x in (0, 1, Fraction(-3, 2))]),
             (sl2(), [normalized_killing(sl2()).scaled(k) for k in (-4, 0, 1, Fraction(1, 2))])]
    for g, levels in cases:
        critical = BilinearForm.zero(g.dim) - killing_form(g)
        for lam in levels:
            res = q0_square(g, lam=lam, weight=2)
            assert res.matches
            assert res.is_zero == (lam == critical)


def test_weight_zero_cohomology():
    g = sl2()
    rep = semiinf_cohomology(g, affine_matter(g, -4), 1)
    assert rep.dim_H(0, 0) == ce_build(g, Representation.trivial(g)).cohomology()[0] == 1
    h = abelian(1)
    rep = semiinf_cohomology(h, heisenberg_matter(), 1)
    assert rep.dim_H(0, 0) == ce_build(h, Representation.trivial(h)).cohomology()[0] == 1


def test_induced_virasoro_shift():
    h = abelian(1)
    cx = FeiginComplex(h, heisenberg_matter())
    r = induced_virasoro_check(cx, sugawara(h, lam=BilinearForm([[1]])), 1, N=2)
    assert r.passed
    assert r.values["central_charge"] == -1 == 1 - 2 * h.dim


def test_superconformal_suite():
    for dprime in (1, 2):
        r = scf_check(scf_operators(dprime), N=2, W=2, degree=2)
        failed = [c.name for c in r.checks if not c.passed]
        assert not failed
        assert (r.values["c_L"], r.values["c_Lbar"], r.values["c_G"]) == (2 * dprime, 3 * dprime, 3 * dprime)
        assert r.check("Dirac^2=4(Lbar0-d'/8)").passed


def test_pbw_and_characters():
    g = sl2()
    V = free_generate(lie_algebroid(g, normalized_killing(g).scaled(2)), 6)
    assert V.dims() == _coloured_partitions(3, 6)
    for dprime in (1, 2):
        expected = [2 ** dprime * c for c in _distinct_part_counts(2 * dprime, 6)]
        assert build_S(dprime).dims(6) == expected


def test_algebroid_axioms_and_twists():
    g = sl2()
    lam0 = normalized_killing(g)
    assert algebroid_axiom_check(lie_algebroid(g, lam0)).ok
    for d in (1, 2):
        assert algebroid_axiom_check(cdo_algebroid(d, 3)).ok
    for a in range(3):
        for b in range(a + 1, 3):
            for c in range(3):
                res = algebroid_axiom_check(lie_algebroid(mutate_structure_constant(g, a, b, c), lam0, check=False))
                assert not res.ok and res.witness is not None
    v = cdo_algebroid(2, 3)
    for delta in (linear_delta(v, {0: {((0, 0), 0): Fraction(1)}, 1: {((1, 0), 1): Fraction(1)}}),
                  two_form_delta(v, {((1, 0), (0, 1)): Fraction(1)})):
        assert algebroid_axiom_check(delta_twist(v, delta)).ok
    for k in (1, Fraction(-1, 2), 3):
        u = lie_algebroid(g, lam0.scaled(k))
        V = free_generate(u, 2)
        assert compare_algebroids(u, extract_algebroid(V, canonical_splitting(V))) is None


def test_one_form_zero_modes():
    pairs = random_form_vector_pairs(seed=2024, count=20, max_vars=2, max_degree=3)
    assert len(pairs) == 20
    spaces = {d: free_generate(cdo_algebroid(d, 3), 1) for d in (1, 2)}
    for d, alpha, X in pairs:
        assert one_form_zero_mode_check(alpha, X, spaces[d])
