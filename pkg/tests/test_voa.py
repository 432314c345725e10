from fractions import Fraction

import pytest

from voaforge import dsl
from voaforge.fock import FockState
from voaforge.liealg import BilinearForm, abelian, mutate_structure_constant, normalized_killing, sl2
from voaforge.voa import (CriticalLevel, InvalidForm, NotWeightTwo, StateField, algebroid_axiom_check,
                          betagamma_conformal, canonical_splitting, cdo_algebroid, compare_algebroids,
                          delta_twist, extract_algebroid, free_generate, ghost_conformal, lie_algebroid, linear_delta,
                          morphism_check, one_form_zero_mode_check, random_form_vector_pairs, sugawara,
                          sugawara_central_charge, two_form_delta, virasoro_check, witness_text,
                          zero_algebroid)


def coloured_partitions(colours, w_max):
    """Coefficients of prod_n (1 - q^n)^(-colours), by adding one part size at a time."""
    counts = [1] + [0] * w_max
    for n in range(1, w_max + 1):
        for _ in range(colours):
            for w in range(n, w_max + 1):
                counts[w] += counts[w - n]
    return counts


def test_oracle_reproduces_known_counts():
    assert coloured_partitions(1, 6) == [1, 1, 2, 3, 5, 7, 11]
    assert coloured_partitions(3, 6) == [1, 3, 9, 22, 51, 108, 221]


# -- algebroids and axioms -----------------------------------------------------


@pytest.mark.parametrize("k", [1, Fraction(-1, 2), 3])
def test_lie_algebroid_passes(k):
    g = sl2()
    res = algebroid_axiom_check(lie_algebroid(g, normalized_killing(g).scaled(k)))
    assert res.ok and res.witness is None
    assert res.checked > 0


def test_commutative_affine_algebroid():
    v = lie_algebroid(abelian(1), BilinearForm.zero(1))
    assert algebroid_axiom_check(v).ok
    assert free_generate(v, 4).dims() == [1, 1, 2, 3, 5]


def test_zero_algebroid():
    assert algebroid_axiom_check(zero_algebroid()).ok


def test_non_invariant_form_rejected():
    with pytest.raises(InvalidForm):
        lie_algebroid(sl2(), BilinearForm([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


@pytest.mark.parametrize("d", [1, 2])
def test_cdo_algebroid_passes(d):
    res = algebroid_axiom_check(cdo_algebroid(d, 3))
    assert res.ok
    assert res.checked > 0


MUTATIONS = [(a, b, c) for a in range(3) for b in range(a + 1, 3) for c in range(3)]


@pytest.mark.parametrize("a,b,c", MUTATIONS)
def test_single_mutation_is_caught(a, b, c):
    g = sl2()
    bad = mutate_structure_constant(g, a, b, c)
    v = lie_algebroid(bad, normalized_killing(g), check=False)
    res = algebroid_axiom_check(v)
    assert not res.ok
    assert res.witness is not None
    # each witness element is a parseable state
    for part in witness_text(v, res.witness).split("; "):
        dsl.parse_expr(part)


def test_mutated_cdo_brace_is_caught():
    v = cdo_algebroid(1, 3)
    dx = {((0,), 0): Fraction(1)}

    def brace(X, Y):
        out = dict(v.brace(X, Y))
        if X == dx and Y == dx:
            out[(0,)] = out.get((0,), 0) + 1
        return out

    res = algebroid_axiom_check(v.with_maps(brace=brace))
    assert not res.ok
    assert res.witness is not None


# -- twists and morphisms ------------------------------------------------------


def test_zero_twist_is_identity():
    v = cdo_algebroid(1, 3)
    w = delta_twist(v, lambda X: {})
    assert compare_algebroids(v, w) is None


def test_lie_algebroid_twist_is_trivial():
    g = sl2()
    v = lie_algebroid(g, normalized_killing(g))
    assert compare_algebroids(v, delta_twist(v, lambda X: {})) is None


def test_one_dimensional_two_forms_vanish():
    # on the line every two-form is zero, so the twist is the identity
    v = cdo_algebroid(1, 3)
    assert compare_algebroids(v, delta_twist(v, two_form_delta(v, {}))) is None


def test_closed_two_form_twist_is_an_automorphism():
    # every two-form on the plane is closed, and then the twisted maps agree
    v = cdo_algebroid(2, 3)
    delta = two_form_delta(v, {((1, 0), (0, 1)): Fraction(1)})
    w = delta_twist(v, delta)
    assert algebroid_axiom_check(w).ok
    assert morphism_check(v, w, delta).ok
    assert compare_algebroids(v, w) is None


def test_linear_twist_on_plane():
    v = cdo_algebroid(2, 3)
    delta = linear_delta(v, {0: {((0, 0), 0): Fraction(1)}, 1: {((1, 0), 1): Fraction(1)}})
    w = delta_twist(v, delta)
    assert algebroid_axiom_check(w).ok
    assert morphism_check(v, w, delta).ok
    assert compare_algebroids(v, w) is not None
    # (id, delta) is not a morphism from v to itself
    res = morphism_check(v, v, delta)
    assert not res.ok and res.witness is not None


# -- free generation and extraction -------------------------------------------


def test_affine_vacuum_dims_are_coloured_partitions():
    g = sl2()
    V = free_generate(lie_algebroid(g, normalized_killing(g).scaled(2)), 6)
    assert V.dims() == coloured_partitions(3, 6)


def test_extraction_round_trip_lie():
    g = sl2()
    lam = normalized_killing(g).scaled(3)
    v = lie_algebroid(g, lam)
    V = free_generate(v, 2)
    x = extract_algebroid(V, canonical_splitting(V))
    assert compare_algebroids(v, x) is None
    assert algebroid_axiom_check(x).ok


@pytest.mark.parametrize("d", [1, 2])
def test_extraction_round_trip_cdo(d):
    v = cdo_algebroid(d, 3)
    V = free_generate(v, 2)
    assert compare_algebroids(v, extract_algebroid(V, canonical_splitting(V))) is None


def test_extraction_of_twist():
    v = cdo_algebroid(2, 3)
    w = delta_twist(v, linear_delta(v, {0: {((0, 0), 0): Fraction(1)}, 1: {((1, 0), 1): Fraction(1)}}))
    V = free_generate(w, 2)
    assert compare_algebroids(w, extract_algebroid(V, V.state_of_vector)) is None


def test_generator_modes_match_composite_fields():
    V = free_generate(cdo_algebroid(2, 3), 2)
    f = {(1, 1): Fraction(1), (0, 2): Fraction(2)}
    alpha = {((1, 0), 1): Fraction(1)}
    X = {((0, 1), 0): Fraction(1), ((2, 0), 1): Fraction(-1)}
    routes = [(("A", f), StateField(V.state_of_function(f))),
              (("Omega", alpha), StateField(V.state_of_form(alpha))),
              (("T", X), StateField(V.state_of_vector(X)))]
    keys = [k for w in range(2) for k in V.space.basis(w, max_bdeg=2)]
    for key in keys:
        s = FockState(V.space, {key: 1})
        for field, composite in routes:
            for n in range(-1, 2):
                assert V.mode_apply(field, n, s) == composite.mode(n)(s)


# -- conformal vectors -------------------------------------------------------


def test_betagamma_central_charge():
    r = virasoro_check(betagamma_conformal(1), c_claim=2, mode_range=2, weight_range=3)
    assert r.passed
    assert r.values["central_charge"] == 2


def test_ghost_central_charge():
    r = virasoro_check(ghost_conformal(1), c_claim=-2, mode_range=2, weight_range=3)
    assert r.passed


def test_wrong_claim_fails():
    r = virasoro_check(betagamma_conformal(1), c_claim=3, mode_range=2, weight_range=2)
    assert not r.check("central-charge").passed
    assert r.check("L-commutators").passed


def test_weight_one_vector_rejected():
    sp = betagamma_conformal(1).space
    with pytest.raises(NotWeightTwo):
        virasoro_check(sp.state([("a", 0, -1)]))


@pytest.mark.parametrize("k", [1, 3])
def test_sugawara_sl2(k):
    g = sl2()
    c = sugawara_central_charge(g, k)
    assert c == Fraction(3 * k, k + 2)
    r = virasoro_check(sugawara(g, k), c_claim=c, mode_range=2, weight_range=2)
    assert r.passed


def test_sugawara_critical():
    with pytest.raises(CriticalLevel):
        sugawara(sl2(), -2)


def test_heisenberg_sugawara():
    g = abelian(1)
    nu = sugawara(g, lam=BilinearForm([[1]]))
    assert virasoro_check(nu, c_claim=1, mode_range=2, weight_range=3).passed


# -- one-form zero modes -------------------------------------------------------


@pytest.mark.parametrize("seed", [3, 11])
def test_one_form_zero_modes(seed):
    for d, alpha, X in random_form_vector_pairs(seed, count=5):
        V = free_generate(cdo_algebroid(d, 3), 1)
        assert one_form_zero_mode_check(alpha, X, V)


def test_exact_form_zero_mode_kills():
    # alpha = d(b1 b2) = b2 db1 + b1 db2 is closed
    alpha = {((0, 1), 0): Fraction(1), ((1, 0), 1): Fraction(1)}
    X = {((1, 0), 0): Fraction(1)}
    V = free_generate(cdo_algebroid(2, 3), 1)
    assert one_form_zero_mode_check(alpha, X, V)
    assert V.mode_apply(("Omega", alpha), 0, V.state_of_vector(X)).is_zero()
