import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from voaforge.fock import (MIXED, FockSpace, FockState, OperatorExpr, UnknownGenerator, affine_apply,
                           bc_apply, clifford_apply, weight_of, weyl_apply)
from voaforge.liealg import BilinearForm, abelian, normalized_killing, sl2


def op(*word, c=1):
    return OperatorExpr({tuple(word): c})


# -- worked examples ---------------------------------------------------------


def test_weyl_examples():
    sp = FockSpace(weyl=1)
    vac = sp.vacuum()
    assert weyl_apply(op(("a", 0, 1)), sp.state([("b", 0, -1)])) == vac
    assert weyl_apply(op(("a", 0, 0)), vac).is_zero()
    two_b = sp.state([("b", 0, -1), ("b", 0, -1)])
    assert weyl_apply(op(("a", 0, 1)), two_b) == sp.state([("b", 0, -1)]) * 2


def test_clifford_examples():
    sp = FockSpace(clifford=1)
    s0 = sp.vacuum()
    assert clifford_apply(op(("e", 0, 0), ("e", 0, 0)), s0) == s0 * -1
    assert clifford_apply(op(("e", 0, 1)), sp.state([("e", 1, -1)])).is_zero()
    assert clifford_apply(op(("e", 0, 1)), sp.state([("e", 0, -1)])) == s0 * -2


def test_affine_examples():
    g = sl2()
    k = Fraction(5, 3)
    sp = FockSpace(affine=(g, normalized_killing(g).scaled(k)))
    vac = sp.vacuum()
    e, h, f = 0, 1, 2
    assert affine_apply(op(("J", e, 1)), sp.state([("J", f, -1)])) == vac * k
    assert affine_apply(op(("J", h, 1)), sp.state([("J", h, -1)])) == vac * (2 * k)
    ab = FockSpace(affine=(abelian(2), BilinearForm.zero(2)))
    assert affine_apply(op(("J", 0, 1)), ab.state([("J", 1, -1)])).is_zero()


def test_bc_examples():
    sp = FockSpace(bc=2)
    vac = sp.vacuum()
    assert bc_apply(op(("del", 0, 1)), sp.state([("phi", 0, -1)])) == vac
    assert sp.state([("phi", 0, 0), ("phi", 0, 0)]).is_zero()
    assert bc_apply(op(("del", 0, 0)), sp.state([("phi", 0, 0), ("phi", 1, 0)])) == sp.state([("phi", 1, 0)])


def test_unknown_generator():
    sp = FockSpace(weyl=1)
    with pytest.raises(UnknownGenerator):
        weyl_apply(op(("a", 3, 1)), sp.vacuum())
    with pytest.raises(UnknownGenerator):
        weyl_apply(op(("e", 0, 1)), sp.vacuum())
    with pytest.raises(UnknownGenerator):
        clifford_apply(op(("a", 0, 1)), sp.vacuum())


def test_weights():
    assert weight_of(FockSpace(weyl=1).vacuum()) == 0
    assert weight_of(FockSpace(weyl=1).state([("b", 0, -2)])) == 2
    assert weight_of(FockSpace(clifford=2).vacuum()) == Fraction(1, 4)
    sp = FockSpace(weyl=1)
    assert weight_of(sp.vacuum() + sp.state([("a", 0, -1)])) is MIXED


# -- graded dimensions against brute-force counts ---------------------------


def _count_multisets(even_colours, odd_colours, w, zero_even=0, zero_odd=0):
    """Number of monomials of weight w built from even modes (repetition
    allowed) and odd modes (no repetition), ``*_colours`` per positive weight
    and ``zero_*`` extra weight-zero modes (zero_even must be 0)."""
    assert zero_even == 0
    evens = [(n, c) for n in range(1, w + 1) for c in range(even_colours)]
    odds = [(n, c) for n in range(1, w + 1) for c in range(odd_colours)]
    total = 0
    for k in range(len(odds) + 1):
        for chosen in itertools.combinations(odds, k):
            rest = w - sum(n for n, _ in chosen)
            if rest < 0:
                continue
            total += _even_count(evens, rest)
    return total * 2 ** zero_odd


def _even_count(modes, w):
    if w == 0:
        return 1
    if not modes:
        return 0
    (n, _), tail = modes[0], modes[1:]
    return sum(_even_count(tail, w - j * n) for j in range(w // n + 1))


@pytest.mark.parametrize("w", range(5))
def test_weyl_dims_without_zero_modes(w):
    sp = FockSpace(weyl=1)
    assert len(sp.basis(w, max_b0=0)) == _count_multisets(2, 0, w)


@pytest.mark.parametrize("w", range(4))
@pytest.mark.parametrize("n", [1, 2])
def test_ghost_dims(n, w):
    assert len(FockSpace(bc=n).basis(w)) == _count_multisets(0, 2 * n, w, zero_odd=n)


@pytest.mark.parametrize("w", range(5))
@pytest.mark.parametrize("dprime", [1, 2])
def test_spinor_dims(dprime, w):
    assert len(FockSpace(clifford=dprime).basis(w)) == _count_multisets(0, 2 * dprime, w, zero_odd=dprime)


@pytest.mark.parametrize("w", range(5))
def test_affine_dims(w):
    g = sl2()
    assert len(FockSpace(affine=(g, normalized_killing(g))).basis(w)) == _count_multisets(3, 0, w)


def test_b_zero_mode_truncation():
    sp = FockSpace(weyl=2)
    assert len(sp.basis(0, max_b0=1)) == 3
    assert len(sp.basis(0, max_b0=2)) == 6
    with pytest.raises(ValueError):
        sp.basis(1)


# -- relations as properties ------------------------------------------------

SPACES = {
    "weyl": FockSpace(weyl=2),
    "bc": FockSpace(bc=2),
    "clifford": FockSpace(clifford=1),
    "affine": FockSpace(affine=(sl2(), normalized_killing(sl2()).scaled(2))),
}


def _expected_bracket(x, y, space):
    """The defining relations, written out independently of the engine."""
    (fx, ix, nx), (fy, iy, ny) = x, y
    delta = ix == iy and nx + ny == 0
    if (fx, fy) == ("a", "b"):
        return {}, int(delta)
    if (fx, fy) == ("b", "a"):
        return {}, -int(delta)
    if {fx, fy} == {"del", "phi"}:
        return {}, int(delta)
    if fx == fy == "e":
        return {}, -2 * int(delta)
    if fx == fy == "J":
        g = space.g
        lin = {("J", c, nx + ny): v for c, v in g.bracket_basis(ix, iy).items()}
        return lin, (nx * space.lam(ix, iy) if nx + ny == 0 else 0)
    return {}, 0


def _gen(space):
    fams = space.families()
    return st.tuples(st.sampled_from(fams), st.integers(0, 1), st.integers(-2, 2)).map(
        lambda t: (t[0], t[1] % space.family_size(t[0]), t[2]))


def _state(space, data):
    keys = [k for w in range(3) for k in (space.basis(w, max_b0=1) if space.weyl else space.basis(w))]
    return FockState(space, {data.draw(st.sampled_from(keys)): 1})


@pytest.mark.parametrize("name", sorted(SPACES))
@given(data=st.data())
def test_relations_hold(name, data):
    space = SPACES[name]
    x, y = data.draw(_gen(space)), data.draw(_gen(space))
    s = _state(space, data)
    odd = x[0] in ("e", "phi", "del") and y[0] in ("e", "phi", "del")
    lhs = s.apply(y).apply(x) - s.apply(x).apply(y) * (-1 if odd else 1)
    lin, scal = _expected_bracket(x, y, space)
    rhs = s * scal
    for z, c in lin.items():
        rhs = rhs + s.apply(z) * c
    assert lhs == rhs


@pytest.mark.parametrize("name", sorted(SPACES))
@given(data=st.data())
def test_word_application_is_confluent(name, data):
    space = SPACES[name]
    w1 = data.draw(st.lists(_gen(space), min_size=1, max_size=2))
    w2 = data.draw(st.lists(_gen(space), min_size=1, max_size=2))
    s = _state(space, data)
    step = OperatorExpr({tuple(w2): 1}).apply(OperatorExpr({tuple(w1): 1}).apply(s))
    assert step == (OperatorExpr({tuple(w2): 1}) * OperatorExpr({tuple(w1): 1})).apply(s)


@pytest.mark.parametrize("name", sorted(SPACES))
@given(data=st.data())
def test_gradings_are_additive(name, data):
    space = SPACES[name]
    x = data.draw(_gen(space))
    s = _state(space, data)
    out = s.apply(x)
    if out.is_zero():
        return
    assert weight_of(out) == weight_of(s) - x[2]
    flips = x[0] in ("e", "phi", "del")
    assert out.parity() == (s.parity() + flips) % 2
    if space.bc:
        shift = {"phi": 1, "del": -1}[x[0]]
        assert out.ghost_number() == s.ghost_number() + shift


def test_translation_on_vacuum_module():
    sp = FockSpace(weyl=1)
    s = sp.state([("b", 0, -1)])
    # b has weight zero, so [T, b_n] = -(n - 1) b_{n-1}
    assert sp.translation(s) == sp.state([("b", 0, -2)]) * 2
    assert sp.translation(sp.vacuum()).is_zero()
