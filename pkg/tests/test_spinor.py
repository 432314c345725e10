import itertools

import pytest

from voaforge.liealg import half_trace_form, so
from voaforge.spinor import (SpinorModule, build_S, character, clifford_virasoro_check, dirac_kernel,
                             ground_action_check, level_check, product_formula, scf_check,
                             series_power_factor, sugawara_consistency)


def fermion_states(colours, zero_modes, w):
    """Sets of distinct odd modes (n >= 1, ``colours`` per n) of total weight w,
    times the 2^zero_modes ground states; enumerated directly."""
    modes = [n for n in range(1, w + 1) for _ in range(colours)]
    count = 0
    for k in range(len(modes) + 1):
        for chosen in itertools.combinations(range(len(modes)), k):
            if sum(modes[i] for i in chosen) == w:
                count += 1
    return count * 2 ** zero_modes


@pytest.mark.parametrize("dprime", [1, 2])
def test_spinor_dims_by_enumeration(dprime):
    S = build_S(dprime)
    assert S.dims(5) == [fermion_states(2 * dprime, dprime, w) for w in range(6)]


@pytest.mark.parametrize("dprime", [1, 2])
def test_spinor_character_formula(dprime):
    r = character("spinor", dprime, 6)
    assert r.passed
    assert r.values["enumerated"] == product_formula("spinor", dprime, 6)


@pytest.mark.parametrize("dprime", [1, 2])
def test_tensor_character_formula(dprime):
    assert character("tensor", dprime, 4).passed


def test_unknown_character_module():
    with pytest.raises(ValueError):
        character("cotangent", 1, 2)


@pytest.mark.parametrize("k,e", [(1, 2), (2, 3)])
def test_series_factor_fermionic_and_bosonic(k, e):
    # (1 + q^k)^e and (1 - q^k)^(-e) checked by repeated multiplication
    n = 8
    ferm = series_power_factor(k, n, e, True)
    bos = series_power_factor(k, n, e, False)
    one_minus = [1] + [0] * n
    one_minus[k] = -1
    prod = [1] + [0] * n
    for _ in range(e):
        prod = [sum(prod[i] * one_minus[j - i] for i in range(j + 1)) for j in range(n + 1)]
    back = [sum(prod[i] * bos[j - i] for i in range(j + 1)) for j in range(n + 1)]
    assert back == [1] + [0] * n
    assert ferm[k] == e and ferm[0] == 1


def test_ground_weight():
    assert SpinorModule(2).ground_weight * 8 == 2
    with pytest.raises(ValueError):
        SpinorModule(0)


@pytest.mark.parametrize("dprime", [1, 2])
def test_level_one_action(dprime):
    r = level_check(build_S(dprime))
    assert r.passed
    form = half_trace_form(2 * dprime)
    for a, b, n, central, expected in r.tables["central"]:
        assert central == expected == n * form(a - 1, b - 1)


@pytest.mark.parametrize("dprime", [1, 2])
def test_ground_action(dprime):
    assert ground_action_check(build_S(dprime))


@pytest.mark.parametrize("dprime", [1, 2])
def test_clifford_virasoro(dprime):
    r = clifford_virasoro_check(build_S(dprime))
    assert r.passed
    assert r.values["central_charge"] == dprime


@pytest.mark.parametrize("n,m", [(1, -1), (-2, 1), (0, 2)])
def test_sugawara_consistency(n, m):
    assert sugawara_consistency(build_S(1), 0, n, m)


def test_so_dimension():
    assert so(4).dim == 6


def test_superconformal_small():
    r = scf_check(1, N=2, W=1, degree=1)
    assert r.passed
    assert (r.values["c_L"], r.values["c_Lbar"], r.values["c_G"]) == (2, 3, 3)


def test_dirac_kernel():
    r = dirac_kernel(1, 1, 2)
    assert r.passed
    # constant spinors: the ground kernel without b zero modes is all of S_0
    assert r.values["ground_kernel_deg0"] == 2
    for _, dim, ker, ker0 in r.tables["kernel"][1:]:
        assert 0 <= ker0 <= ker <= dim
