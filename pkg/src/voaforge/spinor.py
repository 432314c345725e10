"""Ramond Clifford algebra, the spinor module S, its level-one so action and
Virasoro, and the (0,1) superconformal family on D^ch(A^{2d'}) (x) S."""

from fractions import Fraction

from .brst import UnboundedBlock, block_budget
from .exact import SparseMatrix, SparseVector, kernel_basis, rank
from .fock import FockSpace, FockState, TensorSplit, mode_operator, windowed
from .liealg import half_trace_form, so, so_matrix
from .report import Report
from .voa import StateField, basis_states, virasoro_relations


class SpinorModule:
    """S = Cl (x)_{Cl>=0} S_0 with S_0 = Lambda^*(C^{d'})."""

    def __init__(self, dprime):
        if dprime < 1:
            raise ValueError("d' must be at least 1")
        self.dprime = dprime
        self.d = 2 * dprime
        self.space = FockSpace(clifford=dprime)
        self.algebra = so(self.d)
        self.level_form = half_trace_form(self.d)

    @property
    def ground_weight(self):
        return Fraction(self.dprime, 8)

    def basis(self, k):
        """Basis keys of S_k (weight d'/8 + k)."""
        return self.space.basis(k)

    def dims(self, k_max):
        return [len(self.basis(k)) for k in range(k_max + 1)]

    def ground(self, s=0):
        return self.space.vacuum(s)


def build_S(dprime):
    return SpinorModule(dprime)


def _space(S):
    return S.space if isinstance(S, SpinorModule) else S


def _matrix(S, A):
    """A as a d x d matrix: a basis index of so_d or an explicit matrix."""
    if isinstance(A, int):
        return so_matrix(2 * _space(S).dprime, A)
    return A


def so_level1_action(S, A, n):
    """A^Cl_n = 1/4 A_ji e_{i,n-r} e_{j,r} (sum over r and i != j)."""
    sp = _space(S)
    mat = _matrix(S, A)
    d = 2 * sp.dprime

    def builder(w):
        out = []
        for i in range(d):
            for j in range(d):
                c = mat[j][i]
                if i == j or not c:
                    continue
                # outside [n - w, w] one of the two anticommuting factors kills
                for r in range(n - w, w + 1):
                    out.append((Fraction(c, 4), (("e", i, n - r), ("e", j, r))))
        return out

    return windowed(sp, builder, parity=0, shift=-n, name=f"A^Cl_{n}")


def so_element_action(S, coeffs, n):
    """Mode n of a combination {so basis index: coeff}."""
    sp = _space(S)
    d = 2 * sp.dprime
    mat = [[Fraction(0)] * d for _ in range(d)]
    for a, c in coeffs.items():
        m = so_matrix(d, a)
        for i in range(d):
            for j in range(d):
                mat[i][j] += c * m[i][j]
    return so_level1_action(S, mat, n)


def clifford_virasoro(S, n, scale=1):
    """L^Cl_n = -1/8 sum_{r>=0} (2r-n) e_{i,n-r}e_{i,r}
    + 1/8 sum_{r<0} (2r-n) e_{i,r}e_{i,n-r} + d/16 delta_{n,0},
    multiplied by ``scale`` (8 makes every coefficient an integer)."""
    sp = _space(S)
    d = 2 * sp.dprime

    def c(num, den):
        q = Fraction(num * scale, den)
        return q.numerator if q.denominator == 1 else q

    def builder(w):
        out = []
        for i in range(d):
            for r in range(0, w + 1):
                if 2 * r - n:
                    out.append((c(-(2 * r - n), 8), (("e", i, n - r), ("e", i, r))))
            for r in range(n - w, 0):
                if 2 * r - n:
                    out.append((c(2 * r - n, 8), (("e", i, r), ("e", i, n - r))))
        if n == 0:
            out.append((c(d, 16), ()))
        return out

    return windowed(sp, builder, parity=0, shift=-n, name=f"L^Cl_{n}")


def _commutator(A, B):
    return (A @ B) - (B @ A)


def _anticommutator(A, B):
    return (A @ B) + (B @ A)


def _first_failure(op, states, expected=None):
    for s in states:
        out = op(s)
        want = expected(s) if expected is not None else None
        if want is None:
            if not out.is_zero():
                return s, out
        elif out != want:
            return s, out
    return None


def level_check(S, N=2, test_weight=1):
    """[A_n, B_m] = [A,B]_{n+m} + n lambda_0(A,B) delta_{n,-m}; reports the
    measured central term of every (A, B, n) with n in 1..N."""
    S = S if isinstance(S, SpinorModule) else build_S(S)
    g = S.algebra
    r = Report(command="so-level")
    states = basis_states(S.space, test_weight)
    ground = S.ground()
    table = []
    level_ok = True
    for a in range(g.dim):
        for b in range(g.dim):
            for n in range(1, N + 1):
                c = (_commutator(so_level1_action(S, a, n), so_level1_action(S, b, -n))
                     - so_element_action(S, g.bracket_basis(a, b), 0))
                out = c(ground)
                central = out.terms.get(((), 0), 0)
                expected = n * S.level_form(a, b)
                ok = out == ground * central and central == expected
                bad = _first_failure(c, states, lambda s, k=central: s * k)
                ok = ok and bad is None
                level_ok = level_ok and ok
                table.append([a + 1, b + 1, n, central, expected])
    r.add("central-term=n*lambda0", level_ok, f"so_{S.d}, n in 1..{N}")
    bad = None
    for a in range(g.dim):
        for b in range(g.dim):
            for n in range(-N, N + 1):
                for m in range(-N, N + 1):
                    if n + m == 0:
                        continue
                    c = (_commutator(so_level1_action(S, a, n), so_level1_action(S, b, m))
                         - so_element_action(S, g.bracket_basis(a, b), n + m))
                    f = _first_failure(c, states)
                    if f:
                        bad = (a, b, n, m, f)
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    r.add("affine-brackets", bad is None, f"|n|,|m| <= {N}",
          "" if bad is None else f"A={bad[0] + 1} B={bad[1] + 1} n={bad[2]} m={bad[3]}")
    r.tables["central"] = table
    return r


def ground_action_check(S):
    """[A^Cl_0, e_{j,0}] = A_ij e_{i,0} on S_0."""
    S = S if isinstance(S, SpinorModule) else build_S(S)
    sp = S.space
    states = basis_states(sp, 0)
    for a in range(S.algebra.dim):
        mat = so_matrix(S.d, a)
        A0 = so_level1_action(S, a, 0)
        for j in range(S.d):
            ej = mode_operator(sp, ("e", j, 0))
            lhs = _commutator(A0, ej)
            for s in states:
                want = sp.zero()
                for i in range(S.d):
                    if mat[i][j]:
                        want = want + mode_operator(sp, ("e", i, 0))(s) * mat[i][j]
                if lhs(s) != want:
                    return False
    return True


def clifford_virasoro_check(S, N=2, test_weight=2):
    S = S if isinstance(S, SpinorModule) else build_S(S)
    r = Report(command="clifford-virasoro")
    states = basis_states(S.space, test_weight)
    L = lambda n: clifford_virasoro(S, n)
    ground = S.ground()
    L0 = L(0)(ground)
    r.add("L0-ground", L0 == ground * S.ground_weight, f"L0 s = {S.ground_weight} s")
    c = virasoro_relations(L, states, N, r, label="clifford")
    r.values["central_charge"] = c
    r.add("central-charge", c == S.dprime, f"measured {c}, expected d/2 = {S.dprime}")
    bad = None
    for a in range(S.algebra.dim):
        for n in range(-N, N + 1):
            for m in range(-N, N + 1):
                comm = _commutator(L(n), so_level1_action(S, a, m)) + so_level1_action(S, a, n + m) * m
                f = _first_failure(comm, states)
                if f:
                    bad = (a, n, m)
                    break
            if bad:
                break
        if bad:
            break
    r.add("primary", bad is None, f"[L_n, A_m] = -m A_(n+m), |n|,|m| <= {N}",
          "" if bad is None else f"A={bad[0] + 1} n={bad[1]} m={bad[2]}")
    return r


def sugawara_consistency(S, A, n, m, test_weight=2):
    """[L^Cl_n, A^Cl_m] = -m A^Cl_{n+m} on S_0 + ... + S_w."""
    S = S if isinstance(S, SpinorModule) else build_S(S)
    comm = _commutator(clifford_virasoro(S, n), so_level1_action(S, A, m)) \
        + so_level1_action(S, A, n + m) * m
    return _first_failure(comm, basis_states(S.space, test_weight)) is None


# ---------------------------------------------------------------------------
# superconformal family


class SCFOperators:
    """L_n, Lbar_n, Gbar_n on D^ch(A^{2d'}) (x) S.

    Writing X+- = a_i -+ db^i in the Weyl modes, (db^i)_n = -n b^i_n, so
    (X+-)_n = a_{i,n} -+ (-n) b^i_n.  Checks run on the integral multiples
    4L, 8Lbar and 2Gbar (the last is the Dirac operator), so that all
    arithmetic stays in Z[i]; ``L``, ``Lbar`` and ``G`` undo the scaling.

    The working operators act factorwise through a TensorSplit; the
    composite-mode fields and the windowed mode sums on the combined space
    are kept as independent routes for cross-checks."""

    L_SCALE, LBAR_SCALE, G_SCALE = 4, 8, 2

    def __init__(self, dprime):
        self.dprime = dprime
        self.d = 2 * dprime
        self.space = FockSpace(weyl=self.d, clifford=dprime)
        self.split = TensorSplit(self.space)
        self.weyl = self.split.left
        self.cliff = self.split.right
        self.vac = self.weyl
        self._L4 = StateField(self._square(1), self.space)
        self._Lb8 = StateField(self._square(-1) * -2, self.space)
        self._cache = {}

    def _square(self, sign):
        # (a_{i,-1} + sign * b^i_{-1})^2 |0>
        vac = self.vac
        out = vac.zero()
        for i in range(self.d):
            parts = [(1, ("a", i, -1)), (sign, ("b", i, -1))]
            for c1, x in parts:
                for c2, y in parts:
                    out = out + vac.state([x, y], coeff=c1 * c2)
        return out

    def _x(self, sign, i, r):
        """(X+-)_{i,r} = a_{i,r} -+ r b^i_r as [(coeff, mode)]."""
        out = [(1, ("a", i, r))]
        if r:
            out.append((-sign * r, ("b", i, r)))
        return out

    def _x_op(self, sign, i, r):
        def build():
            op = None
            for c, x in self._x(sign, i, r):
                piece = mode_operator(self.weyl, x, c)
                op = piece if op is None else op + piece
            return op
        return self._memo(("X", sign, i, r), build)

    def _e_op(self, i, r):
        return self._memo(("e", i, r), lambda: mode_operator(self.cliff, ("e", i, r)))

    def _square_modes(self, space, sign, n, scale):
        """scale * (X_{-1} X)_n = scale * (sum_{r<0} X_r X_{n-r} + sum_{r>=0} X_{n-r} X_r)."""

        def builder(w):
            out = []
            for i in range(self.d):
                for r in range(n - w, w + 1):
                    first, second = (r, n - r) if r < 0 else (n - r, r)
                    for c1, x in self._x(sign, i, first):
                        for c2, y in self._x(sign, i, second):
                            out.append((scale * c1 * c2, (x, y)))
            return out

        return windowed(space, builder, parity=0, shift=-n, name=f"XX_{n}")

    def L4(self, n):
        return self._memo(("L", n), lambda: self.split.lift_left(self._square_modes(self.weyl, 1, n, 1)))

    def Lbar8(self, n):
        return self._memo(("Lb", n), lambda: self.split.lift_left(self._square_modes(self.weyl, -1, n, -2))
                          + self.split.lift_right(clifford_virasoro(self.cliff, n, scale=8)))

    def G2(self, n):
        def pairs(wl, wr):
            # e_{i,r} kills beyond wr and X_{n-r} beyond wl
            return [(1, self._x_op(-1, i, n - r), self._e_op(i, r))
                    for i in range(self.d) for r in range(n - wl, wr + 1)]
        return self._memo(("G", n), lambda: self.split.tensor_sum(pairs, parity=1, shift=-n, name=f"2G_{n}"))

    # independent routes on the combined space

    def composite_L4(self, n):
        return self._L4.mode(n)

    def composite_Lbar8(self, n):
        return self._Lb8.mode(n) + clifford_virasoro(self.space, n, scale=8)

    def direct_G2(self, n):
        def builder(w):
            out = []
            for i in range(self.d):
                for r in range(n - w, w + 1):
                    for c, x in self._x(-1, i, n - r):
                        out.append((c, (x, ("e", i, r))))
            return out
        return windowed(self.space, builder, parity=1, shift=-n, name=f"2G_{n}")

    def L(self, n):
        return self.L4(n) * Fraction(1, 4)

    def Lbar(self, n):
        return self.Lbar8(n) * Fraction(1, 8)

    def G(self, n):
        return self.G2(n) * Fraction(1, 2)

    def dirac(self):
        return self.G2(0)

    def _memo(self, key, fn):
        hit = self._cache.get(key)
        if hit is None:
            hit = fn()
            self._cache[key] = hit
        return hit

    def states(self, w_max, degree):
        return basis_states(self.space, w_max, max_b0=degree)


def scf_operators(dprime):
    return SCFOperators(dprime)


def scf_check(ops, N=2, W=2, degree=2):
    """All five displayed (anti)commutators on basis states of weight
    <= d'/8 + W at b_0-degree <= ``degree``, with measured central charges.

    In the scaled operators M = 8Lbar and H = 2G the displays read
    [M_n, H_m] = (4n - 8m) H_{n+m},  [H_n, H_m] = M_{n+m} + (c/3)(4n^2-1)
    delta_{n,-m} and D^2 = 4(Lbar_0 - d'/8) becomes 2 H_0^2 = M_0 - d'."""
    ops = ops if isinstance(ops, SCFOperators) else SCFOperators(ops)
    dp = ops.dprime
    r = Report(command="scf-check")
    states = ops.states(W, degree)
    r.values["states"] = len(states)
    r.values["degree"] = degree

    small = ops.states(min(W, 1), degree)
    bad = None
    for n in range(-N, N + 1):
        for name, a, b in (("L", ops.L4(n), ops.composite_L4(n)),
                           ("Lbar", ops.Lbar8(n), ops.composite_Lbar8(n)),
                           ("G", ops.G2(n), ops.direct_G2(n))):
            if _first_failure(a - b, small):
                bad = (name, n)
                break
        if bad:
            break
    r.add("mode-sums=composite-modes", bad is None, f"{len(small)} states",
          "" if bad is None else f"{bad[0]}_{bad[1]}")

    cL = virasoro_relations(ops.L4, states, N, r, label="L", scale=4)
    r.values["c_L"] = cL
    r.add("c_L=2d'", cL == 2 * dp, f"measured {cL}, expected {2 * dp}")

    bad = None
    for n in range(-N, N + 1):
        for m in range(-N, N + 1):
            for name, op in (("Lbar", _commutator(ops.L4(n), ops.Lbar8(m))),
                             ("G", _commutator(ops.L4(n), ops.G2(m)))):
                f = _first_failure(op, states)
                if f:
                    bad = (name, n, m)
                    break
            if bad:
                break
        if bad:
            break
    r.add("[L,Lbar]=[L,G]=0", bad is None, f"|n|,|m| <= {N}",
          "" if bad is None else f"[L_{bad[1]}, {bad[0]}_{bad[2]}] != 0")

    cLb = virasoro_relations(ops.Lbar8, states, N, r, label="Lbar", scale=8)
    r.values["c_Lbar"] = cLb
    r.add("c_Lbar=3d'", cLb == 3 * dp, f"measured {cLb}, expected {3 * dp}")

    bad = None
    for n in range(-N, N + 1):
        for m in range(-N, N + 1):
            op = _commutator(ops.Lbar8(n), ops.G2(m)) - ops.G2(n + m) * (4 * n - 8 * m)
            if _first_failure(op, states):
                bad = (n, m)
                break
        if bad:
            break
    r.add("[Lbar,G]=(n/2-m)G", bad is None, f"|n|,|m| <= {N}",
          "" if bad is None else f"n={bad[0]} m={bad[1]}")

    c_G = None
    bad = None
    for n in range(-N, N + 1):
        for m in range(n, N + 1):
            op = _anticommutator(ops.G2(n), ops.G2(m)) - ops.Lbar8(n + m)
            for s in states:
                out = op(s)
                if n + m:
                    if not out.is_zero():
                        bad = (n, m)
                        break
                    continue
                kappa = Fraction(4 * n * n - 1, 3)
                if c_G is None:
                    k0, v0 = next(iter(s.terms.items()))
                    c_G = Fraction(1) * out.terms.get(k0, 0) / v0 / kappa
                if out != s * (c_G * kappa):
                    bad = (n, m)
                    break
            if bad:
                break
        if bad:
            break
    r.values["c_G"] = c_G
    r.add("[G,G]=2Lbar+c(4n^2-1)/12", bad is None and c_G == 3 * dp,
          f"measured c = {c_G}, expected {3 * dp}",
          "" if bad is None else f"n={bad[0]} m={bad[1]}")

    # the diagonal sum is the Weyl conformal vector plus the Clifford Virasoro
    from .voa import betagamma_conformal
    bg = StateField(FockState(ops.vac, betagamma_conformal(ops.d).terms), ops.space)
    bad = None
    for n in range(-N, N + 1):
        op = ops.L4(n) * 2 + ops.Lbar8(n) - bg.mode(n) * 8 - clifford_virasoro(ops.space, n, scale=8)
        if _first_failure(op, states):
            bad = n
            break
    r.add("L+Lbar=diagonal", bad is None, "equals a_i b^i plus the Clifford Virasoro",
          "" if bad is None else f"n={bad}")

    H0 = ops.dirac()
    f = _first_failure((H0 @ H0) * 2 - ops.Lbar8(0) + _scalar(ops.space, dp), states)
    r.add("Dirac^2=4(Lbar0-d'/8)", f is None, f"{len(states)} states")
    return r


def _scalar(space, c):
    from .fock import identity_operator
    return identity_operator(space, c)


def dirac_kernel(ops, w_max, poly_degree, budget=None):
    """dim ker D per weight by exact rank, with D^2 = 4(Lbar_0 - d'/8) on
    every block and Lbar_0 = d'/8 on the kernel.  Blocks are the weight
    spaces at b_0-degree <= poly_degree, which D preserves."""
    ops = ops if isinstance(ops, SCFOperators) else SCFOperators(ops)
    budget = block_budget() if budget is None else budget
    dp = ops.dprime
    D = ops.dirac()
    M0 = ops.Lbar8(0)
    r = Report(command="dirac-kernel")
    rows = []
    square_ok = True
    kernel_ok = True
    for w in range(w_max + 1):
        keys = ops.space.basis(w, max_b0=poly_degree)
        if len(keys) > budget:
            raise UnboundedBlock(f"weight {w} block has {len(keys)} columns, budget {budget}")
        M = SparseMatrix(keys, keys, [SparseVector(D.on_key(*k)) for k in keys])
        rk = rank(M)
        for k in keys:
            s = FockState(ops.space, {k: 1})
            # D^2 = 4(Lbar_0 - d'/8)  <=>  2 D^2 = 8 Lbar_0 - d'
            if D(D(s)) * 2 != M0(s) - s * dp:
                square_ok = False
                break
        for vec in kernel_basis(M):
            s = FockState(ops.space, dict(vec.items()))
            if M0(s) != s * dp:
                kernel_ok = False
        deg0 = [k for k in keys if not any(x[0] == "b" and x[2] == 0 for x in k[0])]
        Z = SparseMatrix(deg0, deg0, [SparseVector(D.on_key(*k)) for k in deg0])
        rows.append([w, len(keys), len(keys) - rk, len(deg0) - rank(Z)])
    r.tables["kernel"] = [["weight", "dim", "dim_ker", "dim_ker_deg0"]] + rows
    r.values["ground_kernel_deg0"] = rows[0][3]
    r.values["poly_degree"] = poly_degree
    r.add("Dirac^2=4(Lbar0-d'/8)", square_ok, "on every block")
    r.add("Lbar0=d'/8 on kernel", kernel_ok)
    r.add("constant-spinors", rows[0][3] == 2 ** dp, f"{rows[0][3]} of {2 ** dp}")
    return r


# ---------------------------------------------------------------------------
# characters


def series_mul(p, q, n):
    out = [0] * (n + 1)
    for i, a in enumerate(p[:n + 1]):
        if a:
            for j, b in enumerate(q[:n + 1 - i]):
                out[i + j] += a * b
    return out


def series_power_factor(k, n, exponent, fermionic):
    """(1 + q^k)^e for fermionic, (1 - q^k)^{-e} otherwise, to order n."""
    from math import comb
    out = [0] * (n + 1)
    j = 0
    while j * k <= n:
        out[j * k] = comb(exponent, j) if fermionic else comb(exponent + j - 1, j)
        j += 1
    return out


def product_formula(kind, dprime, w_max):
    """Coefficients of 2^{d'} prod (1+q^n)^{2d'} for S, and at polynomial
    degree 0 of 2^{d'} prod (1-q^n)^{-4d'} (1+q^n)^{2d'} for the tensor."""
    out = [0] * (w_max + 1)
    out[0] = 2 ** dprime
    for k in range(1, w_max + 1):
        out = series_mul(out, series_power_factor(k, w_max, 2 * dprime, True), w_max)
        if kind == "tensor":
            out = series_mul(out, series_power_factor(k, w_max, 4 * dprime, False), w_max)
    return out


def character(kind, dprime, w_max):
    """Enumerated graded dimensions against the product formula."""
    if kind == "spinor":
        space = FockSpace(clifford=dprime)
        enum = [len(space.basis(k)) for k in range(w_max + 1)]
    elif kind == "tensor":
        space = FockSpace(weyl=2 * dprime, clifford=dprime)
        enum = [len(space.basis(k, max_b0=0)) for k in range(w_max + 1)]
    else:
        raise ValueError(f"unknown character module {kind!r}")
    formula = product_formula(kind, dprime, w_max)
    r = Report(command="character")
    r.tables["character"] = [["k", "weight", "enumerated", "formula"]] + [
        [k, Fraction(dprime, 8) + k, enum[k], formula[k]] for k in range(w_max + 1)]
    r.add("character", enum == formula, f"{kind}, d'={dprime}, k <= {w_max}")
    r.values["enumerated"] = enum
    return r
