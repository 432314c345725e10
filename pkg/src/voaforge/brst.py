"""Chevalley-Eilenberg and Feigin complexes, the obstruction Q_0^2, and
blockwise semi-infinite cohomology."""

import os
import random
from fractions import Fraction

from .exact import SparseMatrix, SparseVector, rank
from .fock import FockSpace, FockState, _acc, _acc_all, ghost_number_mono, windowed, mode_operator
from .liealg import BilinearForm, Representation, killing_form, DimensionMismatch
from .report import Report
from .voa import StateField, virasoro_relations, basis_states, ghost_conformal

DEFAULT_BLOCK_BUDGET = 5000


class ObstructionNonzero(ValueError):
    pass


class UnboundedBlock(RuntimeError):
    pass


class NotPrimary(ValueError):
    pass


class NotInvariant(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotAModule(ValueError):
    pass


def block_budget():
    env = os.environ.get("VOAFORGE_BLOCK_BUDGET")
    return int(env) if env else DEFAULT_BLOCK_BUDGET


# ---------------------------------------------------------------------------
# exterior algebra on bitmasks


def _below(mask, a):
    return bin(mask & ((1 << a) - 1)).count("1")


def wedge_left(a, mask):
    """phi^a ^ (basis monomial): (sign, mask) or None."""
    if mask >> a & 1:
        return None
    return (-1 if _below(mask, a) % 2 else 1), mask | (1 << a)


def contract_left(a, mask):
    """iota_a on a basis monomial, an odd derivation from the left."""
    if not mask >> a & 1:
        return None
    return (-1 if _below(mask, a) % 2 else 1), mask & ~(1 << a)


def _masks(n, p):
    return [m for m in range(1 << n) if bin(m).count("1") == p]


class CEComplex:
    """Lambda^* g^dual (x) W with d = phi^a rho(t_a) - 1/2 c^a_bc phi^b phi^c iota_a."""

    def __init__(self, g, rho):
        self.g = g
        self.rho = rho
        self.n = g.dim
        self.wdim = rho.dim

    def basis(self, p):
        return [(m, i) for m in _masks(self.n, p) for i in range(self.wdim)]

    def q_on_mask(self, mask):
        """The Chevalley-Eilenberg part on Lambda^*, as {mask: coeff}."""
        g = self.g
        out = {}
        for a in range(self.n):
            r = contract_left(a, mask)
            if r is None:
                continue
            s1, m1 = r
            for b in range(self.n):
                for c in range(self.n):
                    coeff = g.structure_constant(a, b, c)
                    if not coeff:
                        continue
                    r2 = wedge_left(c, m1)
                    if r2 is None:
                        continue
                    r3 = wedge_left(b, r2[1])
                    if r3 is None:
                        continue
                    _acc(out, r3[1], Fraction(-1, 2) * coeff * s1 * r2[0] * r3[0])
        return out

    def apply(self, key):
        mask, i = key
        out = {}
        for a in range(self.n):
            r = wedge_left(a, mask)
            if r is None:
                continue
            mat = self.rho.matrices[a]
            for j in range(self.wdim):
                if mat[j][i]:
                    _acc(out, (r[1], j), r[0] * mat[j][i])
        for m2, c in self.q_on_mask(mask).items():
            _acc(out, (m2, i), c)
        return out

    def differential(self, p):
        dom, cod = self.basis(p), self.basis(p + 1)
        return SparseMatrix(dom, cod, [SparseVector(self.apply(k)) for k in dom])

    def square_is_zero(self):
        for p in range(self.n + 1):
            for k in self.basis(p):
                out = {}
                for k2, c in self.apply(k).items():
                    _acc_all(out, self.apply(k2), c)
                if out:
                    return False
        return True

    def cohomology(self):
        ranks = [rank(self.differential(p)) if p < self.n else 0 for p in range(self.n + 1)]
        dims = []
        for p in range(self.n + 1):
            dims.append(len(self.basis(p)) - ranks[p] - (ranks[p - 1] if p else 0))
        return dims


def ce_build(g, W):
    """Chevalley-Eilenberg complex of g with coefficients in W (a
    Representation or a list of action matrices)."""
    rho = W if isinstance(W, Representation) else Representation(g, W, check=False)
    if len(rho.matrices) != g.dim:
        raise DimensionMismatch("one action matrix per basis element is required")
    if rho.violation() is not None:
        raise NotAModule(f"action matrices fail the bracket test on {rho.violation()}")
    cx = CEComplex(g, rho)
    if not cx.square_is_zero():
        raise NotAModule("the differential does not square to zero")
    return cx


def invariants_dim(g, rho):
    """dim of the joint kernel of all action matrices."""
    rows = []
    for m in rho.matrices:
        rows.extend(m)
    if not rows:
        return rho.dim
    return rho.dim - rank(rows)


def jq_relations_check(g):
    """[J,q] = q, J phi = phi, q^2 = 0 and q(theta) + 1/2 [theta, theta] = 0
    on the finite ghost algebra Lambda^* g^dual (matter acting as g itself)."""
    r = Report(command="jq-check")
    cx = CEComplex(g, Representation.trivial(g))
    n = g.dim
    masks = list(range(1 << n))

    def q(mask):
        return cx.q_on_mask(mask)

    bad = None
    for m in masks:
        deg = bin(m).count("1")
        comm = {}
        for k, v in q(m).items():
            _acc(comm, k, v * bin(k).count("1") - v * deg)
        if comm != q(m):
            bad = m
            break
    r.add("[J,q]=q", bad is None, witness="" if bad is None else f"mask {bad}")

    ok = all(wedge_left(a, 0)[1] == 1 << a for a in range(n))
    r.add("J(phi)=phi", ok)

    bad = None
    for m in masks:
        out = {}
        for m2, c in q(m).items():
            _acc_all(out, q(m2), c)
        if out:
            bad = (m, out)
            break
    r.add("[q,q]=0", bad is None, "encodes the Jacobi identity",
          "" if bad is None else f"q^2 on mask {bad[0]} = {bad[1]}")

    # q(theta) + 1/2 [theta, theta] in Lambda^2 (x) g
    total = {}
    for a in range(n):
        for m2, c in q(1 << a).items():
            _acc(total, (m2, a), c)
    for a in range(n):
        for b in range(n):
            w = wedge_left(b, 0)
            w = wedge_left(a, w[1]) if w else None
            if w is None:
                continue
            for c, v in g.bracket_basis(a, b).items():
                _acc(total, (w[1], c), Fraction(1, 2) * w[0] * v)
    r.add("q(theta)+[theta,theta]/2=0", not total, witness="" if not total else str(total))
    return r


# ---------------------------------------------------------------------------
# matter and the Feigin complex


class Matter:
    """A g-module for the Feigin complex: the induced module of an affine
    algebra h at ``level`` on ``ground_rep`` (trivial by default), with g
    acting through the linear map ``action`` (rows: g basis, {h index: c}).
    ``action=None`` means g acts trivially."""

    def __init__(self, algebra, level, action=None, ground_rep=None, name="matter"):
        self.algebra = algebra
        self.level = level
        self.action = action
        self.ground_rep = ground_rep
        self.name = name

    def total_level(self, g):
        if self.action is None or self.algebra is None:
            return BilinearForm.zero(g.dim)
        n = g.dim
        m = [[Fraction(0)] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                s = Fraction(0)
                for i, ci in self.action[a].items():
                    for j, cj in self.action[b].items():
                        s += ci * cj * self.level(i, j)
                m[a][b] = s
        return BilinearForm(m)

    def check_action(self, g):
        if self.action is None:
            return
        if len(self.action) != g.dim:
            raise NotAModule("one action row per basis element is required")
        h = self.algebra
        for a in range(g.dim):
            for b in range(g.dim):
                lhs = {}
                for i, ci in self.action[a].items():
                    for j, cj in self.action[b].items():
                        for k, v in h.bracket_basis(i, j).items():
                            _acc(lhs, k, ci * cj * v)
                rhs = {}
                for c, v in g.bracket_basis(a, b).items():
                    for k, w in self.action[c].items():
                        _acc(rhs, k, v * w)
                if lhs != rhs:
                    raise NotAModule(f"the action does not respect the bracket on ({a},{b})")


def affine_matter(g, k=None, lam=None, ground_rep=None):
    """V_lam(g) (or its Weyl module on ground_rep) with g acting by J."""
    from .liealg import normalized_killing
    if lam is None:
        lam = normalized_killing(g).scaled(Fraction(k))
    action = [{a: Fraction(1)} for a in range(g.dim)]
    return Matter(g, lam, action, ground_rep, name=f"V({g.name})")


def heisenberg_matter(rank_=1, form=None):
    """Heisenberg Fock module on which g acts trivially."""
    from .liealg import abelian
    h = abelian(rank_)
    form = form or BilinearForm([[Fraction(int(i == j)) for j in range(rank_)] for i in range(rank_)])
    return Matter(h, form, None, name=f"heisenberg{rank_}")


class FeiginComplex:
    """Ghost system for g tensored with matter, with Q_0 = (q + theta)_0."""

    def __init__(self, g, matter):
        self.g = g
        self.matter = matter
        matter.check_action(g)
        h = matter.algebra
        kw = {}
        if h is not None and h.dim:
            kw["affine"] = (h, matter.level)
        self.vac_space = FockSpace(bc=g.dim, **kw)
        self.space = FockSpace(bc=g.dim, ground_rep=matter.ground_rep, **kw) \
            if matter.ground_rep is not None else self.vac_space
        self.level = matter.total_level(g)
        self.q_state = self._q_state()
        self.theta_state = self._theta_state()
        self.Q = StateField(self.q_state + self.theta_state, self.space)
        self.Q0 = self.Q.mode(0)

    def _q_state(self):
        sp = self.vac_space
        out = sp.zero()
        n = self.g.dim
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    coeff = self.g.structure_constant(a, b, c)
                    if coeff:
                        out = out + sp.state([("phi", b, 0), ("phi", c, 0), ("del", a, -1)],
                                             coeff=Fraction(-1, 2) * coeff)
        return out

    def _theta_state(self):
        sp = self.vac_space
        out = sp.zero()
        if self.matter.action is None:
            return out
        for a, row in enumerate(self.matter.action):
            for i, c in row.items():
                out = out + sp.state([("phi", a, 0), ("J", i, -1)], coeff=c)
        return out

    def action_mode(self, a, n):
        """The matter mode of t_a: sum of J_{i,n} through the action map."""
        out = []
        if self.matter.action is None:
            return out
        for i, c in self.matter.action[a].items():
            out.append((c, ("J", i, n)))
        return out

    def keys(self, w):
        return self.space.basis(w)

    def blocks(self, w):
        out = {}
        for key in self.keys(w):
            out.setdefault(ghost_number_mono(key[0]), []).append(key)
        return out

    def j_range(self, w):
        return (-w, self.g.dim + w)

    def expected_square(self):
        """1/2 (lambda_ad + lambda)_ab sum_n n phi^a_{-n} phi^b_n."""
        M = killing_form(self.g) + self.level
        n = self.g.dim
        sp = self.space

        def builder(w):
            out = []
            for a in range(n):
                for b in range(n):
                    if not M(a, b):
                        continue
                    for k in range(-w, w + 1):
                        if k:
                            out.append((Fraction(1, 2) * M(a, b) * k, (("phi", a, -k), ("phi", b, k))))
            return out

        return windowed(sp, builder, parity=0, shift=0, name="Q0^2 formula")


def feigin_complex(g, W):
    return FeiginComplex(g, W)


class Q0Square:
    def __init__(self, complex_, operator, expected, states, mismatch):
        self.complex = complex_
        self.operator = operator
        self.expected = expected
        self.states = states
        self.mismatch = mismatch

    @property
    def matches(self):
        return self.mismatch is None

    @property
    def is_zero(self):
        return all(self.operator(s).is_zero() for s in self.states)


def q0_square(g, lam=None, W=None, weight=2):
    """Q_0 Q_0 = 1/2 [Q_0, Q_0], compared with the displayed formula on
    every chain state of weight <= ``weight``."""
    if W is None:
        if lam is None:
            raise ValueError("give the matter module or its level")
        W = affine_matter(g, lam=lam)
    cx = W if isinstance(W, FeiginComplex) else FeiginComplex(g, W)
    if lam is not None and cx.level != lam:
        raise DimensionMismatch("matter level differs from the stated level")
    sq = cx.Q0 @ cx.Q0
    exp = cx.expected_square()
    states = basis_states(cx.space, weight)
    mismatch = None
    for s in states:
        if sq(s) != exp(s):
            mismatch = s
            break
    return Q0Square(cx, sq, exp, states, mismatch)


# ---------------------------------------------------------------------------
# cohomology


class CohomologyReport:
    def __init__(self):
        self.rows = []
        self.euler = {}
        self.chain_euler = {}
        self.invariants = None

    def dim_H(self, w, j):
        for r in self.rows:
            if r["weight"] == w and r["degree"] == j:
                return r["dim_H"]
        return 0

    def to_json(self):
        return {"blocks": self.rows,
                "euler": [{"weight": w, "chi": self.euler[w], "chain_chi": self.chain_euler[w]}
                          for w in sorted(self.euler)]}


def _q_matrix(cx, dom, cod):
    cod_set = set(cod)
    cols = []
    for key in dom:
        out = cx.Q0.on_key(*key)
        for k in out:
            if k not in cod_set:
                raise RuntimeError(f"Q_0 left the block: {k}")
        cols.append(SparseVector(out))
    return SparseMatrix(dom, cod, cols)


def semiinf_cohomology(g, W, w_max, degrees=None, budget=None, shuffle_seed=None):
    """Dimensions of H^{inf/2 + j} at weights <= w_max by exact ranks.

    Requires Q_0^2 = 0.  The (0, 0) block is cross-checked against the
    invariants of the weight-zero matter computed from ce_build."""
    cx = W if isinstance(W, FeiginComplex) else FeiginComplex(g, W)
    if killing_form(g) + cx.level != BilinearForm.zero(g.dim):
        raise ObstructionNonzero("total level must equal minus the Killing form")
    budget = block_budget() if budget is None else budget
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    rep = CohomologyReport()
    for w in range(w_max + 1):
        blocks = cx.blocks(w)
        lo = min(list(blocks) + [0]) - 1
        hi = max(list(blocks) + [0]) + 1
        for j, keys in blocks.items():
            if len(keys) > budget:
                raise UnboundedBlock(f"block (w={w}, j={j}) has {len(keys)} columns, budget {budget}")
        ranks = {}
        for j in range(lo, hi + 1):
            dom = list(blocks.get(j, []))
            cod = list(blocks.get(j + 1, []))
            if rng is not None:
                rng.shuffle(dom)
                rng.shuffle(cod)
            ranks[j] = rank(_q_matrix(cx, dom, cod)) if dom and cod else 0
        chi = 0
        cchi = 0
        for j in sorted(blocks):
            if degrees is not None and j not in degrees:
                continue
            dim_c = len(blocks[j])
            dim_im = ranks.get(j - 1, 0)
            dim_ker = dim_c - ranks.get(j, 0)
            dim_h = dim_ker - dim_im
            rep.rows.append({"weight": w, "degree": j, "dim_chain": dim_c, "dim_ker": dim_ker,
                             "dim_im": dim_im, "dim_H": dim_h})
            chi += (-1) ** (j % 2) * dim_h
            cchi += (-1) ** (j % 2) * dim_c
        rep.euler[w] = chi
        rep.chain_euler[w] = cchi
    rep.invariants = weight_zero_invariants(g, cx)
    if rep.dim_H(0, 0) != rep.invariants:
        raise AssertionError(f"weight-zero H^0 = {rep.dim_H(0, 0)} but invariants = {rep.invariants}")
    return rep


def weight_zero_invariants(g, cx):
    """dim W_0^g from the independent CE complex on the ground module."""
    m = cx.matter
    if m.ground_rep is None or m.action is None:
        W0 = Representation.trivial(g, m.ground_rep.dim if m.ground_rep is not None else 1)
    else:
        mats = []
        for a in range(g.dim):
            acc = [[Fraction(0)] * m.ground_rep.dim for _ in range(m.ground_rep.dim)]
            for i, c in m.action[a].items():
                for r_, row in enumerate(m.ground_rep.matrices[i]):
                    for s_, v in enumerate(row):
                        acc[r_][s_] += c * v
            mats.append(acc)
        W0 = Representation(g, mats)
    ce = ce_build(g, W0)
    return ce.cohomology()[0]


# ---------------------------------------------------------------------------
# induced structures


def induced_virasoro_check(cx, nu_W, c_W, N=2, test_weight=2):
    """[Q_0, L_n] = 0 for the diagonal Virasoro and its central charge on
    cohomology representatives equals c_W - 2 dim g."""
    g = cx.g
    r = Report(command="induced-virasoro")
    # matter primary test on the matter module alone
    h = cx.matter.algebra
    mspace = FockSpace(affine=(h, cx.matter.level), ground_rep=cx.matter.ground_rep) if h is not None \
        else FockSpace()
    LW = StateField(FockState(nu_W.space, nu_W.terms), mspace)
    mstates = basis_states(mspace, test_weight)
    for a in range(g.dim):
        for n in range(-N, N + 1):
            for m in range(-N, N + 1):
                A_m = _matter_op(cx, mspace, a, m)
                A_nm = _matter_op(cx, mspace, a, n + m)
                if A_m is None:
                    continue
                comm = (LW.mode(n) @ A_m) - (A_m @ LW.mode(n)) + A_nm * m
                for s in mstates:
                    out = comm(s)
                    if not out.is_zero():
                        raise NotPrimary(f"[L_{n}, A_{m}] != -m A_{n + m} for basis {a + 1} on {s}")
    r.add("matter-primary", True, f"|n|,|m| <= {N}")

    ghost_nu = ghost_conformal(g.dim)
    total = FockState(cx.vac_space, ghost_nu.terms) + FockState(cx.vac_space, nu_W.terms)
    L = StateField(total, cx.space)
    states = basis_states(cx.space, test_weight)
    bad = None
    for n in range(-N, N + 1):
        comm = (cx.Q0 @ L.mode(n)) - (L.mode(n) @ cx.Q0)
        for s in states:
            if not comm(s).is_zero():
                bad = (n, s)
                break
        if bad:
            break
    r.add("[Q0,L_n]=0", bad is None, f"|n| <= {N} on {len(states)} states",
          "" if bad is None else f"n={bad[0]} on {bad[1]}")

    reps = [s for s in basis_states(cx.space, 1) if cx.Q0(s).is_zero()]
    c = virasoro_relations(L.mode, reps, N, r, label="induced")
    r.values["central_charge"] = c
    r.values["expected"] = Fraction(c_W) - 2 * g.dim
    r.add("induced-central-charge", c == Fraction(c_W) - 2 * g.dim,
          f"measured {c}, expected {Fraction(c_W) - 2 * g.dim}")
    return r


def _matter_op(cx, space, a, n):
    terms = cx.action_mode(a, n)
    if not terms:
        return None
    op = None
    for c, x in terms:
        piece = mode_operator(space, x) * c
        op = piece if op is None else op + piece
    return op


def grading_bound_check(cx, k):
    lo, hi = -k, cx.g.dim + k
    for key in cx.keys(k):
        j = ghost_number_mono(key[0])
        if j < lo or j > hi:
            return False
    return True


def centralizer_map_check(cx, u):
    """1 (x) u for u killed by all A_n, n >= 0: returns the report of
    Q_0-closedness; raises NotInvariant with the first (A, n) witness."""
    s = FockState(cx.space, u.terms) if u.space is not cx.space else u
    w = max((cx.space.mono_excess(m) for (m, _) in s.terms), default=0)
    for a in range(cx.g.dim):
        for n in range(0, w + 1):
            out = {}
            for c, x in cx.action_mode(a, n):
                _acc_all(out, cx.space.apply_terms(x, s.terms), c)
            if out:
                raise NotInvariant(f"{cx.g.basis_names[a]}_{n} does not kill the state",
                                   witness=(cx.g.basis_names[a], n))
    r = Report(command="centralizer")
    closed = cx.Q0(s).is_zero()
    r.add("closed", closed, "Q_0 (1 x u) = 0")
    r.values["degree"] = s.ghost_number()
    return r
