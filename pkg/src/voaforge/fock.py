"""Mode algebras and their induced modules in PBW normal form.

A generator mode is a tuple ``(family, index, n)`` with a 0-based index.
Families:

    a, b      Weyl pair, [a_{i,n}, b^j_m] = delta_ij delta_{n+m,0}
    del, phi  ghost pair (odd), [del_{a,n}, phi^b_m]_+ = delta_ab delta_{n+m,0}
    e         Ramond Clifford (odd), [e_{i,n}, e_{j,m}]_+ = -2 delta_ij delta_{n+m,0}
    J         affine, [A_n, B_m] = [A,B]_{n+m} + n lambda(A,B) delta_{n+m,0}

Mode n always carries weight -n.  A monomial is a tuple of creation modes
sorted by (n, family rank, index); applying a mode to it moves the mode
into position using the supercommutators above.
"""

from fractions import Fraction
from .exact import gauss, format_scalar
from .liealg import DimensionMismatch

# family -> (sort rank, odd, field weight)
FAMILIES = {
    "a": (0, False, 1),
    "b": (1, False, 0),
    "del": (2, True, 1),
    "phi": (3, True, 0),
    "e": (4, True, Fraction(1, 2)),
    "J": (5, False, 1),
}


class UnknownGenerator(KeyError):
    pass


class _Mixed:
    def __repr__(self):
        return "Mixed"


MIXED = _Mixed()


def sort_key(x):
    return (x[2], FAMILIES[x[0]][0], x[1])


def is_odd(x):
    return FAMILIES[x[0]][1]


def field_weight(fam):
    return FAMILIES[fam][2]


def mono_key(mono):
    return tuple(sort_key(x) for x in mono)


def _exact(c):
    """Keep ints as ints (fast path); everything else must already be exact."""
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not allowed")
    return c.numerator if isinstance(c, Fraction) and c.denominator == 1 else c


def _acc(out, key, c):
    s = out.get(key, 0) + c
    if s:
        out[key] = s
    else:
        out.pop(key, None)


def _clean(out):
    """Drop the zero entries left by deferred accumulation."""
    if all(out.values()):
        return out
    return {k: v for k, v in out.items() if v}


def _acc_all(out, terms, c=1):
    for key, v in terms.items():
        _acc(out, key, c * v)


def spinor_ground_matrices(dprime):
    """Matrices of e_{1..2d'} on Lambda*(C^{d'}), basis = bitmasks.

    e_{2k-1} = psi_k^+ - psi_k and e_{2k} = i (psi_k^+ + psi_k) square to -1
    and anticommute; psi^+ wedges, psi contracts, with Jordan-Wigner signs.
    Returned as dicts {column: {row: coeff}}.
    """
    dim = 1 << dprime
    mats = []
    for k in range(dprime):
        create, annih = {}, {}
        for s in range(dim):
            sign = -1 if bin(s & ((1 << k) - 1)).count("1") % 2 else 1
            if s & (1 << k):
                annih[s] = {s ^ (1 << k): sign}
            else:
                create[s] = {s | (1 << k): sign}
        odd = {}
        even = {}
        for s in range(dim):
            col_o, col_e = {}, {}
            for t, v in create.get(s, {}).items():
                col_o[t] = col_o.get(t, 0) + v
                col_e[t] = col_e.get(t, 0) + gauss(0, v)
            for t, v in annih.get(s, {}).items():
                col_o[t] = col_o.get(t, 0) - v
                col_e[t] = col_e.get(t, 0) + gauss(0, v)
            odd[s] = {t: v for t, v in col_o.items() if v}
            even[s] = {t: v for t, v in col_e.items() if v}
        mats.append(odd)
        mats.append(even)
    return mats


class FockSpace:
    """Induced module of a direct sum of free-field and affine mode algebras.

    Parameters select the generator families present:
    ``weyl`` Weyl pairs, ``bc`` ghost pairs for a Lie algebra of that
    dimension, ``clifford`` = d' (2d' Clifford generators with the
    2^{d'}-dimensional ground module), ``affine`` = (g, lam) with an
    optional ground representation ``ground_rep`` for the zero modes.
    """

    def __init__(self, weyl=0, bc=0, clifford=0, affine=None, ground_rep=None,
                 ground_weight=None, name=None):
        self.weyl = int(weyl)
        self.bc = int(bc)
        self.dprime = int(clifford)
        self.g = self.lam = None
        if affine is not None:
            self.g, self.lam = affine
            if self.lam.dim != self.g.dim:
                raise DimensionMismatch("level form does not match the algebra")
        self.ground_rep = ground_rep
        if ground_rep is not None and self.dprime:
            raise ValueError("a Clifford ground and an affine ground cannot be combined")
        self.name = name or self._default_name()
        self._ground_ops = {}
        if self.dprime:
            self.ground_dim = 1 << self.dprime
            for i, mat in enumerate(spinor_ground_matrices(self.dprime)):
                self._ground_ops[("e", i, 0)] = mat
            default_wt = Fraction(self.dprime, 8)
        elif ground_rep is not None:
            self.ground_dim = ground_rep.dim
            for a, m in enumerate(ground_rep.matrices):
                cols = {}
                for j in range(ground_rep.dim):
                    col = {i: m[i][j] for i in range(ground_rep.dim) if m[i][j] != 0}
                    if col:
                        cols[j] = col
                self._ground_ops[("J", a, 0)] = cols
            default_wt = Fraction(0)
        else:
            self.ground_dim = 1
            default_wt = Fraction(0)
        self.ground_weight = Fraction(default_wt if ground_weight is None else ground_weight)
        self._cache = {}
        self._br_cache = {}

    def _default_name(self):
        parts = []
        if self.weyl:
            parts.append(f"weyl{self.weyl}")
        if self.bc:
            parts.append(f"bc{self.bc}")
        if self.dprime:
            parts.append(f"cl{2 * self.dprime}")
        if self.g is not None:
            parts.append(f"affine-{self.g.name}")
        return "+".join(parts) or "trivial"

    # -- registry -----------------------------------------------------------

    def family_size(self, fam):
        if fam in ("a", "b"):
            return self.weyl
        if fam in ("del", "phi"):
            return self.bc
        if fam == "e":
            return 2 * self.dprime
        if fam == "J":
            return self.g.dim if self.g is not None else 0
        return 0

    def check_generator(self, x):
        fam, idx, n = x
        if fam not in FAMILIES or not (0 <= idx < self.family_size(fam)) or not isinstance(n, int):
            raise UnknownGenerator(f"generator {fam}[{idx + 1},{n}] is not registered in {self.name}")

    def families(self):
        return [f for f in FAMILIES if self.family_size(f)]

    def ground_parity(self, g):
        return bin(g).count("1") % 2 if self.dprime else 0

    # -- relations ----------------------------------------------------------

    def is_creator(self, x):
        fam, _, n = x
        if fam in ("b", "phi"):
            return n <= 0
        return n < 0

    def bracket(self, x, y):
        """Supercommutator [x, y] as ({mode: coeff}, scalar)."""
        key = (x, y)
        hit = self._br_cache.get(key)
        if hit is not None:
            return hit
        res = self._bracket(x, y)
        self._br_cache[key] = res
        return res

    def _bracket(self, x, y):
        fx, ix, nx = x
        fy, iy, ny = y
        zero = ({}, 0)
        central = nx + ny == 0
        if {fx, fy} == {"a", "b"}:
            if ix != iy or not central:
                return zero
            return ({}, 1 if fx == "a" else -1)
        if {fx, fy} == {"del", "phi"}:
            if ix != iy or not central:
                return zero
            return ({}, 1)
        if fx == fy == "e":
            if ix != iy or not central:
                return zero
            return ({}, -2)
        if fx == fy == "J":
            lin = {("J", c, nx + ny): v for c, v in self.g.bracket_basis(ix, iy).items()}
            scal = nx * self.lam(ix, iy) if central else 0
            return (lin, scal)
        return zero

    # -- rewriting ----------------------------------------------------------

    def apply_mono(self, x, mono, g):
        """x applied to the basis monomial (mono, g): dict {(mono, g): coeff}."""
        ck = (x, mono, g)
        hit = self._cache.get(ck)
        if hit is not None:
            return hit
        res = self._apply_mono(x, mono, g)
        self._cache[ck] = res
        return res

    def _apply_mono(self, x, mono, g):
        creator = self.is_creator(x)
        if not mono:
            if creator:
                return {((x,), g): 1}
            mat = self._ground_ops.get(x)
            if mat is None:
                return {}
            return {((), t): v for t, v in mat.get(g, {}).items()}
        y = mono[0]
        if creator:
            kx, ky = sort_key(x), sort_key(y)
            if kx < ky:
                return {((x,) + mono, g): 1}
            if kx == ky:
                if not is_odd(x):
                    return {((x,) + mono, g): 1}
                _, scal = self.bracket(x, x)
                if scal == 0:
                    return {}
                return {(mono[1:], g): Fraction(scal, 2) if scal % 2 else scal // 2}
        rest = mono[1:]
        out = {}
        sign = -1 if (is_odd(x) and is_odd(y)) else 1
        for (m2, g2), c in self.apply_mono(x, rest, g).items():
            _acc_all(out, self.apply_mono(y, m2, g2), sign * c)
        lin, scal = self.bracket(x, y)
        if scal:
            _acc(out, (rest, g), scal)
        for z, cz in lin.items():
            _acc_all(out, self.apply_mono(z, rest, g), cz)
        return out

    def apply_terms(self, x, terms):
        out = {}
        get = out.get
        cache = self._cache
        for key, c in terms.items():
            res = cache.get((x,) + key)
            if res is None:
                res = self.apply_mono(x, key[0], key[1])
            if c == 1:
                for k2, v in res.items():
                    out[k2] = get(k2, 0) + v
            else:
                for k2, v in res.items():
                    out[k2] = get(k2, 0) + c * v
        return _clean(out)

    def apply_word_terms(self, word, terms):
        """Apply x1 x2 ... xk (rightmost first) to a term dict."""
        for x in reversed(word):
            terms = self.apply_terms(x, terms)
            if not terms:
                break
        return terms

    def mode(self, fam, idx, n):
        x = (fam, idx, n)
        self.check_generator(x)
        return x

    # -- states -------------------------------------------------------------

    def vacuum(self, g=0):
        if not 0 <= g < self.ground_dim:
            raise UnknownGenerator(f"ground vector {g} out of range for {self.name}")
        return FockState(self, {((), g): 1})

    def state(self, word, g=0, coeff=1):
        """word applied to ground vector g, normalized."""
        for x in word:
            self.check_generator(x)
        return FockState(self, self.apply_word_terms(tuple(word), {((), g): _exact(coeff)}))

    def zero(self):
        return FockState(self, {})

    def mono_weight(self, mono, g=0):
        return self.ground_weight + sum(-x[2] for x in mono)

    def mono_excess(self, mono):
        return -sum(x[2] for x in mono)

    # -- enumeration --------------------------------------------------------

    def creators_up_to(self, w):
        """Creation modes of weight <= w, in canonical order."""
        out = []
        for fam in self.families():
            top = 0 if fam in ("b", "phi") else -1
            for n in range(top, -int(w) - 1, -1):
                for i in range(self.family_size(fam)):
                    out.append((fam, i, n))
        out.sort(key=sort_key)
        return out

    def basis(self, excess, max_b0=None, max_bdeg=None, ghost=None):
        """Basis keys (mono, g) of the given excess weight.

        ``max_b0`` bounds the number of b-zero-mode factors (required when
        Weyl generators are present, since polynomial weight spaces are
        infinite), ``max_bdeg`` bounds the total number of b factors and
        ``ghost`` selects a ghost number.
        """
        excess = Fraction(excess)
        if excess.denominator != 1 or excess < 0:
            return []
        excess = int(excess)
        if self.weyl and max_b0 is None and max_bdeg is None:
            raise ValueError("Weyl weight spaces are infinite; give max_b0 or max_bdeg")
        cre = self.creators_up_to(excess)
        res = []

        def rec(pos, left, b0, bd, acc):
            if pos == len(cre):
                if left == 0:
                    res.append(tuple(acc))
                return
            x = cre[pos]
            wt = -x[2]
            if wt > left:
                rec(pos + 1, left, b0, bd, acc)
                return
            odd = is_odd(x)
            is_b = x[0] == "b"
            kmax = 1 if odd else None
            k = 0
            while True:
                if kmax is not None and k > kmax:
                    break
                if k * wt > left:
                    break
                nb0 = b0 + (k if (is_b and x[2] == 0) else 0)
                nbd = bd + (k if is_b else 0)
                if max_b0 is not None and nb0 > max_b0:
                    break
                if max_bdeg is not None and nbd > max_bdeg:
                    break
                rec(pos + 1, left - k * wt, nb0, nbd, acc + [x] * k)
                k += 1

        rec(0, excess, 0, 0, [])
        if ghost is not None:
            res = [m for m in res if ghost_number_mono(m) == ghost]
        keys = [(m, g) for m in res for g in range(self.ground_dim)]
        keys.sort(key=lambda t: (mono_key(t[0]), t[1]))
        return keys

    # -- conformal-type operators ------------------------------------------

    def translation_terms(self, terms):
        """T on a vacuum module: [T, x_n] = -(n + h - 1) x_{n-1}, T|0> = 0."""
        if self.ground_dim != 1:
            raise ValueError("translation is defined on vacuum modules only")
        out = {}
        for (mono, g), c in terms.items():
            for pos, x in enumerate(mono):
                h = field_weight(x[0])
                coef = -(x[2] + h - 1)
                if coef == 0:
                    continue
                tail = {(mono[pos + 1:], g): c * coef}
                tail = self.apply_terms((x[0], x[1], x[2] - 1), tail)
                tail = self.apply_word_terms(mono[:pos], tail)
                _acc_all(out, tail)
        return out

    def translation(self, s):
        return FockState(self, self.translation_terms(s.terms))


def ghost_number_mono(mono):
    return sum(1 if x[0] == "phi" else -1 if x[0] == "del" else 0 for x in mono)


class FockState:
    """Sparse exact combination of basis keys (creation monomial, ground)."""

    __slots__ = ("space", "terms")

    def __init__(self, space, terms=None):
        self.space = space
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    def __add__(self, other):
        out = dict(self.terms)
        _acc_all(out, other.terms)
        return FockState(self.space, out)

    def __sub__(self, other):
        out = dict(self.terms)
        _acc_all(out, other.terms, -1)
        return FockState(self.space, out)

    def __mul__(self, c):
        if c == 0:
            return FockState(self.space, {})
        return FockState(self.space, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __eq__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (mono_key(kv[0][0]), kv[0][1]))

    def weight(self):
        return weight_of(self)

    def ghost_number(self):
        vals = {ghost_number_mono(m) for (m, _) in self.terms}
        return vals.pop() if len(vals) == 1 else MIXED

    def parity(self):
        vals = {(sum(is_odd(x) for x in m) + self.space.ground_parity(g)) % 2 for (m, g) in self.terms}
        return vals.pop() if len(vals) == 1 else MIXED

    def by_weight(self):
        out = {}
        for (m, g), c in self.terms.items():
            w = self.space.mono_weight(m, g)
            out.setdefault(w, {})[(m, g)] = c
        return {w: FockState(self.space, t) for w, t in out.items()}

    def apply(self, x):
        self.space.check_generator(x)
        return FockState(self.space, self.space.apply_terms(x, self.terms))

    def __str__(self):
        return format_state(self)

    def __repr__(self):
        return f"FockState({format_state(self)})"


def weight_of(s):
    """Common L0 eigenvalue of all terms, or MIXED."""
    if not s.terms:
        return Fraction(0)
    vals = {s.space.mono_weight(m, g) for (m, g) in s.terms}
    return vals.pop() if len(vals) == 1 else MIXED


# ---------------------------------------------------------------------------
# printing in the DSL surface syntax


def format_mode(x, space=None):
    fam, idx, n = x
    if fam == "J":
        label = space.g.basis_names[idx] if space is not None and space.g is not None else str(idx + 1)
        return f"J[{label},{n}]"
    return f"{fam}[{idx + 1},{n}]"


def format_ground(space, g):
    if space is not None and space.ground_dim == 1:
        return "|0>"
    return f"|s:{g}>"


def format_term(coeff, factors_text, first):
    """Render one term; complex coefficients are split in two terms."""
    from .exact import GaussRational

    pieces = []
    parts = [(coeff.re, ""), (coeff.im, "i")] if isinstance(coeff, GaussRational) else [(Fraction(coeff), "")]
    for value, unit in parts:
        if value == 0:
            continue
        neg = value < 0
        mag = -value if neg else value
        if mag == 1 and not unit:
            body = factors_text
        else:
            num = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            body = f"{num}{unit} {factors_text}"
        if first and not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append(("- " if neg else "+ ") + body)
        first = False
    return " ".join(pieces)


def format_state(s):
    if not s.terms:
        # a zero multiple of the ground keeps the text parseable
        return "0 " + format_ground(s.space, 0)
    out = []
    for (mono, g), c in s.items():
        text = " ".join([format_mode(x, s.space) for x in mono] + [format_ground(s.space, g)])
        out.append(format_term(c, text, not out))
    return " ".join(out)


# ---------------------------------------------------------------------------
# operator words


class OperatorExpr:
    """Finite formal sum of mode words; a word acts rightmost factor first."""

    def __init__(self, terms=None):
        self.terms = {}
        for w, c in (terms or {}).items():
            if c != 0:
                self.terms[tuple(w)] = self.terms.get(tuple(w), 0) + c
        self.terms = {w: c for w, c in self.terms.items() if c != 0}

    @classmethod
    def mode(cls, x, c=1):
        return cls({(x,): c})

    @classmethod
    def scalar(cls, c):
        return cls({(): c})

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            _acc(out, w, c)
        return OperatorExpr(out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            out = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    _acc(out, w1 + w2, c1 * c2)
            return OperatorExpr(out)
        return OperatorExpr({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, c):
        return OperatorExpr({w: c * v for w, v in self.terms.items()})

    def parity(self):
        vals = {sum(is_odd(x) for x in w) % 2 for w in self.terms}
        return vals.pop() if len(vals) == 1 else (0 if not vals else MIXED)

    def generators(self):
        return {x for w in self.terms for x in w}

    def apply(self, s, families=None):
        """Apply to a FockState; ``families`` restricts allowed generators."""
        for x in self.generators():
            if families is not None and x[0] not in families:
                raise UnknownGenerator(f"{format_mode(x, s.space)} is not in families {sorted(families)}")
            s.space.check_generator(x)
        out = {}
        for w, c in self.terms.items():
            _acc_all(out, s.space.apply_word_terms(w, s.terms), c)
        return FockState(s.space, out)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, OperatorExpr) and self.terms == other.terms

    def __repr__(self):
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda t: [sort_key(x) for x in t[0]]):
            parts.append(f"{format_scalar(c)}*" + ("".join(format_mode(x) for x in w) or "1"))
        return "OperatorExpr(" + " + ".join(parts) + ")"


def supercommutator_expr(p, q):
    """[p, q] = pq - (-1)^{|p||q|} qp for homogeneous words."""
    sign = -1 if (p.parity() == 1 and q.parity() == 1) else 1
    return p * q - (q * p) * sign


def weyl_apply(op, s):
    return op.apply(s, families={"a", "b"})


def clifford_apply(op, s):
    return op.apply(s, families={"e"})


def bc_apply(op, s):
    return op.apply(s, families={"phi", "del"})


def affine_apply(op, s, g=None, lam=None):
    space = s.space
    if g is not None and space.g is not None and g.dim != space.g.dim:
        raise DimensionMismatch("algebra does not match the module")
    if lam is not None and g is not None and lam.dim != g.dim:
        raise DimensionMismatch("level form does not match the algebra")
    if lam is not None and space.lam is not None and lam != space.lam:
        raise DimensionMismatch("level form differs from the module's level")
    return op.apply(s, families={"J"})


# ---------------------------------------------------------------------------
# linear operators defined monomial-by-monomial


class Operator:
    """Linear operator on one FockSpace, defined on basis keys and cached.

    Sums, scalings and products skip their own cache (``cache=False``):
    their factors cache, and a composite is usually evaluated once per key.

    ``fn(mono, g)`` returns a term dict.  ``parity`` is the Z/2 degree;
    ``shift`` the weight change (an int, or None when unknown).
    """

    def __init__(self, space, fn, parity=0, shift=None, name="op", cache=True):
        self.space = space
        self.fn = fn
        self.parity = parity
        self.shift = shift
        self.name = name
        self._cache = {}
        self._keep = cache

    def on_key(self, mono, g):
        k = (mono, g)
        hit = self._cache.get(k)
        if hit is None:
            hit = self.fn(mono, g)
            if self._keep:
                self._cache[k] = hit
        return hit

    def terms(self, terms):
        out = {}
        get = out.get
        cache = self._cache
        for key, c in terms.items():
            res = cache.get(key)
            if res is None:
                res = self.on_key(*key)
            if c == 1:
                for k2, v in res.items():
                    out[k2] = get(k2, 0) + v
            else:
                for k2, v in res.items():
                    out[k2] = get(k2, 0) + c * v
        return _clean(out)

    def __call__(self, s):
        return FockState(s.space, self.terms(s.terms))

    def __add__(self, other):
        a, b = self, other
        return Operator(self.space, lambda m, g: _sum_terms(a.on_key(m, g), b.on_key(m, g)),
                        parity=self.parity, shift=self.shift, name=f"({a.name}+{b.name})", cache=False)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        a = self
        return Operator(self.space, lambda m, g: {k: v * c for k, v in a.on_key(m, g).items()},
                        parity=self.parity, shift=self.shift, name=f"{c}*{a.name}", cache=False)

    __rmul__ = __mul__

    def __matmul__(self, other):
        a, b = self, other
        sh = None if (a.shift is None or b.shift is None) else a.shift + b.shift
        return Operator(self.space, lambda m, g: a.terms(b.on_key(m, g)),
                        parity=(a.parity + b.parity) % 2, shift=sh, name=f"{a.name}{b.name}", cache=False)


def _sum_terms(x, y):
    out = dict(x)
    _acc_all(out, y)
    return out


def zero_operator(space):
    return Operator(space, lambda m, g: {}, name="0")


def identity_operator(space, c=1):
    return Operator(space, lambda m, g: {(m, g): c}, shift=0, name="1")


def mode_operator(space, x, c=1):
    space.check_generator(x)
    return Operator(space, lambda m, g: ({k: v * c for k, v in space.apply_mono(x, m, g).items()}
                                          if c != 1 else space.apply_mono(x, m, g)),
                    parity=int(is_odd(x)), shift=-x[2], name=format_mode(x, space))


def weight_operator(space, shift=0):
    """L0 - shift, diagonal in the PBW basis."""
    return Operator(space, lambda m, g: {(m, g): space.mono_weight(m, g) - shift}
                    if space.mono_weight(m, g) != shift else {}, shift=0, name="L0")


def windowed(space, builder, parity=0, shift=None, name="op"):
    """Operator whose action on a monomial of excess w is builder(w), a list
    of (coeff, word) pairs that is exact on every state of excess <= w.

    Words are merged into a trie on their rightmost factors, so a shared
    suffix is applied once per monomial."""
    tries = {}

    def trie(w):
        t = tries.get(w)
        if t is None:
            t = [0, {}]
            for c, word in builder(w):
                if c == 0:
                    continue
                node = t
                for x in reversed(word):
                    node = node[1].setdefault(x, [0, {}])
                node[0] = node[0] + c
            tries[w] = t
        return t

    def walk(node, terms, out):
        c = node[0]
        if c:
            get = out.get
            for k, v in terms.items():
                out[k] = get(k, 0) + c * v
        for x, child in node[1].items():
            nxt = space.apply_terms(x, terms)
            if nxt:
                walk(child, nxt, out)

    def fn(m, g):
        out = {}
        walk(trie(space.mono_excess(m)), {(m, g): 1}, out)
        return _clean(out)

    return Operator(space, fn, parity=parity, shift=shift, name=name)


def supercommutator(A, B):
    sign = -1 if (A.parity == 1 and B.parity == 1) else 1
    return A @ B - (B @ A) * sign


# ---------------------------------------------------------------------------
# even (x) Clifford factorization


class TensorSplit:
    """Identify a space with weyl/affine generators and a Clifford part
    with the tensor product of its two factors.

    Keys stay in the combined canonical form; ``split`` and ``join`` convert.
    The left factor is purely even, so moving its modes past Clifford modes
    costs no sign and a combined monomial is the merge of its two parts.
    """

    def __init__(self, space):
        if space.bc or space.ground_rep is not None:
            raise ValueError("the left factor must be even with a one-dimensional ground")
        self.space = space
        self.left = FockSpace(weyl=space.weyl, affine=(space.g, space.lam) if space.g is not None else None)
        self.right = FockSpace(clifford=space.dprime)
        self._split = {}
        self._join = {}

    def split(self, mono, g):
        key = (mono, g)
        hit = self._split.get(key)
        if hit is None:
            ml = tuple(x for x in mono if x[0] != "e")
            mr = tuple(x for x in mono if x[0] == "e")
            hit = ((ml, 0), (mr, g))
            self._split[key] = hit
        return hit

    def join(self, ml, mr, g):
        key = (ml, mr, g)
        hit = self._join.get(key)
        if hit is None:
            if not ml or not mr:
                hit = (ml or mr, g)
            else:
                hit = (tuple(sorted(ml + mr, key=sort_key)), g)
            self._join[key] = hit
        return hit

    def lift_left(self, op, name=None):
        """op (x) 1 for an operator on the left factor."""
        join, split = self.join, self.split

        def fn(m, g):
            kl, (mr, g2) = split(m, g)
            return {join(k[0], mr, g2): v for k, v in op.on_key(*kl).items()}

        return Operator(self.space, fn, parity=op.parity, shift=op.shift, name=name or op.name)

    def lift_right(self, op, name=None):
        """1 (x) op for an operator on the Clifford factor."""
        join, split = self.join, self.split

        def fn(m, g):
            (ml, _), kr = split(m, g)
            return {join(ml, k[0], k[1]): v for k, v in op.on_key(*kr).items()}

        return Operator(self.space, fn, parity=op.parity, shift=op.shift, name=name or op.name)

    def tensor_sum(self, pairs, parity=0, shift=None, name="op"):
        """sum c A (x) B where pairs(wl, wr) lists (c, A, B) exactly on
        factor keys of excess wl and wr."""
        join, split = self.join, self.split
        left, right = self.left, self.right

        memo = {}

        def terms_for(wl, wr):
            hit = memo.get((wl, wr))
            if hit is None:
                hit = memo[(wl, wr)] = pairs(wl, wr)
            return hit

        def fn(m, g):
            kl, kr = split(m, g)
            out = {}
            get = out.get
            for c, A, B in terms_for(left.mono_excess(kl[0]), right.mono_excess(kr[0])):
                ra = A.on_key(*kl)
                if not ra:
                    continue
                rb = B.on_key(*kr)
                for ka, va in ra.items():
                    for kb, vb in rb.items():
                        k = join(ka[0], kb[0], kb[1])
                        out[k] = get(k, 0) + c * va * vb
            return _clean(out)

        return Operator(self.space, fn, parity=parity, shift=shift, name=name)
