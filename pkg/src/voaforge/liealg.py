"""Finite-dimensional Lie algebras, invariant forms and representations.

Structure constants are stored as ``c[(a, b)] = {c: coeff}`` meaning
[t_a, t_b] = sum coeff * t_c, with indices 0-based.
"""

from fractions import Fraction
from itertools import combinations
import json

from .exact import parse_rational, format_rational


class NotSimple(ValueError):
    pass


class JacobiViolation(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class LieAlgebra:
    """Lie algebra given by exact structure constants.

    Antisymmetry and the Jacobi identity are verified at construction
    unless ``check=False`` (used only for negative controls).
    """

    def __init__(self, dim, brackets, name="custom", basis_names=None, check=True):
        self.dim = int(dim)
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")
        self.name = name
        self.basis_names = list(basis_names) if basis_names else [f"t{i + 1}" for i in range(self.dim)]
        sc = {}
        for (a, b), out in brackets.items():
            out = {c: Fraction(v) for c, v in out.items() if v != 0}
            if out:
                sc[(a, b)] = out
        # fill in antisymmetric partners that were not given
        for (a, b), out in list(sc.items()):
            if (b, a) not in sc:
                sc[(b, a)] = {c: -v for c, v in out.items()}
        self._sc = sc
        if check:
            self._check_antisymmetry()
            bad = self.jacobi_violation()
            if bad is not None:
                raise JacobiViolation(f"Jacobi identity fails on basis triple {bad}")

    def bracket_basis(self, a, b):
        return self._sc.get((a, b), {})

    def structure_constant(self, c, a, b):
        """c^c_{ab}: coefficient of t_c in [t_a, t_b]."""
        return self._sc.get((a, b), {}).get(c, Fraction(0))

    def bracket(self, x, y):
        """Bracket of coordinate vectors given as {index: coeff}."""
        out = {}
        for a, xa in x.items():
            for b, yb in y.items():
                for c, v in self.bracket_basis(a, b).items():
                    out[c] = out.get(c, 0) + xa * yb * v
        return {c: v for c, v in out.items() if v != 0}

    def is_abelian(self):
        return not self._sc

    def _check_antisymmetry(self):
        for (a, b), out in self._sc.items():
            other = self._sc.get((b, a), {})
            for c in set(out) | set(other):
                if out.get(c, 0) != -other.get(c, 0):
                    raise ValueError(f"bracket not antisymmetric at ({a},{b})")
        for a in range(self.dim):
            if self._sc.get((a, a)):
                raise ValueError(f"[t_{a},t_{a}] must vanish")

    def jacobi_violation(self):
        """First (a, b, c) with [a,[b,c]] + cyclic != 0, or None."""
        n = self.dim
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    total = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        inner = self.bracket_basis(y, z)
                        for e, v in inner.items():
                            for f, w in self.bracket_basis(x, e).items():
                                total[f] = total.get(f, 0) + v * w
                    if any(v != 0 for v in total.values()):
                        return (a, b, c)
        return None

    def ad_matrix(self, a):
        """Matrix of ad_{t_a}: rows = output index, cols = input index."""
        n = self.dim
        m = [[Fraction(0)] * n for _ in range(n)]
        for b in range(n):
            for c, v in self.bracket_basis(a, b).items():
                m[c][b] = v
        return m

    def index(self, label):
        """Resolve a basis label (name or 1-based integer) to an index."""
        if isinstance(label, int):
            if 1 <= label <= self.dim:
                return label - 1
            raise KeyError(f"basis index {label} out of range for {self.name}")
        if label in self.basis_names:
            return self.basis_names.index(label)
        if str(label).isdigit():
            return self.index(int(label))
        raise KeyError(f"unknown basis element {label!r} of {self.name}")

    def to_json(self):
        items = []
        for (a, b), out in sorted(self._sc.items()):
            if a < b:
                items.append([a, b, [[c, format_rational(v)] for c, v in sorted(out.items())]])
        return {"dim": self.dim, "brackets": items}

    def __repr__(self):
        return f"LieAlgebra({self.name}, dim={self.dim})"


def mutate_structure_constant(g, a, b, c, delta=1):
    """Copy of g with the t_c coefficient of [t_a, t_b] shifted by delta.

    The antisymmetric partner moves with it; nothing else is checked, so
    the result is a negative-control input."""
    if a == b:
        raise ValueError("[t_a, t_a] is fixed at zero")
    br = {}
    for (x, y), out in g._sc.items():
        if x < y:
            br[(x, y)] = dict(out)
    lo, hi, sign = (a, b, 1) if a < b else (b, a, -1)
    row = br.setdefault((lo, hi), {})
    row[c] = row.get(c, Fraction(0)) + sign * Fraction(delta)
    return LieAlgebra(g.dim, br, name=f"{g.name}~", basis_names=g.basis_names, check=False)


def from_json(data, name="custom", check=True):
    """Build a LieAlgebra from {"dim": n, "brackets": [[a,b,[[c,"p/q"],...]],...]}."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        dim = int(data["dim"])
        raw = data.get("brackets", [])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed algebra description: {exc}") from None
    br = {}
    for entry in raw:
        a, b, terms = entry
        out = br.setdefault((int(a), int(b)), {})
        for c, coeff in terms:
            out[int(c)] = out.get(int(c), 0) + parse_rational(coeff)
    for (a, b) in br:
        if not (0 <= a < dim and 0 <= b < dim):
            raise ValueError(f"bracket index out of range: ({a},{b})")
    return LieAlgebra(dim, br, name=name, check=check)


# ---------------------------------------------------------------------------
# bilinear forms


class BilinearForm:
    """Symmetric-or-not exact dim x dim matrix lambda(t_a, t_b)."""

    def __init__(self, matrix):
        self.matrix = [[Fraction(v) for v in row] for row in matrix]
        n = len(self.matrix)
        if any(len(row) != n for row in self.matrix):
            raise DimensionMismatch("bilinear form must be square")

    @property
    def dim(self):
        return len(self.matrix)

    @classmethod
    def zero(cls, n):
        return cls([[0] * n for _ in range(n)])

    def __call__(self, a, b):
        return self.matrix[a][b]

    def evaluate(self, x, y):
        return sum((xa * yb * self.matrix[a][b] for a, xa in x.items() for b, yb in y.items()), Fraction(0))

    def is_symmetric(self):
        n = self.dim
        return all(self.matrix[a][b] == self.matrix[b][a] for a in range(n) for b in range(a + 1, n))

    def scaled(self, k):
        k = Fraction(k)
        return BilinearForm([[k * v for v in row] for row in self.matrix])

    def __add__(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch("forms of different size")
        return BilinearForm([[u + v for u, v in zip(r, s)] for r, s in zip(self.matrix, other.matrix)])

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, BilinearForm) and self.matrix == other.matrix

    def is_zero(self):
        return all(v == 0 for row in self.matrix for v in row)

    def inverse(self):
        """Exact inverse matrix (Gauss-Jordan); raises if degenerate."""
        n = self.dim
        aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self.matrix)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if piv is None:
                raise ValueError("degenerate bilinear form")
            aug[col], aug[piv] = aug[piv], aug[col]
            p = aug[col][col]
            aug[col] = [v / p for v in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [u - f * v for u, v in zip(aug[r], aug[col])]
        return [row[n:] for row in aug]

    def __repr__(self):
        return f"BilinearForm({[[str(v) for v in row] for row in self.matrix]})"


def _matmul(x, y):
    n, k, m = len(x), len(y), len(y[0]) if y else 0
    return [[sum((x[i][t] * y[t][j] for t in range(k)), Fraction(0)) for j in range(m)] for i in range(n)]


def _trace(x):
    return sum((x[i][i] for i in range(len(x))), Fraction(0))


def killing_form(g):
    """lambda_ad(A, B) = Tr(ad_A ad_B)."""
    ads = [g.ad_matrix(a) for a in range(g.dim)]
    return BilinearForm([[_trace(_matmul(ads[a], ads[b])) for b in range(g.dim)] for a in range(g.dim)])


class Representation:
    """Exact matrices rho(t_a); the homomorphism property is checked."""

    def __init__(self, g, matrices, name="rep", check=True):
        self.g = g
        self.name = name
        self.matrices = [[[Fraction(v) for v in row] for row in m] for m in matrices]
        if len(self.matrices) != g.dim:
            raise DimensionMismatch("one matrix per basis element is required")
        self.dim = len(self.matrices[0]) if self.matrices else 0
        if check:
            bad = self.violation()
            if bad is not None:
                raise ValueError(f"not a representation: fails on ({bad[0]},{bad[1]})")

    def violation(self):
        g = self.g
        for a in range(g.dim):
            for b in range(g.dim):
                lhs = _matmul(self.matrices[a], self.matrices[b])
                rhs = _matmul(self.matrices[b], self.matrices[a])
                comm = [[u - v for u, v in zip(r, s)] for r, s in zip(lhs, rhs)]
                want = [[Fraction(0)] * self.dim for _ in range(self.dim)]
                for c, v in g.bracket_basis(a, b).items():
                    for i in range(self.dim):
                        for j in range(self.dim):
                            want[i][j] += v * self.matrices[c][i][j]
                if comm != want:
                    return (a, b)
        return None

    @classmethod
    def trivial(cls, g, dim=1):
        return cls(g, [[[0] * dim for _ in range(dim)] for _ in range(g.dim)], name="trivial")

    @classmethod
    def adjoint(cls, g):
        return cls(g, [g.ad_matrix(a) for a in range(g.dim)], name="adjoint")


def trace_form(g, rho):
    """lambda_rho(A, B) = Tr rho(A) rho(B)."""
    if rho.g is not g and rho.g.dim != g.dim:
        raise DimensionMismatch("representation belongs to another algebra")
    ms = rho.matrices
    return BilinearForm([[_trace(_matmul(ms[a], ms[b])) for b in range(g.dim)] for a in range(g.dim)])


def invariance_check(g, lam):
    """(True, None) if lam([X,Y],Z) + lam(Y,[X,Z]) = 0 on all basis triples.

    On failure returns (False, (x, y, z)) for the first bad triple.
    """
    if lam.dim != g.dim:
        raise DimensionMismatch("form size does not match the algebra")
    n = g.dim
    for x in range(n):
        for y in range(n):
            for z in range(n):
                s = Fraction(0)
                for c, v in g.bracket_basis(x, y).items():
                    s += v * lam(c, z)
                for c, v in g.bracket_basis(x, z).items():
                    s += v * lam(y, c)
                if s != 0:
                    return False, (x, y, z)
    return True, None


# ---------------------------------------------------------------------------
# registry

_DUAL_COXETER = {"sl2": 2, "so3": 2, "so4": 2, "so5": 3, "so6": 4}


def dual_coxeter(g):
    """h-dual from the registry; so4 = sl2 + sl2 uses the common value 2."""
    h = _DUAL_COXETER.get(g.name)
    if h is None:
        raise NotSimple(f"no dual Coxeter number registered for {g.name!r}")
    return h


def normalized_killing(g):
    """lambda_0 = lambda_ad / (2 h-dual)."""
    h = dual_coxeter(g)
    return killing_form(g).scaled(Fraction(1, 2 * h))


def abelian(n):
    return LieAlgebra(n, {}, name=f"abelian{n}" if n != 1 else "abelian1",
                      basis_names=[f"t{i + 1}" for i in range(n)] if n > 1 else ["t"])


def sl2():
    # basis e, h, f with [h,e]=2e, [h,f]=-2f, [e,f]=h
    e, h, f = 0, 1, 2
    br = {(h, e): {e: 2}, (h, f): {f: -2}, (e, f): {h: 1}}
    return LieAlgebra(3, br, name="sl2", basis_names=["e", "h", "f"])


def sl2_fundamental(g=None):
    g = g or sl2()
    return Representation(g, [[[0, 1], [0, 0]], [[1, 0], [0, -1]], [[0, 0], [1, 0]]], name="fundamental")


def so_pairs(d):
    return list(combinations(range(d), 2))


def so_matrix(d, a):
    """Standard matrix E_ij - E_ji of the a-th basis element (i<j)."""
    i, j = so_pairs(d)[a]
    m = [[Fraction(0)] * d for _ in range(d)]
    m[i][j] = Fraction(1)
    m[j][i] = Fraction(-1)
    return m


def so(d):
    """so_d in the basis E_ij - E_ji, i<j, ordered lexicographically."""
    pairs = so_pairs(d)
    mats = [so_matrix(d, a) for a in range(len(pairs))]
    index = {p: a for a, p in enumerate(pairs)}
    br = {}
    for a in range(len(pairs)):
        for b in range(len(pairs)):
            x, y = mats[a], mats[b]
            comm = [[u - v for u, v in zip(r, s)] for r, s in zip(_matmul(x, y), _matmul(y, x))]
            out = {}
            for (i, j), c in index.items():
                if comm[i][j] != 0:
                    out[c] = comm[i][j]
            if out:
                br[(a, b)] = out
    names = [f"M{i + 1}{j + 1}" for i, j in pairs]
    return LieAlgebra(len(pairs), br, name=f"so{d}", basis_names=names)


def so_standard(d, g=None):
    g = g or so(d)
    return Representation(g, [so_matrix(d, a) for a in range(g.dim)], name="standard")


def half_trace_form(d):
    """lambda_0(A, B) = Tr(AB)/2 on so_d; the level-one normalization."""
    g = so(d)
    return trace_form(g, so_standard(d, g)).scaled(Fraction(1, 2))


def get_algebra(name):
    """Registry lookup: abelianN, sl2, so3 .. so6."""
    name = name.strip().lower()
    if name == "sl2":
        return sl2()
    if name.startswith("abelian"):
        rest = name[len("abelian"):].strip("()[] ")
        return abelian(int(rest) if rest else 1)
    if name.startswith("so"):
        d = int(name[2:])
        if 2 <= d <= 6:
            return so(d)
    raise KeyError(f"unknown algebra {name!r}")
