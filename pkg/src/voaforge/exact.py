"""Exact scalars and sparse linear algebra.

Scalars are ``fractions.Fraction`` plus a small Gaussian-rational type for
the Clifford ground module, which has no rational matrix model.  Ranks and
kernels are computed by fraction-free elimination on integral rows.
"""

from fractions import Fraction
from math import gcd, lcm
import re

Rational = Fraction


class GaussRational:
    """x + y*i with x, y rational and y != 0.

    Values with zero imaginary part are never built; ``gauss`` returns a
    plain rational instead, so equality and hashing stay consistent.
    Integral parts are stored as ints to keep Z[i] arithmetic fast.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = _norm(re)
        self.im = _norm(im)

    @staticmethod
    def _parts(z):
        if isinstance(z, GaussRational):
            return z.re, z.im
        if isinstance(z, (int, Fraction)):
            return z, 0
        return None

    def __add__(self, other):
        t = type(other)
        if t is GaussRational:
            im = self.im + other.im
            return _mk(self.re + other.re, im) if im else _norm(self.re + other.re)
        if t is int or t is Fraction or isinstance(other, (int, Fraction)):
            return _mk(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return _mk(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return _mk(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        t = type(other)
        if t is int or t is Fraction:
            if not other:
                return 0
            return _mk(self.re * other, self.im * other)
        if t is GaussRational:
            a, b = other.re, other.im
            re, im = self.re * a - self.im * b, self.re * b + self.im * a
            return _mk(re, im) if im else _norm(re)
        if isinstance(other, (int, Fraction)):
            return self * Fraction(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = Fraction(p[0]), Fraction(p[1])
        n = a * a + b * b
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return gauss((self.re * a + self.im * b) / n, (self.im * a - self.re * b) / n)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return Fraction(p[0]) * self.inverse()

    def inverse(self):
        n = Fraction(self.re * self.re + self.im * self.im)
        return gauss(self.re / n, -self.im / n)

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return _mk(self.re, -self.im)

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash(("gauss", self.re, self.im))

    def __bool__(self):
        return True

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


def _norm(x):
    t = type(x)
    if t is int:
        return x
    if t is Fraction:
        return x.numerator if x.denominator == 1 else x
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _mk(re, im):
    # im is known nonzero
    g = GaussRational.__new__(GaussRational)
    # exact type tests: isinstance against Fraction goes through the ABC machinery
    g.re = re.numerator if type(re) is Fraction and re.denominator == 1 else re
    g.im = im.numerator if type(im) is Fraction and im.denominator == 1 else im
    return g


def gauss(re, im=0):
    """Build x + y*i, collapsing to a rational when y == 0."""
    if not im:
        return _norm(re)
    return _mk(re if isinstance(re, (int, Fraction)) else Fraction(re),
               im if isinstance(im, (int, Fraction)) else Fraction(im))


def real_part(z):
    return z.re if isinstance(z, GaussRational) else Fraction(z)


def imag_part(z):
    return z.im if isinstance(z, GaussRational) else Fraction(0)


def format_rational(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(z):
    """Exact text form: ``p/q`` or ``p/q+r/si``; never a decimal."""
    if isinstance(z, GaussRational):
        re_, im_ = z.re, z.im
        sign = "+" if im_ > 0 else "-"
        im_txt = f"{abs(im_).numerator}/{abs(im_).denominator}i"
        if re_ == 0:
            return ("-" if im_ < 0 else "") + im_txt
        return f"{format_rational(re_)}{sign}{im_txt}"
    return format_rational(z)


_RAT = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text):
    """Parse ``p`` or ``p/q`` exactly; decimals are rejected."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    m = _RAT.match(str(text))
    if not m:
        raise ValueError(f"not an exact rational: {text!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(m.group(1)), den)


def parse_scalar(text):
    """Parse a rational or a Gaussian rational written as ``a+bi``."""
    s = str(text).replace(" ", "")
    if not s.endswith("i"):
        return parse_rational(s)
    body = s[:-1]
    # split at the last sign that is not leading
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut <= 0:
        return gauss(0, parse_rational(body or "1") if body not in ("+", "-") else int(body + "1"))
    return gauss(parse_rational(body[:cut]), parse_rational(body[cut:]))


# ---------------------------------------------------------------------------
# sparse vectors and matrices


class SparseVector:
    """Map from sortable basis keys to nonzero exact scalars."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}

    def __getitem__(self, key):
        return self.entries.get(key, 0)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries))

    def items(self):
        return sorted(self.entries.items())

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.entries == other.entries

    def __add__(self, other):
        out = dict(self.entries)
        for k, v in other.entries.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return SparseVector(out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        if c == 0:
            return SparseVector()
        return SparseVector({k: v * c for k, v in self.entries.items()})

    __rmul__ = __mul__

    def is_zero(self):
        return not self.entries

    def __repr__(self):
        return f"SparseVector({dict(self.items())!r})"


class SparseMatrix:
    """Linear map between registered bases.

    ``columns[j]`` is the image of ``domain[j]`` as a SparseVector over
    codomain keys.
    """

    def __init__(self, domain, codomain, columns):
        self.domain = list(domain)
        self.codomain = list(codomain)
        if len(columns) != len(self.domain):
            raise ValueError("one column per domain key is required")
        known = set(self.codomain)
        for col in columns:
            for k in col.entries:
                if k not in known:
                    raise KeyError(f"row key {k!r} not in codomain basis")
        self.columns = list(columns)

    @classmethod
    def from_rows(cls, rows):
        """Dense list-of-lists constructor with integer row/column keys."""
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols = [SparseVector({i: rows[i][j] for i in range(nrows)}) for j in range(ncols)]
        return cls(range(ncols), range(nrows), cols)

    @property
    def shape(self):
        return len(self.codomain), len(self.domain)

    def row_dicts(self):
        """Rows as dicts keyed by column index."""
        index = {k: i for i, k in enumerate(self.codomain)}
        rows = [dict() for _ in self.codomain]
        for j, col in enumerate(self.columns):
            for k, v in col.entries.items():
                rows[index[k]][j] = v
        return rows

    def transpose(self):
        rows = self.row_dicts()
        cols = [SparseVector(r) for r in rows]
        return SparseMatrix(self.codomain, self.domain,
                            [SparseVector({self.domain[j]: v for j, v in c.entries.items()}) for c in cols])

    def apply(self, vec):
        """Image of a SparseVector over domain keys."""
        index = {k: i for i, k in enumerate(self.domain)}
        out = SparseVector()
        for k, v in vec.entries.items():
            out = out + self.columns[index[k]] * v
        return out

    def is_zero(self):
        return all(c.is_zero() for c in self.columns)


# ---------------------------------------------------------------------------
# fraction-free elimination


def _is_gauss(v):
    return isinstance(v, GaussRational)


def _integral_row(row):
    """Scale a row of exact scalars to integral entries (Z or Z[i])."""
    dens = []
    for v in row.values():
        if _is_gauss(v):
            dens.append(v.re.denominator)
            dens.append(v.im.denominator)
        else:
            dens.append(Fraction(v).denominator)
    m = lcm(*dens) if dens else 1
    out = {}
    for j, v in row.items():
        if _is_gauss(v):
            out[j] = _GI(int(v.re * m), int(v.im * m))
        else:
            out[j] = int(Fraction(v) * m)
    return out


class _GI:
    """Gaussian integer used only inside elimination."""

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = a, b

    def __mul__(self, o):
        if isinstance(o, int):
            return _GI(self.a * o, self.b * o)
        return _GI(self.a * o.a - self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __sub__(self, o):
        if isinstance(o, int):
            return _GI(self.a - o, self.b)
        return _GI(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return _GI(o - self.a, -self.b)

    def __bool__(self):
        return bool(self.a or self.b)

    def norm(self):
        return self.a * self.a + self.b * self.b

    def divmod_round(self, o):
        # nearest-integer quotient in Z[i]
        n = o.norm()
        x = self.a * o.a + self.b * o.b
        y = self.b * o.a - self.a * o.b
        q = _GI(_round_div(x, n), _round_div(y, n))
        return q, self - q * o

    def exact_div(self, o):
        if isinstance(o, int):
            return _GI(self.a // o, self.b // o)
        q, r = self.divmod_round(o)
        assert not r, "inexact Gaussian division"
        return q

    def to_scalar(self):
        return gauss(self.a, self.b)


def _round_div(x, n):
    return (2 * x + n) // (2 * n)


def _as_gi(v):
    return v if isinstance(v, _GI) else _GI(v, 0)


def _gcd_entries(values):
    vals = list(values)
    if all(isinstance(v, int) for v in vals):
        g = 0
        for v in vals:
            g = gcd(g, v)
        return g
    g = _GI(0, 0)
    for v in vals:
        a, b = g, _as_gi(v)
        while b:
            _, r = a.divmod_round(b)
            a, b = b, r
        g = a
    return g


def _primitive(row):
    if not row:
        return row
    g = _gcd_entries(row.values())
    if isinstance(g, int):
        if g in (0, 1):
            return row
        return {j: v // g for j, v in row.items()}
    if g.norm() == 1:
        return row
    return {j: _as_gi(v).exact_div(g) for j, v in row.items()}


def _echelon(rows):
    """Fraction-free row echelon form.

    Each elimination step replaces ``r`` by ``p*r - a*pivot_row`` and
    divides out the row content, so entries stay integral and bounded by
    the size of minors rather than growing geometrically.
    Returns a list of (pivot column, integral row) pairs.
    """
    work = [_primitive(_integral_row(r)) for r in rows if r]
    work = [r for r in work if r]
    pivots = []
    while work:
        # pivot on the smallest leading column; prefer the sparsest row
        lead = min(min(r) for r in work)
        cand = [r for r in work if lead in r]
        prow = min(cand, key=len)
        rest = []
        p = prow[lead]
        for r in work:
            if r is prow:
                continue
            a = r.get(lead)
            if a is None:
                rest.append(r)
                continue
            new = {}
            for j, v in r.items():
                new[j] = p * v
            for j, v in prow.items():
                s = new.get(j, 0) - a * v
                if s:
                    new[j] = s
                else:
                    new.pop(j, None)
            new.pop(lead, None)
            new = _primitive(new)
            if new:
                rest.append(new)
        pivots.append((lead, prow))
        work = rest
    return pivots


def rank(m):
    """Exact rank over the rationals (or Q(i))."""
    if isinstance(m, SparseMatrix):
        rows = m.row_dicts()
    else:
        rows = [dict(enumerate(r)) for r in m]
        rows = [{j: v for j, v in r.items() if v != 0} for r in rows]
    return len(_echelon(rows))


def _to_scalar(v):
    v = v.to_scalar() if isinstance(v, _GI) else v
    return v if isinstance(v, GaussRational) else Fraction(v)


def kernel_basis(m):
    """Exact basis of the null space as SparseVectors over domain keys."""
    if not isinstance(m, SparseMatrix):
        m = SparseMatrix.from_rows(m)
    ncols = len(m.domain)
    piv = _echelon(m.row_dicts())
    # back-substitute from the last pivot upward
    piv.sort(key=lambda t: t[0])
    pivot_cols = {c for c, _ in piv}
    free = [j for j in range(ncols) if j not in pivot_cols]
    basis = []
    for f in free:
        sol = {f: Fraction(1)}
        for c, row in reversed(piv):
            s = 0
            for j, v in row.items():
                if j != c and j in sol:
                    s = s + _to_scalar(v) * sol[j]
            if s != 0:
                sol[c] = -s / _to_scalar(row[c])
        basis.append(SparseVector({m.domain[j]: v for j, v in sol.items()}))
    return basis


def nullity(m):
    cols = len(m.domain) if isinstance(m, SparseMatrix) else (len(m[0]) if m else 0)
    return cols - rank(m)
