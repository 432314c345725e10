"""Expression language for modes, brackets and ground vectors.

    expr   := term (('+'|'-') term)*
    term   := ['+'|'-'] rational? factor+
    factor := SYM '[' args ']' | '[' expr ',' expr ']' | '|' label '>' | '(' expr ')'

Rationals are ``p`` or ``p/q``, with an ``i`` suffix for imaginary values.
Mode symbols are a, b, del, phi, e (1-based index) and J (basis name or
1-based index).
"""

import re
from dataclasses import dataclass
from fractions import Fraction

from .exact import GaussRational, gauss
from .fock import FAMILIES, FockState, is_odd

SYMBOLS = ("a", "b", "del", "phi", "e", "J")


class DSLSyntaxError(SyntaxError):
    def __init__(self, msg, text, pos):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.lineno = line
        self.offset = col
        self.text = text


class UnknownSymbol(KeyError):
    pass


class EvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Mode:
    symbol: str
    index: object  # int (1-based) or a basis name
    n: int


@dataclass(frozen=True)
class Bracket:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Ground:
    label: str


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Scaled:
    coeff: object
    body: object


@dataclass(frozen=True)
class Sum:
    terms: tuple


# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?i?)
  | (?P<ground>\|[^>|]*>)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\](),+\-])
""", re.VERBOSE)


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _scalar(tok):
    if tok.endswith("i"):
        return gauss(0, Fraction(tok[:-1]))
    return Fraction(tok)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None, kind=None):
        tok = self.toks[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            got = tok[1] or "end of input"
            raise DSLSyntaxError(f"expected {want!r}, found {got!r}", self.text, tok[2])
        self.i += 1
        return tok

    def error(self, msg):
        raise DSLSyntaxError(msg, self.text, self.peek()[2])

    def expr(self):
        terms = [self.term(first=True)]
        while self.peek()[1] in ("+", "-"):
            terms.append(self.term(first=False))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self, first):
        sign = None
        if self.peek()[1] in ("+", "-"):
            sign = self.take()[1]
        elif not first:
            self.error("expected '+' or '-'")
        coeff = None
        if self.peek()[0] == "num":
            coeff = _scalar(self.take()[1])
        factors = []
        while self._starts_factor():
            factors.append(self.factor())
        if not factors:
            self.error("expected a mode, bracket, ground vector or group")
        body = factors[0] if len(factors) == 1 else Product(tuple(factors))
        if sign == "-":
            coeff = -(coeff if coeff is not None else 1)
        if coeff is not None:
            return Scaled(coeff, body)
        return body

    def _starts_factor(self):
        kind, val, _ = self.peek()
        return kind in ("ident", "ground") or val in ("[", "(")

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "ground":
            self.take()
            return Ground(val[1:-1].strip())
        if val == "(":
            self.take("(")
            inner = self.expr()
            self.take(")")
            return inner
        if val == "[":
            self.take("[")
            lhs = self.expr()
            self.take(",")
            rhs = self.expr()
            self.take("]")
            return Bracket(lhs, rhs)
        sym = self.take(kind="ident")[1]
        self.take("[")
        index = self._arg(allow_name=True)
        self.take(",")
        n = self._arg(allow_name=False)
        self.take("]")
        return Mode(sym, index, n)

    def _arg(self, allow_name):
        neg = False
        if self.peek()[1] in ("+", "-"):
            neg = self.take()[1] == "-"
        kind, val, pos = self.peek()
        if kind == "ident" and allow_name and not neg:
            self.take()
            return val
        if kind == "num" and val.isdigit():
            self.take()
            return -int(val) if neg else int(val)
        raise DSLSyntaxError("expected an integer index", self.text, pos)


def parse_expr(text):
    p = _Parser(text)
    out = p.expr()
    if p.peek()[0] != "end":
        p.error(f"unexpected {p.peek()[1]!r}")
    return out


# ---------------------------------------------------------------------------
# printer


def _fmt_coeff(c):
    if isinstance(c, GaussRational):
        if c.re != 0:
            raise ValueError("only rational or purely imaginary coefficients are printable")
        q = Fraction(c.im)
        unit = "i"
    else:
        q = Fraction(c)
        unit = ""
    body = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return body + unit


def _negative(c):
    if isinstance(c, GaussRational):
        return c.re == 0 and c.im < 0
    return c < 0


def print_expr(node, _in_product=False):
    if isinstance(node, Mode):
        return f"{node.symbol}[{node.index},{node.n}]"
    if isinstance(node, Ground):
        return f"|{node.label}>"
    if isinstance(node, Bracket):
        return f"[{print_expr(node.lhs)}, {print_expr(node.rhs)}]"
    if isinstance(node, Product):
        return " ".join(_factor_text(f) for f in node.factors)
    if isinstance(node, Scaled):
        # a scaled body that is itself scaled or a sum needs a group
        body = node.body
        text = _factor_text(body) if isinstance(body, (Scaled, Sum)) else print_expr(body)
        return f"{_fmt_coeff(node.coeff)} {text}"
    if isinstance(node, Sum):
        parts = [print_expr(node.terms[0])]
        for t in node.terms[1:]:
            if isinstance(t, Scaled) and _negative(t.coeff):
                parts.append("- " + print_expr(Scaled(-t.coeff, t.body)))
            else:
                parts.append("+ " + print_expr(t))
        return " ".join(parts)
    raise TypeError(f"not an expression node: {node!r}")


def _factor_text(node):
    if isinstance(node, (Sum, Scaled, Product)):
        return f"({print_expr(node)})"
    return print_expr(node)


# ---------------------------------------------------------------------------
# evaluation


def resolve_mode(node, space):
    if node.symbol not in SYMBOLS:
        raise UnknownSymbol(f"unknown symbol {node.symbol!r}")
    fam = node.symbol
    if isinstance(node.index, str):
        if fam != "J" or space.g is None:
            raise UnknownSymbol(f"{fam} takes a numeric index, not {node.index!r}")
        try:
            idx = space.g.index(node.index)
        except (KeyError, ValueError):
            raise UnknownSymbol(f"no basis element {node.index!r} in {space.g.name}") from None
    else:
        idx = node.index - 1
    x = (fam, idx, node.n)
    space.check_generator(x)
    return x


def _parity(node, space):
    if isinstance(node, Mode):
        return int(is_odd(resolve_mode(node, space)))
    if isinstance(node, Product):
        return sum(_parity(f, space) for f in node.factors) % 2
    if isinstance(node, Scaled):
        return _parity(node.body, space)
    if isinstance(node, Bracket):
        return (_parity(node.lhs, space) + _parity(node.rhs, space)) % 2
    if isinstance(node, Sum):
        ps = {_parity(t, space) for t in node.terms}
        if len(ps) != 1:
            raise EvaluationError("bracket of an operator with mixed parity")
        return ps.pop()
    raise EvaluationError("a ground vector is not an operator")


def apply_operator(node, s):
    """The operator denoted by ``node`` applied to the state ``s``."""
    space = s.space
    if isinstance(node, Mode):
        return s.apply(resolve_mode(node, space))
    if isinstance(node, Product):
        for f in reversed(node.factors):
            s = apply_operator(f, s)
        return s
    if isinstance(node, Scaled):
        return apply_operator(node.body, s) * node.coeff
    if isinstance(node, Sum):
        out = space.zero()
        for t in node.terms:
            out = out + apply_operator(t, s)
        return out
    if isinstance(node, Bracket):
        sign = -1 if _parity(node.lhs, space) and _parity(node.rhs, space) else 1
        ab = apply_operator(node.lhs, apply_operator(node.rhs, s))
        ba = apply_operator(node.rhs, apply_operator(node.lhs, s))
        return ab - ba * sign
    raise EvaluationError("a ground vector cannot act as an operator")


def _ground(node, space):
    label = node.label
    if label.startswith("s:"):
        g = int(label[2:])
    elif label.isdigit():
        g = int(label)
    else:
        raise EvaluationError(f"unknown ground label {label!r}")
    if not 0 <= g < space.ground_dim:
        raise EvaluationError(f"ground vector {label!r} out of range")
    return space.vacuum(g)


def evaluate(node, space):
    """A state-valued expression, i.e. operators ending in a ground vector."""
    if isinstance(node, str):
        node = parse_expr(node)
    if isinstance(node, Ground):
        return _ground(node, space)
    if isinstance(node, Scaled):
        return evaluate(node.body, space) * node.coeff
    if isinstance(node, Sum):
        out = space.zero()
        for t in node.terms:
            out = out + evaluate(t, space)
        return out
    if isinstance(node, Product):
        s = evaluate(node.factors[-1], space)
        for f in reversed(node.factors[:-1]):
            s = apply_operator(f, s)
        return s
    raise EvaluationError("expression does not end in a ground vector")


def state_text(s):
    """DSL text of a state; parses back to the same state."""
    from .fock import format_state
    return format_state(s)
