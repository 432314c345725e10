"""Batch command line: ``voaforge <command> [--config path] [--format text|json] [flags]``.

Flags override values from the JSON config file.  Exit status is 0 when
every check passes, 1 on a check failure and 2 on usage or config errors.
"""

import argparse
import json
import sys
import time
from fractions import Fraction

from . import brst, dsl, spinor, voa
from .exact import parse_rational
from .fock import FockSpace
from .liealg import (BilinearForm, LieAlgebra, NotSimple, Representation, from_json, get_algebra,
                     mutate_structure_constant, normalized_killing, sl2_fundamental)
from .report import Report, emit_report


class ConfigError(ValueError):
    """A config value is missing or malformed; ``path`` names the field."""

    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ---------------------------------------------------------------------------
# config fields


def _positive(path, value, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, str)) or not str(value).strip().isdigit():
        raise ConfigError(path, f"expected a {'nonnegative' if allow_zero else 'positive'} integer, got {value!r}")
    n = int(value)
    if n == 0 and not allow_zero:
        raise ConfigError(path, f"expected a positive integer, got {value!r}")
    return n


def _rational(path, value):
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    try:
        return parse_rational(str(value))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(path, f"expected a rational such as -1/2, got {value!r}") from None


def _choice(path, value, options):
    if value not in options:
        raise ConfigError(path, f"expected one of {', '.join(options)}, got {value!r}")
    return value


def load_algebra(value, path="algebra"):
    """Registry name, path to a JSON file, or an inline JSON object."""
    if isinstance(value, dict):
        try:
            return from_json(value)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(path, f"invalid custom algebra: {exc}") from None
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a registry name or JSON object, got {value!r}")
    if value.endswith(".json"):
        try:
            with open(value) as fh:
                return load_algebra(json.load(fh), path)
        except OSError as exc:
            raise ConfigError(path, f"cannot read {value}: {exc.strerror}") from None
    try:
        return get_algebra(value)
    except (KeyError, ValueError):
        raise ConfigError(path, f"unknown algebra {value!r}") from None


def level_form(g, value, path="level"):
    """A rational k means k times the normalized Killing form; abelian
    algebras use the identity form instead.  A list of rows is taken
    as the full matrix."""
    if isinstance(value, list):
        try:
            rows = [[_rational(f"{path}[{i}][{j}]", x) for j, x in enumerate(row)] for i, row in enumerate(value)]
        except TypeError:
            raise ConfigError(path, "expected a list of rows") from None
        if len(rows) != g.dim or any(len(r) != g.dim for r in rows):
            raise ConfigError(path, f"expected a {g.dim}x{g.dim} matrix for {g.name}")
        return BilinearForm(rows)
    k = _rational(path, value)
    if g.is_abelian():
        return BilinearForm([[k if i == j else Fraction(0) for j in range(g.dim)] for i in range(g.dim)])
    try:
        return normalized_killing(g).scaled(k)
    except NotSimple:
        raise ConfigError(path, f"{g.name} has no normalized Killing form, give a matrix") from None


def level_scalar(value, path="level"):
    if isinstance(value, list):
        raise ConfigError(path, "this command needs a rational multiple of the normalized form")
    return _rational(path, value)


def _ground_rep(g, name, path="ground"):
    if name in (None, "trivial"):
        return None
    if name == "adjoint":
        return Representation.adjoint(g)
    if name == "fundamental":
        if g.name != "sl2":
            raise ConfigError(path, "the fundamental ground module is available for sl2 only")
        return sl2_fundamental(g)
    raise ConfigError(path, f"expected trivial, adjoint or fundamental, got {name!r}")


def _two_form(value, d, path="beta"):
    """Entries [exponent list, [j, k], coeff] meaning b^exp db^j ^ db^k (1-based j, k)."""
    out = {}
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of [exponents, [j, k], coeff] entries")
    for i, entry in enumerate(value):
        p = f"{path}[{i}]"
        try:
            exp, (j, k), c = entry
        except (TypeError, ValueError):
            raise ConfigError(p, "expected [exponents, [j, k], coeff]") from None
        if len(exp) != d or any(not isinstance(x, int) or x < 0 for x in exp):
            raise ConfigError(f"{p}[0]", f"expected {d} nonnegative exponents")
        if not (1 <= j <= d and 1 <= k <= d) or j == k:
            raise ConfigError(f"{p}[1]", f"expected two distinct indices in 1..{d}")
        out[(tuple(exp), (j - 1, k - 1))] = _rational(f"{p}[2]", c)
    return out


# ---------------------------------------------------------------------------
# commands


def _axiom_report(r, name, res, v):
    detail = f"{res.checked} instances, {res.inconclusive} beyond the degree cutoff"
    if not res.ok:
        detail = f"identity {res.identity} fails"
    r.add(name, res.ok, detail, voa.witness_text(v, res.witness))


def cmd_check_axioms(cfg):
    """Vertex algebroid axioms for a Lie or CDO algebroid."""
    kind = _choice("algebroid", cfg["algebroid"], ("lie", "cdo"))
    r = Report()
    if kind == "cdo":
        d = _positive("d", cfg["d"])
        deg = _positive("degree", cfg["degree"])
        v = voa.cdo_algebroid(d, deg)
    else:
        g = load_algebra(cfg["algebra"])
        lam = level_form(g, cfg["level"])
        if cfg.get("mutate") is not None:
            g = _mutated(g, cfg["mutate"])
        v = voa.lie_algebroid(g, lam, check=False)
    r.values["algebroid"] = v.name
    _axiom_report(r, "axioms", voa.algebroid_axiom_check(v), v)
    return r


def _mutated(g, spec, path="mutate"):
    """'a,b,c' (1-based) adds 1 to the coefficient of t_c in [t_a, t_b]."""
    try:
        a, b, c = (int(x) - 1 for x in str(spec).split(","))
    except ValueError:
        raise ConfigError(path, f"expected 'a,b,c', got {spec!r}") from None
    if not all(0 <= x < g.dim for x in (a, b, c)) or a == b:
        raise ConfigError(path, f"indices must lie in 1..{g.dim} with a != b")
    return mutate_structure_constant(g, a, b, c)


def _delta_table(value, d, path="delta"):
    """Entries [j, exponents, k, coeff]: Delta(d_j) gains coeff b^exp db^k (1-based j, k)."""
    if value is None:
        return {0: {(tuple([0] * d), 0): Fraction(1)}}
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of [j, exponents, k, coeff] entries")
    table = {}
    for i, entry in enumerate(value):
        p = f"{path}[{i}]"
        try:
            j, exp, k, c = entry
        except (TypeError, ValueError):
            raise ConfigError(p, "expected [j, exponents, k, coeff]") from None
        if not isinstance(j, int) or not 1 <= j <= d or not isinstance(k, int) or not 1 <= k <= d:
            raise ConfigError(p, f"indices j and k must lie in 1..{d}")
        if not isinstance(exp, list) or len(exp) != d or any(not isinstance(x, int) or x < 0 for x in exp):
            raise ConfigError(f"{p}[1]", f"expected {d} nonnegative exponents")
        row = table.setdefault(j - 1, {})
        row[(tuple(exp), k - 1)] = row.get((tuple(exp), k - 1), 0) + _rational(f"{p}[3]", c)
    return table


def _twist_inputs(cfg):
    """Delta = (A-linear table) + 1/2 iota beta on the truncated CDO algebroid."""
    d = _positive("d", cfg["d"])
    deg = _positive("degree", cfg["degree"])
    v = voa.cdo_algebroid(d, deg)
    beta = _two_form(cfg["beta"], d) if cfg.get("beta") is not None else {}
    table = _delta_table(cfg.get("delta"), d) if cfg.get("delta") is not None or not beta else {}
    lin = voa.linear_delta(v, table)
    two = voa.two_form_delta(v, beta)

    def delta(X):
        out = dict(lin(X))
        for key, c in two(X).items():
            out[key] = out.get(key, 0) + c
        return {key: c for key, c in out.items() if c}

    return v, delta


def cmd_check_morphism(cfg):
    """Morphism conditions for the twist by a two-form."""
    v, delta = _twist_inputs(cfg)
    w = voa.delta_twist(v, delta)
    r = Report()
    r.values["algebroid"] = v.name
    r.values["changed"] = voa.compare_algebroids(v, w) is not None
    res = voa.morphism_check(v, w, delta)
    _axiom_report(r, "morphism", res, v)
    return r


def cmd_twist(cfg):
    """Twist a CDO algebroid by a two-form and re-check it."""
    v, delta = _twist_inputs(cfg)
    w = voa.delta_twist(v, delta)
    r = Report()
    r.values["algebroid"] = w.name
    r.values["changed"] = voa.compare_algebroids(v, w) is not None
    _axiom_report(r, "twisted-axioms", voa.algebroid_axiom_check(w), w)
    _axiom_report(r, "morphism", voa.morphism_check(v, w, delta), v)
    V = voa.free_generate(w, 2)
    x = voa.extract_algebroid(V, V.state_of_vector)
    diff = voa.compare_algebroids(w, x)
    r.add("extraction-round-trip", diff is None, "extracted maps equal the twisted maps",
          "" if diff is None else str(diff))
    return r


def cmd_virasoro(cfg):
    """Conformal vector check with measured central charge."""
    system = _choice("system", cfg["system"], ("betagamma", "ghost", "sugawara", "heisenberg"))
    N = _positive("modes", cfg["modes"])
    W = _positive("wmax", cfg["wmax"])
    if system == "betagamma":
        d = _positive("d", cfg["d"])
        nu, claim = voa.betagamma_conformal(d), 2 * d
    elif system == "ghost":
        d = _positive("d", cfg["d"])
        nu, claim = voa.ghost_conformal(d), -2 * d
    elif system == "heisenberg":
        d = _positive("d", cfg["d"])
        g = get_algebra(f"abelian{d}")
        nu, claim = voa.sugawara(g, lam=level_form(g, 1)), d
    else:
        g = load_algebra(cfg["algebra"])
        k = level_scalar(cfg["level"])
        try:
            nu = voa.sugawara(g, k)
        except voa.CriticalLevel as exc:
            r = Report()
            r.add("noncritical-level", False, str(exc))
            return r
        claim = voa.sugawara_central_charge(g, k)
    return voa.virasoro_check(nu, c_claim=claim, mode_range=N, weight_range=W)


def cmd_sugawara(cfg):
    """Sugawara vector of V_k(g) and its central charge."""
    g = load_algebra(cfg["algebra"])
    k = level_scalar(cfg["level"])
    N = _positive("modes", cfg["modes"])
    W = _positive("wmax", cfg["wmax"])
    try:
        nu = voa.sugawara(g, k)
    except voa.CriticalLevel as exc:
        r = Report()
        r.add("noncritical-level", False, str(exc))
        return r
    r = voa.virasoro_check(nu, c_claim=voa.sugawara_central_charge(g, k), mode_range=N, weight_range=W)
    r.values["level"] = k
    return r


def cmd_jq_check(cfg):
    """Ghost-number and nilpotency relations of the BRST current."""
    return brst.jq_relations_check(load_algebra(cfg["algebra"]))


def cmd_q0_square(cfg):
    """Square of the BRST zero mode against the displayed operator."""
    g = load_algebra(cfg["algebra"])
    lam = level_form(g, cfg["level"])
    W = _positive("wmax", cfg["wmax"], allow_zero=True)
    res = brst.q0_square(g, lam=lam, weight=W)
    from .liealg import killing_form
    critical = killing_form(g) + lam == BilinearForm.zero(g.dim)
    r = Report()
    r.add("matches-displayed-operator", res.matches, f"{len(res.states)} chain states of weight <= {W}",
          "" if res.mismatch is None else dsl.state_text(res.mismatch))
    r.add("zero-iff-critical", res.is_zero == critical,
          f"square {'vanishes' if res.is_zero else 'is nonzero'}, "
          f"total level {'is' if critical else 'is not'} zero")
    r.values["zero"] = res.is_zero
    return r


def cmd_brst_cohomology(cfg):
    """Blockwise semi-infinite cohomology dimensions."""
    g = load_algebra(cfg["algebra"])
    matter = _choice("matter", cfg["matter"], ("affine", "heisenberg"))
    W = _positive("wmax", cfg["wmax"], allow_zero=True)
    if matter == "heisenberg":
        m = brst.heisenberg_matter(_positive("d", cfg["d"]))
    else:
        lam = level_form(g, cfg["level"])
        m = brst.affine_matter(g, lam=lam, ground_rep=_ground_rep(g, cfg.get("ground")))
    budget = cfg.get("budget")
    budget = None if budget is None else _positive("budget", budget)
    seed = cfg.get("seed")
    r = Report()
    try:
        rep = brst.semiinf_cohomology(g, m, W, budget=budget, shuffle_seed=seed)
    except brst.ObstructionNonzero as exc:
        r.add("square-zero", False, str(exc))
        return r
    except brst.UnboundedBlock as exc:
        r.add("block-budget", False, str(exc))
        return r
    r.add("weight-zero-invariants", rep.dim_H(0, 0) == rep.invariants,
          f"H at (0,0) is {rep.dim_H(0, 0)}, invariants {rep.invariants}")
    euler_ok = all(rep.euler[w] == rep.chain_euler[w] for w in rep.euler)
    r.add("euler-characteristic", euler_ok, "cohomology and chain Euler characteristics agree")
    cols = ["weight", "degree", "dim_chain", "dim_ker", "dim_im", "dim_H"]
    r.tables["cohomology"] = [cols] + [[row[c] for c in cols] for row in rep.rows]
    r.values["invariants"] = rep.invariants
    return r


def cmd_scf_check(cfg):
    """Superconformal relations on the spinor tensor module."""
    d = _positive("dprime", cfg["dprime"])
    ops = spinor.scf_operators(d)
    return spinor.scf_check(ops, N=_positive("modes", cfg["modes"]),
                            W=_positive("wmax", cfg["wmax"], allow_zero=True),
                            degree=_positive("degree", cfg["degree"], allow_zero=True))


def cmd_dirac_kernel(cfg):
    """Kernel of the Dirac operator by weight."""
    d = _positive("dprime", cfg["dprime"])
    budget = cfg.get("budget")
    return spinor.dirac_kernel(spinor.scf_operators(d), _positive("wmax", cfg["wmax"], allow_zero=True),
                               _positive("degree", cfg["degree"], allow_zero=True),
                               budget=None if budget is None else _positive("budget", budget))


def cmd_character(cfg):
    """Graded dimensions against a product formula."""
    module = _choice("module", cfg["module"], ("spinor", "tensor", "vacuum"))
    W = _positive("wmax", cfg["wmax"], allow_zero=True)
    if module != "vacuum":
        return spinor.character(module, _positive("dprime", cfg["dprime"]), W)
    g = load_algebra(cfg["algebra"])
    V = voa.free_generate(voa.lie_algebroid(g, level_form(g, cfg["level"])), W)
    enum = V.dims()
    formula = [1] + [0] * W
    for n in range(1, W + 1):
        formula = spinor.series_mul(formula, spinor.series_power_factor(n, W, g.dim, False), W)
    r = Report()
    r.tables["character"] = [["weight", "enumerated", "formula"]] + [[w, enum[w], formula[w]] for w in range(W + 1)]
    r.add("character", list(enum) == formula, f"vacuum module of {g.name}, weight <= {W}")
    return r


def cmd_eval(cfg):
    """Evaluate a DSL expression on a Fock module."""
    text = cfg.get("expr")
    if not text:
        raise ConfigError("expr", "an expression is required")
    kw = {}
    if cfg.get("weyl"):
        kw["weyl"] = _positive("weyl", cfg["weyl"])
    if cfg.get("bc"):
        kw["bc"] = _positive("bc", cfg["bc"])
    if cfg.get("clifford"):
        kw["clifford"] = _positive("clifford", cfg["clifford"])
    if cfg.get("algebra") is not None:
        g = load_algebra(cfg["algebra"])
        kw["affine"] = (g, level_form(g, cfg["level"]))
    space = FockSpace(**kw)
    try:
        state = dsl.evaluate(dsl.parse_expr(text), space)
    except dsl.DSLSyntaxError as exc:
        raise ConfigError("expr", exc.args[0]) from None
    except (dsl.UnknownSymbol, dsl.EvaluationError, KeyError, ValueError) as exc:
        raise ConfigError("expr", str(exc).strip("'\"")) from None
    r = Report()
    r.values["state"] = dsl.state_text(state)
    return r


# name -> (handler, {field: default}); None means "not used unless given"
COMMANDS = {
    "check-axioms": (cmd_check_axioms, {"algebroid": "lie", "algebra": "sl2", "level": 1, "d": 2,
                                        "degree": 3, "mutate": None}),
    "check-morphism": (cmd_check_morphism, {"d": 2, "degree": 3, "delta": None, "beta": None}),
    "twist": (cmd_twist, {"d": 2, "degree": 3, "delta": None, "beta": None}),
    "virasoro": (cmd_virasoro, {"system": "betagamma", "d": 1, "algebra": "sl2", "level": 1,
                                "modes": 3, "wmax": 4}),
    "sugawara": (cmd_sugawara, {"algebra": "sl2", "level": 1, "modes": 2, "wmax": 3}),
    "jq-check": (cmd_jq_check, {"algebra": "sl2"}),
    "q0-square": (cmd_q0_square, {"algebra": "sl2", "level": -4, "wmax": 2}),
    "brst-cohomology": (cmd_brst_cohomology, {"algebra": "sl2", "matter": "affine", "level": -4,
                                              "ground": "trivial", "d": 1, "wmax": 2, "budget": None,
                                              "seed": None}),
    "scf-check": (cmd_scf_check, {"dprime": 1, "modes": 2, "wmax": 2, "degree": 2}),
    "dirac-kernel": (cmd_dirac_kernel, {"dprime": 1, "wmax": 2, "degree": 2, "budget": None}),
    "character": (cmd_character, {"module": "spinor", "dprime": 1, "algebra": "sl2", "level": 1, "wmax": 4}),
    "eval": (cmd_eval, {"expr": None, "weyl": None, "bc": None, "clifford": None, "algebra": None,
                        "level": 1}),
}

_HELP = {
    "algebroid": "lie or cdo",
    "algebra": "registry name (abelianN, sl2, so3..so6) or a JSON file",
    "level": "rational multiple of the normalized Killing form",
    "d": "rank (Weyl, ghost or Heisenberg system)",
    "degree": "polynomial degree cutoff",
    "mutate": "a,b,c: add 1 to the t_c coefficient of [t_a, t_b]",
    "beta": "two-form as JSON list of [exponents, [j, k], coeff]",
    "delta": "A-linear map as JSON list of [j, exponents, k, coeff] (default: d_1 -> db^1)",
    "system": "betagamma, ghost, sugawara or heisenberg",
    "modes": "mode range N with |m|,|n| <= N",
    "wmax": "weight cutoff",
    "matter": "affine or heisenberg",
    "ground": "trivial, adjoint or fundamental",
    "budget": "largest block size before giving up",
    "seed": "seed for shuffling the basis order",
    "dprime": "half the number of Clifford generators",
    "module": "spinor, tensor or vacuum",
    "expr": "expression, e.g. \"a[1,1] b[1,-1] |0>\"",
    "weyl": "Weyl system rank",
    "bc": "ghost system rank",
    "clifford": "Clifford d'",
}

_JSON_FIELDS = {"beta", "delta"}
_INT_FIELDS = {"d", "degree", "modes", "wmax", "budget", "seed", "dprime", "weyl", "bc", "clifford"}


def build_parser():
    p = argparse.ArgumentParser(prog="voaforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, fields) in COMMANDS.items():
        sp = sub.add_parser(name, help=(COMMANDS[name][0].__doc__ or name).splitlines()[0])
        sp.add_argument("--config", help="JSON file with field values")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--timing", action="store_true", help="print wall time (text format only)")
        for field, default in fields.items():
            kind = int if field in _INT_FIELDS else str
            sp.add_argument(f"--{field}", type=kind, default=None,
                            help=f"{_HELP.get(field, field)} (default: {default})")
    return p


def resolve_config(command, args):
    """Defaults, then the config file, then explicit flags."""
    _, fields = COMMANDS[command]
    cfg = dict(fields)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON at line {exc.lineno}, column {exc.colno}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
        for key, value in data.items():
            if key not in cfg:
                raise ConfigError(key, f"unknown field for {command}")
            cfg[key] = value
    for key in fields:
        value = getattr(args, key)
        if value is None:
            continue
        if key in _JSON_FIELDS:
            try:
                value = json.loads(value)
            except json.JSONDecodeError:
                raise ConfigError(key, "expected JSON") from None
        cfg[key] = value
    return cfg


def run_command(command, cfg):
    handler, _ = COMMANDS[command]
    r = handler(cfg)
    parts = [command] + [f"--{k} {json.dumps(v) if isinstance(v, list) else v}"
                         for k, v in sorted(cfg.items()) if v is not None]
    r.command = " ".join(parts)
    return r


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        start = time.perf_counter()
        r = run_command(args.command, cfg)
    except ConfigError as exc:
        print(f"voaforge: config error: {exc}", file=sys.stderr)
        return 2
    print(emit_report(r, args.format))
    if args.timing and args.format == "text":
        print(f"time: {time.perf_counter() - start:.2f}s")
    return 0 if r.passed else 1


if __name__ == "__main__":
    sys.exit(main())
