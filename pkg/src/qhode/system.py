"""System definition files, companion reduction and Poisson structures.

A system file is a sequence of statements separated by newlines or ``;``::

    # comment
    consts: lambda1 = 1.0, lambda2 = 2.0, lambda3 = 3.0
    vars: m1, m2, m3
    eq: m1' = (lambda3 - lambda2) * m2 * m3
    ...
    integral H1 = 0.5*(lambda1*m1^2 + lambda2*m2^2 + lambda3*m3^2)
    poisson: [[0, -m3, m2], [m3, 0, -m1], [-m2, m1, 0]]
    hamiltonian: H1

Constants are bound to numbers at parse time.  ``i`` is the imaginary unit.
A single scalar equation of order ``n > 1`` (``eq: w'' = 6*w^2``) is reduced
to its first-order companion system.
"""

import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (ArityMismatch, DimensionMismatch, DSLSyntaxError,
                     MissingPoisson, UnboundIdentifier, UnsupportedDerivativeOrder)
from .poly import PhasePoly, RationalFn, _fmt_number

KEYWORDS = ("consts", "vars", "eq", "integral", "poisson", "hamiltonian")
FUNCTIONS = {"sqrt": cmath.sqrt, "exp": cmath.exp, "log": cmath.log,
             "sin": cmath.sin, "cos": cmath.cos}
BUILTIN_CONSTS = {"i": 1j, "pi": math.pi}


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\],=':;])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, line_start, depth = 1, 0, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DSLSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            if depth == 0:
                tokens.append(Token("sep", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "op":
            if value in "([":
                depth += 1
            elif value in ")]":
                depth = max(depth - 1, 0)
            if value == ";":
                tokens.append(Token("sep", ";", line, col))
            else:
                tokens.append(Token("op", value, line, col))
        elif kind in ("number", "ident"):
            tokens.append(Token(kind, value, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# expression AST
# ---------------------------------------------------------------------------

@dataclass
class Num:
    value: complex


@dataclass
class Name:
    name: str
    order: int  # number of primes
    tok: Token


@dataclass
class BinOp:
    op: str
    left: object
    right: object
    tok: Token


@dataclass
class Neg:
    arg: object


@dataclass
class Call:
    func: str
    arg: object
    tok: Token


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, expected):
        t = self.tok
        raise DSLSyntaxError(t.line, t.col, expected, t.value or "end of input")

    def expect(self, kind, value=None):
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            self.error(repr(value) if value else kind)
        return self.advance()

    def accept(self, kind, value=None):
        t = self.tok
        if t.kind == kind and (value is None or t.value == value):
            return self.advance()
        return None

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.value in "+-":
            t = self.advance()
            node = BinOp(t.value, node, self.term(), t)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.value in "*/":
            t = self.advance()
            node = BinOp(t.value, node, self.unary(), t)
        return node

    def unary(self):
        if self.accept("op", "-"):
            return Neg(self.unary())
        if self.accept("op", "+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.value == "^":
            t = self.advance()
            return BinOp("^", base, self.unary(), t)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(complex(float(t.value)))
        if t.kind == "ident":
            self.advance()
            if t.value in FUNCTIONS and self.tok.kind == "op" and self.tok.value == "(":
                self.advance()
                arg = self.expr()
                self.expect("op", ")")
                return Call(t.value, arg, t)
            order = 0
            while self.accept("op", "'"):
                order += 1
            return Name(t.value, order, t)
        if self.accept("op", "("):
            node = self.expr()
            self.expect("op", ")")
            return node
        self.error("an expression")

    def name_list(self):
        names = [self.expect("ident")]
        while self.accept("op", ","):
            names.append(self.expect("ident"))
        return names

    def matrix(self):
        self.expect("op", "[")
        rows = []
        while True:
            self.expect("op", "[")
            row = [self.expr()]
            while self.accept("op", ","):
                row.append(self.expr())
            self.expect("op", "]")
            rows.append(row)
            if not self.accept("op", ","):
                break
        self.expect("op", "]")
        return rows


# ---------------------------------------------------------------------------
# evaluation of AST nodes
# ---------------------------------------------------------------------------

def _eval_const(node, consts):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.order:
            raise DSLSyntaxError(node.tok.line, node.tok.col, "a constant expression")
        if node.name in consts:
            return consts[node.name]
        if node.name in BUILTIN_CONSTS:
            return BUILTIN_CONSTS[node.name]
        raise UnboundIdentifier(f"line {node.tok.line}, col {node.tok.col}: "
                                f"unbound identifier {node.name!r}")
    if isinstance(node, Neg):
        return -_eval_const(node.arg, consts)
    if isinstance(node, Call):
        return complex(FUNCTIONS[node.func](_eval_const(node.arg, consts)))
    a = _eval_const(node.left, consts)
    b = _eval_const(node.right, consts)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    if b.imag == 0 and b.real == int(b.real):
        return a ** int(b.real)
    return a ** b


class _Rat:
    """numerator/denominator pair used while folding expressions."""

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def is_const(self):
        return self.num.degree <= 0 and self.den.degree == 0

    def const_value(self):
        return self.num.constant() / self.den.constant()

    def simplified(self):
        if self.den.degree == 0:
            c = self.den.constant()
            return _Rat(self.num * (1 / c), PhasePoly.constant_poly(self.num.n, 1))
        return self


def _eval_poly(node, ctx):
    """Fold an AST into a _Rat over the context's variables."""
    n = ctx["n"]
    one = PhasePoly.constant_poly(n, 1)
    if isinstance(node, Num):
        return _Rat(PhasePoly.constant_poly(n, node.value), one)
    if isinstance(node, Name):
        key = (node.name, node.order)
        if key in ctx["vars"]:
            ctx["refs"].add(key)
            return _Rat(PhasePoly.variable(n, ctx["vars"][key]), one)
        if node.order == 0 and node.name in ctx["consts"]:
            return _Rat(PhasePoly.constant_poly(n, ctx["consts"][node.name]), one)
        if node.order == 0 and node.name in BUILTIN_CONSTS:
            return _Rat(PhasePoly.constant_poly(n, BUILTIN_CONSTS[node.name]), one)
        if node.order and node.name in ctx.get("derivative_of", ()):
            ctx["refs"].add(key)
            raise UnsupportedDerivativeOrder(
                f"line {node.tok.line}: right-hand side references derivative of order "
                f"{node.order} of {node.name!r}")
        raise UnboundIdentifier(f"line {node.tok.line}, col {node.tok.col}: "
                                f"unbound identifier {node.name!r}" +
                                ("'" * node.order))
    if isinstance(node, Neg):
        r = _eval_poly(node.arg, ctx)
        return _Rat(-r.num, r.den)
    if isinstance(node, Call):
        r = _eval_poly(node.arg, ctx).simplified()
        if not r.is_const():
            raise DSLSyntaxError(node.tok.line, node.tok.col,
                                 f"a constant argument to {node.func}")
        return _Rat(PhasePoly.constant_poly(n, FUNCTIONS[node.func](r.const_value())), one)
    a = _eval_poly(node.left, ctx)
    if node.op == "^":
        b = _eval_poly(node.right, ctx).simplified()
        if not b.is_const():
            raise DSLSyntaxError(node.tok.line, node.tok.col, "a constant exponent")
        e = b.const_value()
        if a.is_const():
            return _Rat(PhasePoly.constant_poly(n, a.const_value() ** e), one)
        if e.imag != 0 or e.real != int(e.real):
            raise DSLSyntaxError(node.tok.line, node.tok.col, "an integer exponent")
        e = int(e.real)
        if e >= 0:
            return _Rat(a.num ** e, a.den ** e)
        return _Rat(a.den ** (-e), a.num ** (-e))
    b = _eval_poly(node.right, ctx)
    if node.op == "+":
        if a.den == b.den:
            return _Rat(a.num + b.num, a.den)
        return _Rat(a.num * b.den + b.num * a.den, a.den * b.den)
    if node.op == "-":
        if a.den == b.den:
            return _Rat(a.num - b.num, a.den)
        return _Rat(a.num * b.den - b.num * a.den, a.den * b.den)
    if node.op == "*":
        return _Rat(a.num * b.num, a.den * b.den)
    b = b.simplified()
    if b.num.is_zero():
        raise DSLSyntaxError(node.tok.line, node.tok.col, "a nonzero divisor")
    if b.is_const():
        return _Rat(a.num * (1 / b.const_value()), a.den)
    return _Rat(a.num * b.den, a.den * b.num)


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemSpec:
    """An autonomous system ``w' = f(w)`` plus optional Hamiltonian data."""

    names: tuple
    rhs: tuple  # RationalFn per variable
    constants: dict = field(default_factory=dict)
    integrals: dict = field(default_factory=dict)  # name -> PhasePoly, ordered
    poisson: Optional[tuple] = None  # n x n tuple of PhasePoly
    hamiltonian: Optional[PhasePoly] = None
    hamiltonian_name: Optional[str] = None
    title: str = ""

    def __post_init__(self):
        if len(self.rhs) != len(self.names):
            raise ArityMismatch(f"{len(self.rhs)} equations for {len(self.names)} variables")
        if self.poisson is not None:
            n = len(self.names)
            if len(self.poisson) != n or any(len(r) != n for r in self.poisson):
                raise ArityMismatch(f"poisson matrix must be {n}x{n}")

    @property
    def n(self):
        return len(self.names)

    @property
    def is_polynomial(self):
        return all(r.is_polynomial for r in self.rhs)

    def field(self):
        """The right-hand side as PhasePoly (polynomial systems only)."""
        return [r.as_poly() for r in self.rhs]

    def index(self, name):
        return self.names.index(name)

    def vector_field(self):
        """A fast numeric callable ``f(w) -> array`` for polynomial systems."""
        return compile_polys(self.field())

    def to_text(self):
        lines = [f"vars: {', '.join(self.names)}"]
        for name, r in zip(self.names, self.rhs):
            lines.append(f"eq: {name}' = {r.format(self.names)}")
        for name, h in self.integrals.items():
            lines.append(f"integral {name} = {h.format(self.names)}")
        if self.poisson is not None:
            rows = ", ".join("[" + ", ".join(e.format(self.names) for e in row) + "]"
                             for row in self.poisson)
            lines.append(f"poisson: [{rows}]")
        if self.hamiltonian is not None:
            if self.hamiltonian_name in self.integrals:
                lines.append(f"hamiltonian: {self.hamiltonian_name}")
            else:
                lines.append(f"hamiltonian: {self.hamiltonian.format(self.names)}")
        return "\n".join(lines) + "\n"

    def structurally_equal(self, other, tol=0.0):
        def same(p, q):
            return p.equals(q, tol) if tol else p == q

        if self.names != other.names:
            return False
        for a, b in zip(self.rhs, other.rhs):
            if not (same(a.numerator * b.denominator, b.numerator * a.denominator)):
                return False
        if list(self.integrals) != list(other.integrals):
            return False
        if not all(same(self.integrals[k], other.integrals[k]) for k in self.integrals):
            return False
        if (self.poisson is None) != (other.poisson is None):
            return False
        if self.poisson is not None:
            for ra, rb in zip(self.poisson, other.poisson):
                if not all(same(a, b) for a, b in zip(ra, rb)):
                    return False
        if (self.hamiltonian is None) != (other.hamiltonian is None):
            return False
        return self.hamiltonian is None or same(self.hamiltonian, other.hamiltonian)


@dataclass(frozen=True)
class NthOrderODE:
    """``var^(order) = rhs(var, var', ..., var^(order-1))`` before reduction."""

    var: str
    order: int
    rhs: RationalFn  # over `order` variables: the derivatives 0..order-1
    constants: dict = field(default_factory=dict)
    max_referenced_order: int = 0


def compile_polys(polys):
    """Compile a list of PhasePoly into a vectorised numeric function."""
    n = polys[0].n
    monos = sorted({k for p in polys for k in p.terms})
    if not monos:
        monos = [(0,) * n]
    E = np.array(monos, dtype=int).reshape(len(monos), n)
    C = np.array([[p.terms.get(m, 0) for m in monos] for p in polys], dtype=complex)
    maxe = int(E.max()) if E.size else 0

    def f(w):
        w = np.asarray(w, dtype=complex)
        # powers[j, e] = w_j^e
        pw = np.ones((n, maxe + 1) + w.shape[1:], dtype=complex)
        for e in range(1, maxe + 1):
            pw[:, e] = pw[:, e - 1] * w
        vals = np.ones((len(monos),) + w.shape[1:], dtype=complex)
        for j in range(n):
            vals = vals * pw[j, E[:, j]]
        return np.tensordot(C, vals, axes=(1, 0))

    return f


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _split_statements(tokens):
    stmt = []
    for t in tokens:
        if t.kind in ("sep", "eof"):
            if stmt:
                yield stmt + [Token("eof", "", t.line, t.col)]
            stmt = []
        else:
            stmt.append(t)


def parse_system(text, title=""):
    """Parse system-file text into a :class:`SystemSpec`."""
    consts = {}
    var_toks = None
    eqs = []  # (name token, order, rhs AST)
    integrals = []  # (name, AST, token)
    poisson_ast = None
    ham = None  # (AST or name token)

    for stmt in _split_statements(tokenize(text)):
        p = _Parser(stmt)
        head = p.expect("ident")
        kw = head.value
        if kw == "integral":
            name = p.expect("ident")
            p.accept("op", ":")
            p.expect("op", "=")
            integrals.append((name.value, p.expr(), name))
            p.expect("eof")
            continue
        if kw not in KEYWORDS:
            raise DSLSyntaxError(head.line, head.col, "one of " + ", ".join(KEYWORDS), kw)
        p.expect("op", ":")
        if kw == "consts":
            while True:
                name = p.expect("ident")
                p.expect("op", "=")
                if name.value in BUILTIN_CONSTS:
                    raise DSLSyntaxError(name.line, name.col, "a non-reserved name", name.value)
                consts[name.value] = complex(_eval_const(p.expr(), consts))
                if not p.accept("op", ","):
                    break
        elif kw == "vars":
            if var_toks is not None:
                raise DSLSyntaxError(head.line, head.col, "a single vars: declaration")
            var_toks = p.name_list()
            for t in var_toks:
                if t.value in BUILTIN_CONSTS or t.value in FUNCTIONS:
                    raise DSLSyntaxError(t.line, t.col, "a non-reserved variable name", t.value)
        elif kw == "eq":
            name = p.expect("ident")
            order = 0
            while p.accept("op", "'"):
                order += 1
            if order == 0:
                p.error("a derivative mark ' after the variable name")
            p.expect("op", "=")
            eqs.append((name, order, p.expr()))
        elif kw == "poisson":
            poisson_ast = p.matrix()
        elif kw == "hamiltonian":
            ham = p.expr()
        p.expect("eof")

    if var_toks is None:
        raise DSLSyntaxError(1, 1, "a vars: declaration")
    names = [t.value for t in var_toks]
    if len(set(names)) != len(names):
        raise ArityMismatch("duplicate variable names")
    for t in var_toks:
        if t.value in consts:
            raise ArityMismatch(f"{t.value!r} declared both as a constant and a variable")

    if len(names) == 1 and len(eqs) == 1 and eqs[0][1] > 1:
        name_tok, order, rhs_ast = eqs[0]
        if name_tok.value != names[0]:
            raise UnboundIdentifier(f"equation for undeclared variable {name_tok.value!r}")
        ode = _build_nth_order(names[0], order, rhs_ast, consts)
        spec = reduce_nth_order(ode)
        if integrals or poisson_ast or ham:
            # integrals refer to the companion variable names
            return _attach_extras(spec, integrals, poisson_ast, ham, consts, title)
        return SystemSpec(spec.names, spec.rhs, spec.constants, title=title)

    n = len(names)
    ctx = {"n": n, "vars": {(nm, 0): j for j, nm in enumerate(names)},
           "consts": consts, "refs": set(), "derivative_of": set(names)}
    rhs = [None] * n
    for name_tok, order, ast in eqs:
        if name_tok.value not in names:
            raise UnboundIdentifier(f"line {name_tok.line}: equation for undeclared "
                                    f"variable {name_tok.value!r}")
        if order != 1:
            raise UnsupportedDerivativeOrder(
                f"line {name_tok.line}: order-{order} equation in a multi-variable system")
        j = names.index(name_tok.value)
        if rhs[j] is not None:
            raise ArityMismatch(f"two equations for {name_tok.value!r}")
        r = _eval_poly(ast, ctx).simplified()
        rhs[j] = RationalFn(r.num, r.den)
    missing = [nm for nm, r in zip(names, rhs) if r is None]
    if missing:
        raise ArityMismatch(f"no equation for {', '.join(missing)}")
    spec = SystemSpec(tuple(names), tuple(rhs), dict(consts), title=title)
    return _attach_extras(spec, integrals, poisson_ast, ham, consts, title)


def _attach_extras(spec, integrals, poisson_ast, ham, consts, title):
    names = spec.names
    ctx = {"n": spec.n, "vars": {(nm, 0): j for j, nm in enumerate(names)},
           "consts": consts, "refs": set()}

    def poly_of(ast, what):
        r = _eval_poly(ast, ctx).simplified()
        if r.den.degree > 0:
            raise DSLSyntaxError(getattr(ast, "tok", Token("", "", 0, 0)).line, 0,
                                 f"a polynomial {what}")
        return r.num

    ints = {}
    for name, ast, tok in integrals:
        if name in ints:
            raise ArityMismatch(f"integral {name!r} defined twice")
        ints[name] = poly_of(ast, "integral")
    poisson = None
    if poisson_ast is not None:
        n = spec.n
        if len(poisson_ast) != n or any(len(r) != n for r in poisson_ast):
            raise ArityMismatch(f"poisson matrix must be {n}x{n}")
        poisson = tuple(tuple(poly_of(e, "poisson entry") for e in row) for row in poisson_ast)
    hamiltonian = hname = None
    if ham is not None:
        if isinstance(ham, Name) and ham.order == 0 and ham.name in ints:
            hname = ham.name
            hamiltonian = ints[hname]
        else:
            hamiltonian = poly_of(ham, "hamiltonian")
    return SystemSpec(spec.names, spec.rhs, dict(consts), ints, poisson, hamiltonian, hname,
                      title=title)


def _build_nth_order(var, order, rhs_ast, consts):
    vars_ = {(var, j): j for j in range(order)}
    ctx = {"n": order, "vars": vars_, "consts": consts, "refs": set(),
           "derivative_of": {var}}
    try:
        r = _eval_poly(rhs_ast, ctx).simplified()
    except UnsupportedDerivativeOrder:
        return NthOrderODE(var, order, RationalFn(PhasePoly(order)), dict(consts), order)
    max_ref = max((o for _, o in ctx["refs"]), default=0)
    return NthOrderODE(var, order, RationalFn(r.num, r.den), dict(consts), max_ref)


def parse_scalar_ode(text, consts=None):
    """Parse ``"w'' = -w^3"`` into an :class:`NthOrderODE` (no reduction)."""
    toks = [t for t in tokenize(text) if t.kind != "sep"]
    p = _Parser(toks)
    name = p.expect("ident")
    order = 0
    while p.accept("op", "'"):
        order += 1
    if order == 0:
        p.error("a derivative mark")
    p.expect("op", "=")
    ast = p.expr()
    p.expect("eof")
    return _build_nth_order(name.value, order, ast, dict(consts or {}))


def reduce_nth_order(equation):
    """Companion first-order system ``w1' = w2, ..., wn' = f(w1..wn)``."""
    n = equation.order
    if equation.max_referenced_order >= n:
        raise UnsupportedDerivativeOrder(
            f"right-hand side references {equation.var} derivative of order "
            f"{equation.max_referenced_order} >= {n}")
    if n == 1:
        names = (equation.var,)
    else:
        names = tuple(f"{equation.var}{j + 1}" for j in range(n))
    rhs = [RationalFn(PhasePoly.variable(n, j + 1)) for j in range(n - 1)]
    rhs.append(equation.rhs)
    return SystemSpec(names, tuple(rhs), dict(equation.constants))


def load_system(path):
    from pathlib import Path
    p = Path(path)
    return parse_system(p.read_text(encoding="utf-8"), title=p.stem)


# ---------------------------------------------------------------------------
# Hamiltonian structure
# ---------------------------------------------------------------------------

def hamiltonian_to_field(J, H):
    """Return ``J * grad H`` componentwise."""
    n = len(J)
    if any(len(row) != n for row in J) or H.n != n:
        raise DimensionMismatch(f"J is not {H.n}x{H.n}")
    grad = H.gradient()
    zero = PhasePoly(n)
    out = []
    for row in J:
        acc = zero
        for Jij, g in zip(row, grad):
            if not Jij.is_zero() and not g.is_zero():
                acc = acc + Jij * g
        out.append(acc)
    return out


def poisson_bracket(J, F, G):
    n = len(J)
    dF = F.gradient()
    dG = G.gradient()
    acc = PhasePoly(n)
    for i in range(n):
        if dF[i].is_zero():
            continue
        for j in range(n):
            if not J[i][j].is_zero() and not dG[j].is_zero():
                acc = acc + J[i][j] * dF[i] * dG[j]
    return acc


@dataclass
class PoissonReport:
    antisymmetric: bool
    jacobi_ok: bool
    max_jacobi_residual: float
    involution: dict  # (name_i, name_j) -> bool (bracket vanishes)
    casimir: dict  # name -> bool
    field_matches: Optional[bool] = None  # J grad H == rhs, when a Hamiltonian is given
    tol: float = 1e-10

    def to_dict(self):
        return {
            "antisymmetric": self.antisymmetric,
            "jacobi_ok": self.jacobi_ok,
            "max_jacobi_residual": self.max_jacobi_residual,
            "involution": {f"{a},{b}": v for (a, b), v in sorted(self.involution.items())},
            "casimir": dict(sorted(self.casimir.items())),
            "field_matches": self.field_matches,
        }


def poisson_audit(spec, tol=1e-10):
    if spec.poisson is None:
        raise MissingPoisson("system has no poisson matrix")
    J = spec.poisson
    n = spec.n
    antisym = all((J[i][j] + J[j][i]).is_zero() for i in range(n) for j in range(n))
    # {{w_i, w_j}, w_k} = sum_a J[a][k] d_a J[i][j]
    dJ = [[[J[i][j].diff(a) for a in range(n)] for j in range(n)] for i in range(n)]

    def inner(i, j, k):
        acc = PhasePoly(n)
        for a in range(n):
            if not J[a][k].is_zero() and not dJ[i][j][a].is_zero():
                acc = acc + J[a][k] * dJ[i][j][a]
        return acc

    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                cyc = inner(i, j, k) + inner(j, k, i) + inner(k, i, j)
                worst = max(worst, cyc.max_abs())
    names = list(spec.integrals)
    invol = {}
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            br = poisson_bracket(J, spec.integrals[names[a]], spec.integrals[names[b]])
            invol[(names[a], names[b])] = br.is_zero(tol)
    cas = {}
    for nm in names:
        v = hamiltonian_to_field(J, spec.integrals[nm])
        cas[nm] = all(c.is_zero(tol) for c in v)
    matches = None
    if spec.hamiltonian is not None and spec.is_polynomial:
        fld = hamiltonian_to_field(J, spec.hamiltonian)
        matches = all(a.equals(b, tol) for a, b in zip(fld, spec.field()))
    return PoissonReport(antisym, worst < tol, worst, invol, cas, matches, tol)


def format_number(c):
    return _fmt_number(c)
