"""Sparse homogeneous polynomials over a finite field.

Covers parsing of the small expression language used in variety files,
evaluation at points (scalar and vectorized), restriction to lines and
linear subspaces, root multiplicities of binary forms, and a complete
linear-factor search for plane curves of degree 2 and 3.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    FieldMismatchError,
    InputError,
    PolySyntaxError,
    UnsupportedDegreeError,
)
from .gf import FieldCtx, field_create
from .projspace import normalize

Exps = tuple[int, ...]


@dataclass
class HomogPoly:
    """Homogeneous polynomial: exponent vector -> nonzero coefficient code."""

    ctx: FieldCtx
    n_vars: int
    degree: int
    terms: dict[Exps, int] = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {e: c for e, c in self.terms.items() if c}
        for e in self.terms:
            if len(e) != self.n_vars or sum(e) != self.degree:
                raise InputError(f"term {e} does not fit a degree-{self.degree} form in {self.n_vars} variables")

    def is_zero(self) -> bool:
        return not self.terms

    def lift(self, ext: FieldCtx) -> "HomogPoly":
        """The same form with coefficients embedded into ``ext``."""
        if ext is self.ctx:
            return self
        table = ext.embedding_from(self.ctx)
        return HomogPoly(ext, self.n_vars, self.degree, {e: int(table[c]) for e, c in self.terms.items()})

    def partial(self, i: int) -> "HomogPoly":
        ctx = self.ctx
        out: dict[Exps, int] = {}
        for e, c in self.terms.items():
            if e[i]:
                c2 = ctx.mul(c, ctx.from_int(e[i]))
                if c2:
                    e2 = list(e)
                    e2[i] -= 1
                    out[tuple(e2)] = c2
        return HomogPoly(ctx, self.n_vars, max(self.degree - 1, 0), out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i}" if k == 1 else f"x{i}^{k}" for i, k in enumerate(e) if k)
            coef = str(c) if self.ctx.k == 1 else "[" + ",".join(map(str, self.ctx.coeffs(c))) + "]"
            parts.append(mono if (c == 1 and mono) else (f"{coef}*{mono}" if mono else coef))
        return " + ".join(parts)


@dataclass(frozen=True)
class BinaryForm:
    """g(s, t) = sum(coeffs[i] * s^(d-i) * t^i) over ``ctx``."""

    ctx: FieldCtx
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def lift(self, ext: FieldCtx) -> "BinaryForm":
        if ext is self.ctx:
            return self
        table = ext.embedding_from(self.ctx)
        return BinaryForm(ext, tuple(int(table[c]) for c in self.coeffs))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|([A-Za-z_]\w*)|(.))")


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        num, var, ident, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num), start))
        elif var is not None:
            tokens.append(("var", int(var[1:]), start))
        elif ident is not None:
            tokens.append(("ident", ident, start))
        elif op in "+-*^()":
            tokens.append((op, op, start))
        else:
            raise PolySyntaxError(f"unexpected character {op!r}", start)
        pos = m.end()
    tokens.append(("end", None, len(src)))
    return tokens


def _ipoly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def _ipoly_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + sign * c
    return {e: c for e, c in out.items() if c}


class _Parser:
    def __init__(self, src: str, nvars: int):
        self.tokens = _tokenize(src)
        self.i = 0
        self.nvars = nvars
        self.zero_exp = (0,) * nvars

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise PolySyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> dict:
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[0] in ("num", "var", "ident", "("):
                raise PolySyntaxError("implicit multiplication is not allowed", tok[2])
            raise PolySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return out

    def expr(self) -> dict:
        acc = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            acc = _ipoly_add(acc, self.term(), 1 if op == "+" else -1)
        return acc

    def term(self) -> dict:
        acc = self.unary()
        while self.peek()[0] == "*":
            self.take()
            acc = _ipoly_mul(acc, self.unary())
        return acc

    def unary(self) -> dict:
        kind = self.peek()[0]
        if kind == "-":
            self.take()
            return {e: -c for e, c in self.unary().items()}
        if kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> dict:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num":
                raise PolySyntaxError("exponent must be a nonnegative integer literal", tok[2])
            self.take()
            result = {self.zero_exp: 1}
            for _ in range(tok[1]):
                result = _ipoly_mul(result, base)
            return result
        return base

    def atom(self) -> dict:
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return {self.zero_exp: tok[1]} if tok[1] else {}
        if tok[0] == "var":
            self.take()
            if tok[1] >= self.nvars:
                raise InputError(f"unknown variable x{tok[1]} (ambient has x0..x{self.nvars - 1}) at position {tok[2]}")
            e = [0] * self.nvars
            e[tok[1]] = 1
            return {tuple(e): 1}
        if tok[0] == "ident":
            raise InputError(f"unknown variable {tok[1]!r} at position {tok[2]}")
        if tok[0] == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise PolySyntaxError(f"unexpected {tok[1]!r}" if tok[0] != "end" else "unexpected end of input", tok[2])


def parse_poly(src: str, n: int, ctx: FieldCtx) -> HomogPoly:
    """Parse ``src`` as a homogeneous form in x0..xn with coefficients in ``ctx``.

    Integer literals are reduced into the prime field.  Raises
    :class:`PolySyntaxError` with the offending position, or
    :class:`InputError` for unknown variables and non-homogeneous input.
    """
    ipoly = _Parser(src, n + 1).parse()
    terms = {}
    for e, c in ipoly.items():
        code = ctx.from_int(c)
        if code:
            terms[e] = code
    degrees = {sum(e) for e in terms}
    if len(degrees) > 1:
        raise InputError(f"polynomial {src!r} is not homogeneous (degrees {sorted(degrees)})")
    if degrees:
        degree = degrees.pop()
    else:
        degree = max((sum(e) for e in ipoly), default=0)
    return HomogPoly(ctx, n + 1, degree, terms)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(f: HomogPoly, P: Sequence[int]) -> int:
    if len(P) != f.n_vars:
        raise FieldMismatchError(f"point has {len(P)} coordinates, form has {f.n_vars} variables")
    ctx = f.ctx
    acc = 0
    for e, c in f.terms.items():
        v = c
        for x, k in zip(P, e):
            if k:
                v = ctx.mul(v, ctx.pow(int(x), k))
        acc = ctx.add(acc, v)
    return acc


def evaluate_many(f: HomogPoly, pts: np.ndarray) -> np.ndarray:
    """Evaluate at every row of a (count, n_vars) code array."""
    pts = np.asarray(pts, dtype=np.int64)
    if pts.shape[-1] != f.n_vars:
        raise FieldMismatchError(f"points have {pts.shape[-1]} coordinates, form has {f.n_vars} variables")
    ctx = f.ctx
    powers: dict[tuple[int, int], np.ndarray] = {}
    acc = np.zeros(pts.shape[:-1], dtype=np.int64)
    for e, c in f.terms.items():
        v = np.full(pts.shape[:-1], c, dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in powers:
                    powers[key] = ctx.vpow(pts[..., i], k)
                v = ctx.vmul(v, powers[key])
        acc = ctx.vadd(acc, v)
    return acc


# ---------------------------------------------------------------------------
# Restriction
# ---------------------------------------------------------------------------

def _bin_mul(ctx: FieldCtx, a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
    return out


def restrict_to_line(f: HomogPoly, P0: Sequence[int], P1: Sequence[int]) -> BinaryForm:
    """The binary form g(s, t) = f(s*P0 + t*P1)."""
    ctx = f.ctx
    if len(P0) != f.n_vars or len(P1) != f.n_vars:
        raise FieldMismatchError("line points do not match the form's ambient space")
    if normalize(ctx, P0) == normalize(ctx, P1):
        raise InputError("restrict_to_line needs two distinct points")
    linear = [[int(a), int(b)] for a, b in zip(P0, P1)]
    cache: dict[tuple[int, int], list[int]] = {}
    out = [0] * (f.degree + 1)
    for e, c in f.terms.items():
        g = [c]
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in cache:
                    cache[key] = reduce(lambda acc, _: _bin_mul(ctx, acc, linear[i]), range(k), [1])
                g = _bin_mul(ctx, g, cache[key])
        for i, x in enumerate(g):
            out[i] = ctx.add(out[i], x)
    return BinaryForm(ctx, tuple(out))


def restrict_to_subspace(f: HomogPoly, rows: Sequence[Sequence[int]]) -> HomogPoly:
    """Pull f back along y -> sum(y_j * rows[j]); a form in len(rows) variables."""
    ctx = f.ctx
    r = len(rows)
    for row in rows:
        if len(row) != f.n_vars:
            raise FieldMismatchError("subspace rows do not match the form's ambient space")

    def mul(a: dict, b: dict) -> dict:
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = ctx.add(out.get(e, 0), ctx.mul(ca, cb))
        return {e: c for e, c in out.items() if c}

    unit = {(0,) * r: 1}
    linear = []
    for i in range(f.n_vars):
        lin = {}
        for j in range(r):
            if rows[j][i]:
                e = [0] * r
                e[j] = 1
                lin[tuple(e)] = int(rows[j][i])
        linear.append(lin)
    cache: dict[tuple[int, int], dict] = {}
    out: dict = {}
    for e, c in f.terms.items():
        g = {(0,) * r: c}
        for i, k in enumerate(e):
            if k:
                if (i, k) not in cache:
                    acc = unit
                    for _ in range(k):
                        acc = mul(acc, linear[i])
                    cache[(i, k)] = acc
                g = mul(g, cache[(i, k)])
        for ee, cc in g.items():
            out[ee] = ctx.add(out.get(ee, 0), cc)
    return HomogPoly(ctx, r, f.degree, out)


# ---------------------------------------------------------------------------
# Roots of binary forms
# ---------------------------------------------------------------------------

def binary_roots(g: BinaryForm, ext: FieldCtx | None = None) -> list[tuple[int, int]]:
    """Projective roots of g over ``ext`` in P^1 enumeration order: (1:u) by u, then (0:1)."""
    if g.is_zero():
        raise InputError("the zero binary form has every point as a root")
    ext = ext or g.ctx
    h = g.lift(ext)
    vals = ext.vpoly(h.coeffs, np.arange(ext.order))
    roots = [(1, int(u)) for u in np.flatnonzero(vals == 0)]
    if h.coeffs[-1] == 0:
        roots.append((0, 1))
    return roots


def _synthetic_multiplicity(ctx: FieldCtx, coeffs: list[int], u: int) -> int:
    """Largest e with (t - u)^e dividing sum(coeffs[i] t^i)."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    mult = 0
    while len(c) > 1:
        # divide by (t - u): quotient by Horner from the top
        q = [0] * (len(c) - 1)
        acc = 0
        for i in range(len(c) - 1, 0, -1):
            acc = ctx.add(ctx.mul(acc, u), c[i])
            q[i - 1] = acc
        rem = ctx.add(ctx.mul(acc, u), c[0])
        if rem:
            break
        mult += 1
        c = q
    return mult


def root_multiplicities(g: BinaryForm, ext: FieldCtx | None = None) -> list[tuple[tuple[int, int], int]]:
    """(root, multiplicity) for each projective root of g over ``ext``."""
    if g.is_zero():
        raise InputError("root multiplicities of the zero form are undefined")
    ext = ext or g.ctx
    h = g.lift(ext)
    out = []
    coeffs = list(h.coeffs)
    for root in binary_roots(h, ext):
        if root == (0, 1):
            top = max(i for i, c in enumerate(coeffs) if c)
            out.append((root, h.degree - top))
        else:
            out.append((root, _synthetic_multiplicity(ext, coeffs, root[1])))
    return out


def splitting_field(ctx: FieldCtx, d: int) -> FieldCtx:
    """An extension of ``ctx`` containing every root of every degree-d binary form over it."""
    L = reduce(math.lcm, range(1, max(d, 1) + 1), 1)
    return field_create(ctx.p, ctx.k * L)


def splitting_pattern(g: BinaryForm, ext: FieldCtx | None = None) -> list[int]:
    """Multiset of root multiplicities over the algebraic closure (descending)."""
    if g.is_zero():
        raise InputError("splitting pattern of the zero form is undefined")
    ext = ext or splitting_field(g.ctx, g.degree)
    pattern = sorted((m for _, m in root_multiplicities(g, ext)), reverse=True)
    if sum(pattern) != g.degree:
        raise ConsistencyError(f"multiplicities {pattern} do not sum to degree {g.degree}")
    return pattern


# ---------------------------------------------------------------------------
# Linear factors of plane curves
# ---------------------------------------------------------------------------

@dataclass
class FactorVerdict:
    irreducible: bool
    witness: tuple[int, ...] | None = None
    field: FieldCtx | None = None

    def __bool__(self):
        return self.irreducible


_COORD_LINES = (
    ((0, 1, 0), (0, 0, 1)),
    ((1, 0, 0), (0, 0, 1)),
    ((1, 0, 0), (0, 1, 0)),
)


def _cross(ctx: FieldCtx, a, b) -> tuple[int, int, int]:
    def det(i, j):
        return ctx.sub(ctx.mul(a[i], b[j]), ctx.mul(a[j], b[i]))
    return (det(1, 2), det(2, 0), det(0, 1))


def _find_linear_factor(f: HomogPoly) -> tuple[int, ...] | None:
    """A linear form over f's field dividing f, or None.

    Any linear factor other than a coordinate form meets each coordinate
    line in a single point, which is a root of f restricted to that line;
    the three meeting points are not all equal, so the factor is the line
    through two distinct candidate roots.
    """
    ctx = f.ctx
    candidates: list[tuple[int, ...]] = []
    for i, (A, B) in enumerate(_COORD_LINES):
        g = restrict_to_line(f, A, B)
        if g.is_zero():
            w = [0, 0, 0]
            w[i] = 1
            return tuple(w)
        for s, t in binary_roots(g):
            pt = tuple(ctx.add(ctx.mul(s, a), ctx.mul(t, b)) for a, b in zip(A, B))
            pt = normalize(ctx, pt)
            if pt not in candidates:
                candidates.append(pt)
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            if restrict_to_line(f, candidates[i], candidates[j]).is_zero():
                return normalize(ctx, _cross(ctx, candidates[i], candidates[j]))
    return None


def conic_discriminant(f: HomogPoly) -> int:
    """4abc + def - af^2 - be^2 - cd^2 for ax^2+by^2+cz^2+dxy+exz+fyz.

    Valid in every characteristic: a nonzero ternary quadratic form is
    reducible over the algebraic closure exactly when this vanishes.
    """
    if f.n_vars != 3 or f.degree != 2:
        raise UnsupportedDegreeError("conic_discriminant needs a ternary quadratic form")
    ctx = f.ctx
    t = f.terms
    a, b, c = t.get((2, 0, 0), 0), t.get((0, 2, 0), 0), t.get((0, 0, 2), 0)
    d, e, g = t.get((1, 1, 0), 0), t.get((1, 0, 1), 0), t.get((0, 1, 1), 0)
    m = ctx.mul
    four = 4 % ctx.p
    pos = ctx.add(m(four, m(a, m(b, c))), m(d, m(e, g)))
    neg = ctx.add(ctx.add(m(a, m(g, g)), m(b, m(e, e))), m(c, m(d, d)))
    return ctx.sub(pos, neg)


def linear_factor_search(f: HomogPoly, max_ext: int | None = None) -> FactorVerdict:
    """Decide absolute irreducibility of a ternary form of degree 2 or 3.

    A reducible form of degree <= 3 has a linear factor defined over an
    extension of degree <= d, so searching F_{Q^j} for j = 1..d is
    complete.  ``max_ext`` lowers the largest j tried.
    """
    if f.n_vars != 3:
        raise InputError("linear_factor_search needs a form in 3 variables")
    if f.degree not in (2, 3):
        raise UnsupportedDegreeError(f"linear factor search supports degree 2 or 3, got {f.degree}")
    if f.is_zero():
        return FactorVerdict(False, (1, 0, 0), f.ctx)
    top = f.degree if max_ext is None else max_ext
    for j in range(1, top + 1):
        ext = field_create(f.ctx.p, f.ctx.k * j)
        w = _find_linear_factor(f.lift(ext))
        if w is not None:
            return FactorVerdict(False, w, ext)
    return FactorVerdict(True)
