"""Arithmetic in prime fields F_p and extension fields F_{p^k}.

Elements are encoded as integers ("codes") in ``range(p**k)``: the element
c_0 + c_1 t + ... + c_{k-1} t^{k-1} of F_p[t]/(modulus) has code
sum(c_i * p**i).  Code order is the enumeration order, so 0 comes first
and 1 second.

For k > 1 the hot operations go through exp/log/Zech-logarithm tables
built once per field (lazily, under a lock).  Each table op has a numpy
counterpart (``vadd``, ``vmul`` ...) that works elementwise on arrays of
codes.  For k = 1 everything is plain modular integer arithmetic.

The slow polynomial routines (``_poly_mulmod`` and friends) are kept as
the reference path: tables are generated from them and the tests compare
the two.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import FieldMismatchError, InputError, BudgetError

FIELD_CAP = 1 << 24


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Reference polynomial arithmetic over F_p (coefficient lists, constant first)
# ---------------------------------------------------------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_rem(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], p - 2, p)
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _trim(a)
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return _poly_rem(prod, mod, p)


def _poly_powmod(a: Sequence[int], e: int, mod: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _poly_rem(a, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _monic_polys(p: int, deg: int) -> Iterator[list[int]]:
    """All monic polynomials of the given degree, lower coefficients in code order."""
    for code in range(p ** deg):
        coeffs = []
        for _ in range(deg):
            code, r = divmod(code, p)
            coeffs.append(r)
        yield coeffs + [1]


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree <= deg/2."""
    f = _trim(list(f))
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if f[0] == 0:
        return False
    for deg in range(1, k // 2 + 1):
        for g in _monic_polys(p, deg):
            if not _poly_rem(f, g, p):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    for f in _monic_polys(p, k):
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError(f"no irreducible polynomial of degree {k} over F_{p}")


# ---------------------------------------------------------------------------
# Field context
# ---------------------------------------------------------------------------

class FieldCtx:
    """The finite field F_{p^k} with a fixed modulus.

    Instances are immutable after construction (the lazily built lookup
    tables never change once filled) and are shared through
    :func:`field_create`, so ``is`` comparison identifies a field.
    """

    def __init__(self, p: int, k: int, modulus: Sequence[int]):
        self.p = p
        self.k = k
        self.modulus = tuple(modulus)
        self.order = p ** k
        self._lock = threading.RLock()
        self._tables = None
        self._embed_cache: dict[tuple[int, int], np.ndarray] = {}

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __reduce__(self):
        return (field_create, (self.p, self.k))

    # -- encoding -----------------------------------------------------------

    def coeffs(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.k:
            coeffs = _poly_rem(coeffs, self.modulus, self.p)
        code = 0
        for c in reversed(list(coeffs)):
            code = code * self.p + c % self.p
        return code

    def from_int(self, n: int) -> int:
        """Image of an integer in the prime subfield."""
        return n % self.p

    def digits(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        pw = self.p ** np.arange(self.k, dtype=np.int64)
        return (codes[..., None] // pw) % self.p

    def elements(self) -> range:
        return range(self.order)

    def elem(self, x) -> "FieldElem":
        if isinstance(x, FieldElem):
            if x.ctx is not self:
                raise FieldMismatchError(f"element of {x.ctx} used in {self}")
            return x
        if isinstance(x, (list, tuple)):
            return FieldElem(self, self.from_coeffs(x))
        return FieldElem(self, self.from_int(int(x)))

    # -- tables -------------------------------------------------------------

    def _ref_mul(self, a: int, b: int) -> int:
        return self.from_coeffs(_poly_mulmod(self.coeffs(a), self.coeffs(b), self.modulus, self.p))

    def ref_mul(self, a: int, b: int) -> int:
        """Multiplication by schoolbook polynomial arithmetic (no tables)."""
        if self.k == 1:
            return a * b % self.p
        return self._ref_mul(a, b)

    def _ref_pow(self, a: int, e: int) -> int:
        return self.from_coeffs(_poly_powmod(self.coeffs(a), e, self.modulus, self.p))

    @property
    def generator(self) -> int:
        """Smallest primitive element (code order)."""
        return self._get_tables()[3]

    def _get_tables(self):
        if self._tables is None:
            with self._lock:
                if self._tables is None:
                    self._tables = self._build_tables()
        return self._tables

    def _build_tables(self):
        p, k, Q = self.p, self.k, self.order
        n = Q - 1
        factors = _prime_factors(n) if n > 1 else []
        if k == 1:
            powf = lambda a, e: pow(a, e, p)
        else:
            powf = self._ref_pow
        g = next(c for c in range(1, Q) if all(powf(c, n // r) != 1 for r in factors))

        # consecutive powers in blocks: block_{j+1} = block_j * g^B as a linear map on digits
        B = max(1, math.isqrt(n))
        first = [1]
        for _ in range(B - 1):
            first.append(self.ref_mul(first[-1], g))
        gB = self.ref_mul(first[-1], g)
        basis = [p ** i for i in range(k)]
        M = np.array([self.coeffs(self.ref_mul(b, gB)) for b in basis], dtype=np.float64)
        pw = (p ** np.arange(k, dtype=np.int64))
        D = self.digits(np.array(first, dtype=np.int64)).astype(np.float64)
        chunks = []
        filled = 0
        while filled < n:
            chunks.append((D.astype(np.int64) @ pw))
            filled += B
            D = np.mod(D @ M, p)
        exp1 = np.concatenate(chunks)[:n].astype(np.int32)
        exp = np.concatenate([exp1, exp1])
        log = np.zeros(Q, dtype=np.int32)
        log[exp1] = np.arange(n, dtype=np.int32)
        if np.unique(exp1).size != n:
            raise AssertionError(f"{self}: generator {g} is not primitive")
        # Zech logarithm: zech[i] = log(1 + g^i), -1 where 1 + g^i = 0
        c0 = exp1 % p
        plus1 = exp1 - c0 + (c0 + 1) % p
        zech = np.where(plus1 == 0, -1, log[plus1]).astype(np.int32)
        small = Q <= (1 << 16)
        lists = (exp.tolist(), log.tolist(), zech.tolist()) if small else None
        return exp, log, zech, g, lists

    # -- scalar arithmetic on codes -----------------------------------------

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.k == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        if a == 0:
            return b
        if b == 0:
            return a
        exp, log, zech, _, lists = self._get_tables()
        if lists is not None:
            exp, log, zech = lists
        la = int(log[a])
        z = int(zech[(int(log[b]) - la) % (self.order - 1)])
        return 0 if z < 0 else int(exp[la + z])

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        if self.p == 2 or a == 0:
            return a
        exp, log, _, _, lists = self._get_tables()
        if lists is not None:
            exp, log = lists[0], lists[1]
        return int(exp[int(log[a]) + (self.order - 1) // 2])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        exp, log, _, _, lists = self._get_tables()
        if lists is not None:
            exp, log = lists[0], lists[1]
        return int(exp[int(log[a]) + int(log[b])])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        exp, log, _, _, _ = self._get_tables()
        return int(exp[(self.order - 1 - int(log[a])) % (self.order - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if e == 0:
            return 1
        if a == 0:
            return 0
        if self.k == 1:
            return pow(a, e, self.p)
        exp, log, _, _, _ = self._get_tables()
        return int(exp[(int(log[a]) * e) % (self.order - 1)])

    # -- vectorized arithmetic on code arrays ---------------------------------

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        exp, log, zech, _, _ = self._get_tables()
        la = log[a]
        z = zech[(log[b] - la) % (self.order - 1)]
        res = exp[la + z].astype(np.int64)
        res[z < 0] = 0
        res = np.where(a == 0, b, res)
        return np.where(b == 0, a, res)

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        exp, log, _, _, _ = self._get_tables()
        res = exp[log[a] + (self.order - 1) // 2].astype(np.int64)
        return np.where(a == 0, 0, res)

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        if self.k == 1:
            return a * b % self.p
        exp, log, _, _, _ = self._get_tables()
        res = exp[log[a] + log[b]].astype(np.int64)
        return np.where((a == 0) | (b == 0), 0, res)

    def vpow(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        if self.k == 1:
            result = np.ones_like(a)
            base = a % self.p
            while e:
                if e & 1:
                    result = result * base % self.p
                base = base * base % self.p
                e >>= 1
            return result
        exp, log, _, _, _ = self._get_tables()
        res = exp[(log[a].astype(np.int64) * e) % (self.order - 1)].astype(np.int64)
        return np.where(a == 0, 0, res)

    def vinv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        if self.k == 1:
            return self.vpow(a, self.p - 2)
        exp, log, _, _, _ = self._get_tables()
        return exp[(self.order - 1 - log[a]) % (self.order - 1)].astype(np.int64)

    def vpoly(self, coeffs: Sequence[int], x) -> np.ndarray:
        """Evaluate the polynomial sum(coeffs[i] x^i) at every code in x (Horner)."""
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros_like(x)
        for c in reversed(list(coeffs)):
            acc = self.vadd(self.vmul(acc, x), c)
        return acc

    # -- subfield embedding -----------------------------------------------------

    def embedding_from(self, src: "FieldCtx") -> np.ndarray:
        """Table mapping every code of ``src`` to its image in this field."""
        if src is self:
            return np.arange(self.order, dtype=np.int64)
        if src.p != self.p or self.k % src.k:
            raise FieldMismatchError(f"{src} does not embed in {self}")
        key = (src.p, src.k)
        table = self._embed_cache.get(key)
        if table is None:
            with self._lock:
                table = self._embed_cache.get(key)
                if table is None:
                    table = self._build_embedding(src)
                    self._embed_cache[key] = table
        return table

    def _build_embedding(self, src: "FieldCtx") -> np.ndarray:
        if src.k == 1:
            return np.arange(src.order, dtype=np.int64)
        # codes of constants c < p are c in every field of characteristic p
        values = self.vpoly(src.modulus, np.arange(self.order))
        roots = np.flatnonzero(values == 0)
        if roots.size == 0:
            raise AssertionError(f"modulus of {src} has no root in {self}: corrupted modulus")
        r = int(roots[0])
        digits = src.digits(np.arange(src.order))
        out = np.zeros(src.order, dtype=np.int64)
        rpow = 1
        for i in range(src.k):
            out = self.vadd(out, self.vmul(digits[:, i], rpow))
            rpow = self.mul(rpow, r)
        return out

    def embed(self, src: "FieldCtx", a: int) -> int:
        return int(self.embedding_from(src)[a])


_create_lock = threading.Lock()


@functools.lru_cache(maxsize=None)
def _field_cached(p: int, k: int) -> FieldCtx:
    modulus = (0, 1) if k == 1 else smallest_irreducible(p, k)
    return FieldCtx(p, k, modulus)


def field_create(p: int, k: int = 1) -> FieldCtx:
    """Return the (shared) field F_{p^k}.

    The modulus is the smallest monic irreducible polynomial of degree k in
    code order of its lower coefficients.  For k = 1 the placeholder
    modulus ``x`` is recorded and arithmetic is plain mod p.
    """
    p, k = int(p), int(k)
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    if k < 1:
        raise InputError(f"extension degree must be >= 1, got {k}")
    if p ** k > FIELD_CAP:
        raise BudgetError(f"field size {p}^{k} exceeds cap 2^24")
    with _create_lock:
        return _field_cached(p, k)


# ---------------------------------------------------------------------------
# Element wrapper for the public, context-checked API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldElem:
    ctx: FieldCtx
    code: int

    @property
    def coeffs(self) -> list[int]:
        return self.ctx.coeffs(self.code)

    def _other(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.ctx is not self.ctx:
                raise FieldMismatchError(f"cannot combine {self.ctx} and {other.ctx} elements")
            return other.code
        if isinstance(other, int):
            return self.ctx.from_int(other)
        return NotImplemented

    def __add__(self, other):
        return FieldElem(self.ctx, self.ctx.add(self.code, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self.code, self._other(other)))

    def __rsub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self._other(other), self.code))

    def __mul__(self, other):
        return FieldElem(self.ctx, self.ctx.mul(self.code, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElem(self.ctx, self.ctx.div(self.code, self._other(other)))

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.code))

    def __pow__(self, e: int):
        return FieldElem(self.ctx, self.ctx.pow(self.code, e))

    def __bool__(self):
        return self.code != 0

    def __repr__(self):
        if self.ctx.k == 1:
            return f"{self.code}"
        return "[" + ",".join(map(str, self.coeffs)) + "]"


def arith(ctx: FieldCtx, a: FieldElem, b: FieldElem, op: str) -> FieldElem:
    a, b = ctx.elem(a), ctx.elem(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise InputError(f"unknown field operation {op!r}")


def inverse(ctx: FieldCtx, a: FieldElem) -> FieldElem:
    a = ctx.elem(a)
    return FieldElem(ctx, ctx.inv(a.code))


def enumerate_elements(ctx: FieldCtx) -> Iterator[FieldElem]:
    for code in ctx.elements():
        yield FieldElem(ctx, code)


def embed(src: FieldCtx, dst: FieldCtx, a: FieldElem) -> FieldElem:
    a = src.elem(a)
    return FieldElem(dst, dst.embed(src, a.code))
