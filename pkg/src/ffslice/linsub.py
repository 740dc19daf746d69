"""Projective linear subspaces of P^n in reduced row-echelon form.

A codimension-m subspace is the row space of an r x (n+1) matrix with
r = n+1-m.  Its reduced row-echelon basis is the canonical representative,
so equality and hashing are plain tuple comparisons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetError, FieldMismatchError, InputError
from .gf import FieldCtx
from .projspace import format_point, normalize_rows, points_array

SUBSPACE_BUDGET = 1 << 22


def gaussian_binomial(a: int, b: int, Q: int) -> int:
    """Number of b-dimensional linear subspaces of F_Q^a."""
    if not 0 <= b <= a:
        raise InputError(f"gaussian_binomial needs 0 <= b <= a, got a={a}, b={b}")
    num = den = 1
    for i in range(b):
        num *= Q ** (a - i) - 1
        den *= Q ** (b - i) - 1
    return num // den


@dataclass(frozen=True)
class LinearSubspace:
    ctx: FieldCtx
    n: int
    m: int
    rows: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]

    @property
    def r(self) -> int:
        return self.n + 1 - self.m

    def point_count(self) -> int:
        Q = self.ctx.order
        return (Q ** self.r - 1) // (Q - 1)

    def points(self) -> np.ndarray:
        """All projective points of the subspace as a normalized code array."""
        coeffs = points_array(self.ctx, self.r - 1)
        return normalize_rows(self.ctx, mat_mul(self.ctx, coeffs, np.array(self.rows, dtype=np.int64)))

    def __str__(self):
        return "[" + ", ".join(format_point(self.ctx, row) for row in self.rows) + "]"


def mat_mul(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for j in range(A.shape[1]):
        out = ctx.vadd(out, ctx.vmul(A[:, j:j + 1], B[j:j + 1, :]))
    return out


def rref(ctx: FieldCtx, rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form; returns (nonzero rows, pivot columns)."""
    M = [[int(x) for x in row] for row in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][col]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = ctx.inv(M[r][col])
        M[r] = [ctx.mul(x, inv) for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col]:
                c = M[i][col]
                M[i] = [ctx.sub(x, ctx.mul(c, y)) for x, y in zip(M[i], M[r])]
        pivots.append(col)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def subspace_from_rows(ctx: FieldCtx, n: int, rows: Sequence[Sequence[int]]) -> LinearSubspace:
    """Canonical subspace spanned by ``rows``; they must be independent."""
    if any(len(row) != n + 1 for row in rows):
        raise FieldMismatchError(f"rows must have {n + 1} coordinates")
    red, piv = rref(ctx, rows)
    if len(red) != len(rows):
        raise InputError("spanning rows are linearly dependent")
    return LinearSubspace(ctx, n, n + 1 - len(red), tuple(map(tuple, red)), tuple(piv))


def pivot_patterns(n: int, r: int) -> list[tuple[int, ...]]:
    """r-subsets of the n+1 columns in colexicographic order."""
    return sorted(itertools.combinations(range(n + 1), r), key=lambda c: c[::-1])


def enumerate_subspaces(ctx: FieldCtx, n: int, m: int, budget: int | None = None) -> Iterator[LinearSubspace]:
    """Every codimension-m subspace of P^n exactly once.

    Pivot patterns come in colexicographic order; within a pattern the free
    entries run through code order, row-major, last entry fastest.
    """
    if not 0 <= m <= n:
        raise InputError(f"codimension must satisfy 0 <= m <= n, got m={m}, n={n}")
    Q = ctx.order
    r = n + 1 - m
    total = gaussian_binomial(n + 1, r, Q)
    budget = SUBSPACE_BUDGET if budget is None else budget
    if total > budget:
        raise BudgetError(f"{total} subspaces of codimension {m} in P^{n}(F_{Q}) exceed budget {budget}")
    for piv in pivot_patterns(n, r):
        pivset = set(piv)
        free = [(i, j) for i, pc in enumerate(piv) for j in range(pc + 1, n + 1) if j not in pivset]
        for values in itertools.product(range(Q), repeat=len(free)):
            rows = [[0] * (n + 1) for _ in range(r)]
            for i, pc in enumerate(piv):
                rows[i][pc] = 1
            for (i, j), v in zip(free, values):
                rows[i][j] = v
            yield LinearSubspace(ctx, n, m, tuple(map(tuple, rows)), piv)


def contains_many(V: LinearSubspace, pts: np.ndarray) -> np.ndarray:
    """Membership of every row of ``pts`` in V, by reduction against the echelon rows."""
    pts = np.asarray(pts, dtype=np.int64)
    if pts.shape[-1] != V.n + 1:
        raise FieldMismatchError(f"points have {pts.shape[-1]} coordinates, subspace lives in P^{V.n}")
    ctx = V.ctx
    resid = pts
    for row, pc in zip(V.rows, V.pivots):
        resid = ctx.vsub(resid, ctx.vmul(pts[:, pc:pc + 1], np.array(row, dtype=np.int64)[None, :]))
    return ~resid.any(axis=1)


def contains(V: LinearSubspace, P: Sequence[int]) -> bool:
    return bool(contains_many(V, np.array([P], dtype=np.int64))[0])


def sample_uniform(ctx: FieldCtx, n: int, m: int, rng: np.random.Generator) -> LinearSubspace:
    """Uniform random codimension-m subspace, by rejection on full-rank matrices."""
    if not 0 <= m <= n:
        raise InputError(f"codimension must satisfy 0 <= m <= n, got m={m}, n={n}")
    r = n + 1 - m
    while True:
        M = rng.integers(0, ctx.order, size=(r, n + 1))
        red, piv = rref(ctx, M.tolist())
        if len(red) == r:
            return LinearSubspace(ctx, n, m, tuple(map(tuple, red)), tuple(piv))


def enumerate_nested_pairs(ctx: FieldCtx, n: int, m: int,
                           budget: int | None = None) -> Iterator[tuple[LinearSubspace, LinearSubspace]]:
    """Pairs (V, W), V of codimension m inside W of codimension m-1."""
    if m == 0:
        return
    if m > n:
        raise InputError(f"codimension must satisfy m <= n, got m={m}, n={n}")
    for W in enumerate_subspaces(ctx, n, m - 1, budget=budget):
        rw = W.r
        B = np.array(W.rows, dtype=np.int64)
        # hyperplanes of W, written in W's own coordinates
        for U in enumerate_subspaces(ctx, rw - 1, 1, budget=budget):
            rows = mat_mul(ctx, np.array(U.rows, dtype=np.int64), B)
            yield subspace_from_rows(ctx, n, rows.tolist()), W


def lines_through(ctx: FieldCtx, P: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Echelon bases of the lines through P and each row of ``others``.

    P and the rows of ``others`` must be normalized and distinct from P.
    Returns an array of shape (len(others), 2, n+1).
    """
    P = np.asarray(P, dtype=np.int64)
    X = np.asarray(others, dtype=np.int64)
    a = int(np.flatnonzero(P)[0])
    b = (X != 0).argmax(axis=1)
    Pb = np.broadcast_to(P, X.shape)
    same = b == a
    R1 = np.where((b < a)[:, None], X, Pb)
    R2 = np.where((b < a)[:, None], Pb, X)
    if same.any():
        R2 = R2.copy()
        R2[same] = normalize_rows(ctx, ctx.vsub(X[same], P[None, :]))
    piv2 = (R2 != 0).argmax(axis=1)
    idx = np.arange(len(X))
    R1 = ctx.vsub(R1, ctx.vmul(R1[idx, piv2][:, None], R2))
    return np.stack([R1, R2], axis=1)


def format_subspace(V: LinearSubspace) -> str:
    return str(V)
