"""Points of P^n over a finite field.

A point is a tuple of n+1 field codes, normalized so that its first nonzero
coordinate is 1.  Bulk enumeration hands out numpy blocks of shape
(count, n+1) in the fixed order: leading 1 at coordinate 0 first, the
remaining coordinates in lexicographic code order (last varies fastest),
then leading 1 at coordinate 1, and so on.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetError, InputError
from .gf import FieldCtx

POINT_BUDGET = 1 << 25

Point = tuple[int, ...]


def point_count(Q: int, n: int) -> int:
    """|P^n(F_Q)| = (Q^{n+1} - 1)/(Q - 1)."""
    return (Q ** (n + 1) - 1) // (Q - 1)


def normalize(ctx: FieldCtx, raw: Sequence[int]) -> Point:
    for c in raw:
        if c:
            if c == 1:
                return tuple(int(x) for x in raw)
            inv = ctx.inv(c)
            return tuple(ctx.mul(int(x), inv) for x in raw)
    raise InputError("the zero vector is not a projective point")


def normalize_rows(ctx: FieldCtx, rows: np.ndarray) -> np.ndarray:
    """Normalize each row of a code array; rows must be nonzero."""
    rows = np.asarray(rows, dtype=np.int64)
    nz = rows != 0
    if not nz.any(axis=1).all():
        raise InputError("the zero vector is not a projective point")
    lead = nz.argmax(axis=1)
    lc = rows[np.arange(len(rows)), lead]
    return ctx.vmul(rows, ctx.vinv(lc)[:, None])


def leading_index(rows: np.ndarray) -> np.ndarray:
    return (np.asarray(rows) != 0).argmax(axis=-1)


def _block_rows(Q: int, n: int, lead: int, start: int, stop: int) -> np.ndarray:
    width = n - lead
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((stop - start, n + 1), dtype=np.int64)
    out[:, lead] = 1
    for j in range(width):
        out[:, n - j] = idx % Q
        idx //= Q
    return out


def iter_point_blocks(ctx: FieldCtx, n: int, chunk: int = 1 << 20,
                      budget: int | None = None) -> Iterator[np.ndarray]:
    """Yield every point of P^n(ctx) as consecutive (rows, n+1) arrays."""
    Q = ctx.order
    total = point_count(Q, n)
    budget = POINT_BUDGET if budget is None else budget
    if total > budget:
        raise BudgetError(f"|P^{n}(F_{Q})| = {total} exceeds point budget {budget}")
    for lead in range(n + 1):
        size = Q ** (n - lead)
        for start in range(0, size, chunk):
            yield _block_rows(Q, n, lead, start, min(size, start + chunk))


def points_array(ctx: FieldCtx, n: int, budget: int | None = None) -> np.ndarray:
    return np.concatenate(list(iter_point_blocks(ctx, n, budget=budget)))


def enumerate_points(ctx: FieldCtx, n: int, budget: int | None = None) -> Iterator[Point]:
    for block in iter_point_blocks(ctx, n, chunk=4096, budget=budget):
        for row in block.tolist():
            yield tuple(row)


def point_index(Q: int, pt: Sequence[int]) -> int:
    """Position of a normalized point in the enumeration order."""
    n = len(pt) - 1
    lead = next(i for i, c in enumerate(pt) if c)
    offset = sum(Q ** (n - j) for j in range(lead))
    rest = 0
    for c in pt[lead + 1:]:
        rest = rest * Q + int(c)
    return offset + rest


def format_elem(ctx: FieldCtx, a: int) -> str:
    if ctx.k == 1:
        return str(int(a))
    return "[" + ",".join(str(c) for c in ctx.coeffs(int(a))) + "]"


def format_point(ctx: FieldCtx, pt: Sequence[int]) -> str:
    return "(" + ":".join(format_elem(ctx, c) for c in pt) + ")"
