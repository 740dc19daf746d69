"""Operational simple-tangency tests.

A plane curve of degree d has simple tangency when some line meets it with
multiplicity pattern {2, 1, ..., 1} over the algebraic closure, the double
point being a smooth point of the curve.  Found witnesses are only ever
evidence over the finite levels searched; a negative report means "not
found up to that level".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .gf import field_create
from .linsub import LinearSubspace, enumerate_subspaces, mat_mul, sample_uniform, subspace_from_rows
from .polynomial import (
    HomogPoly,
    evaluate,
    evaluate_many,
    restrict_to_line,
    restrict_to_subspace,
    root_multiplicities,
    splitting_field,
    splitting_pattern,
)
from .projspace import format_point, normalize, points_array
from .stats import DEFAULT_SEED, block_rng
from .variety import VarietySpec


@dataclass
class TangencyReport:
    found: bool
    pattern: list[int] = field(default_factory=list)
    witness: LinearSubspace | None = None
    point: tuple[int, ...] | None = None
    slice: LinearSubspace | None = None
    witness_ambient: LinearSubspace | None = None
    level: int | None = None
    levels_searched: list[int] = field(default_factory=list)
    trials: int = 0
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "found": self.found,
            "pattern": self.pattern,
            "levels_searched": self.levels_searched,
            "degenerate": self.degenerate,
            "notes": self.notes,
        }
        if self.found:
            ctx = self.witness.ctx
            out["level"] = self.level
            out["field_order"] = ctx.order
            out["witness_line"] = str(self.witness)
            out["tangency_point"] = format_point(ctx, self.point)
            if self.slice is not None:
                out["slice"] = str(self.slice)
                out["witness_line_ambient"] = str(self.witness_ambient)
        else:
            top = max(self.levels_searched) if self.levels_searched else 0
            out["status"] = f"not found up to level {top}"
        if self.trials:
            out["trials"] = self.trials
        return out


def _line_form(curve: HomogPoly, line: LinearSubspace):
    f = curve.lift(line.ctx)
    return restrict_to_line(f, line.rows[0], line.rows[1])


def line_pattern(curve: HomogPoly, line: LinearSubspace) -> list[int] | None:
    """Multiplicities of the curve along ``line`` over the closure.

    Returns None when the line lies inside the curve.
    """
    if curve.n_vars != 3 or line.n != 2 or line.r != 2:
        raise InputError("line_pattern needs a plane curve and a line of P^2")
    g = _line_form(curve, line)
    if g.is_zero():
        return None
    return splitting_pattern(g, splitting_field(line.ctx, g.degree))


def is_smooth_point(curve: HomogPoly, pt) -> bool:
    """Jacobian criterion with formal partials (valid in every characteristic)."""
    return any(evaluate(curve.partial(i), pt) for i in range(curve.n_vars))


def _simple_tangency_on(f: HomogPoly, partials: list[HomogPoly], line: LinearSubspace, d: int):
    """(pattern, double point) if ``line`` is a simple-tangency witness, else None."""
    ctx = line.ctx
    g = restrict_to_line(f, line.rows[0], line.rows[1])
    if g.is_zero():
        return None
    # the double root of a {2,1,..,1} pattern is unique, hence rational over the line's field
    doubles = [root for root, mult in root_multiplicities(g, ctx) if mult == 2]
    if len(doubles) != 1:
        return None
    pattern = splitting_pattern(g, splitting_field(ctx, d))
    if pattern != [2] + [1] * (d - 2):
        return None
    s, t = doubles[0]
    pt = normalize(ctx, [ctx.add(ctx.mul(s, a), ctx.mul(t, b)) for a, b in zip(*line.rows)])
    if not any(evaluate(h, pt) for h in partials):
        return None
    return pattern, pt


def _all_singular(f: HomogPoly, partials: list[HomogPoly]) -> bool:
    pts = points_array(f.ctx, 2)
    on = pts[evaluate_many(f, pts) == 0]
    if len(on) == 0:
        return False
    smooth = np.zeros(len(on), dtype=bool)
    for h in partials:
        smooth |= evaluate_many(h, on) != 0
    return not smooth.any()


def curve_has_simple_tangency(curve: HomogPoly, d: int | None = None, N_max: int = 1,
                              budget: int | None = None) -> TangencyReport:
    """Scan every line of P^2(F_{q^j}), j = 1..N_max, for a simple-tangency witness.

    The first witness in enumeration order at the lowest level is returned.
    """
    if curve.n_vars != 3:
        raise InputError("curve_has_simple_tangency needs a plane curve (3 variables)")
    d = curve.degree if d is None else d
    if d < 2:
        raise InputError("simple tangency needs degree d >= 2")
    if curve.is_zero():
        raise InputError("the zero form does not define a curve")
    report = TangencyReport(False)
    if curve.ctx.p == 2 and d == 2:
        report.notes.append("characteristic 2 conics are strange curves: all tangent lines share a point")
    degenerate_levels = 0
    for j in range(1, N_max + 1):
        ext = field_create(curve.ctx.p, curve.ctx.k * j)
        f = curve.lift(ext)
        partials = [f.partial(i) for i in range(3)]
        report.levels_searched.append(j)
        for line in enumerate_subspaces(ext, 2, 1, budget=budget):
            hit = _simple_tangency_on(f, partials, line, d)
            if hit is not None:
                report.found = True
                report.pattern, report.point = hit
                report.witness = line
                report.level = j
                return report
        if _all_singular(f, partials):
            degenerate_levels += 1
    if degenerate_levels == N_max:
        report.degenerate = True
        report.notes.append("every rational point of the curve is singular (non-reduced or multiple structure)")
    return report


def variety_has_simple_tangency(spec: VarietySpec, trials: int = 5, N_max: int = 1,
                                seed: int = DEFAULT_SEED) -> TangencyReport:
    """Slice a hypersurface by random planes and test each section curve.

    Planes are codimension m-1 subspaces of P^n over the base field, drawn
    from ``block_rng(seed, 0)``.
    """
    if len(spec.forms) != 1 or spec.m != spec.n - 1:
        raise InputError("variety_has_simple_tangency supports hypersurfaces only")
    if spec.m < 2:
        raise InputError("use curve_has_simple_tangency for curves (m = 1)")
    (form,) = spec.polys(1)
    ctx = spec.base_field
    rng = block_rng(seed, 0)
    report = TangencyReport(False, trials=trials)
    for _ in range(trials):
        W = sample_uniform(ctx, spec.n, spec.m - 1, rng)
        curve = restrict_to_subspace(form, W.rows)
        if curve.is_zero():
            continue
        sub = curve_has_simple_tangency(curve, spec.d, N_max)
        report.levels_searched = sorted(set(report.levels_searched) | set(sub.levels_searched))
        if sub.found:
            sub.slice = W
            sub.trials = trials
            lift = sub.witness.ctx.embedding_from(ctx)
            Wrows = lift[np.array(W.rows, dtype=np.int64)]
            rows = mat_mul(sub.witness.ctx, np.array(sub.witness.rows, dtype=np.int64), Wrows)
            sub.witness_ambient = subspace_from_rows(sub.witness.ctx, spec.n, rows.tolist())
            return sub
    return report
