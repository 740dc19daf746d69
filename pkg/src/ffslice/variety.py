"""Variety specifications, rational points over F_{q^N}, and slice probes."""

from __future__ import annotations

import functools
import shlex
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import BudgetError, InputError, UnsupportedDegreeError
from .gf import FieldCtx, field_create
from .linsub import LinearSubspace, contains_many, enumerate_subspaces
from .polynomial import HomogPoly, evaluate_many, linear_factor_search, parse_poly, restrict_to_subspace
from . import projspace
from .projspace import iter_point_blocks, point_count


@dataclass(frozen=True)
class VarietySpec:
    """X in P^n over F_q (q = p^e), of declared dimension m and degree d.

    Geometric irreducibility of X is a hypothesis taken on trust.
    """

    p: int
    e: int
    n: int
    m: int
    d: int
    forms: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise InputError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.d < 1:
            raise InputError(f"degree must be >= 1, got {self.d}")
        if not self.forms:
            raise InputError("a variety needs at least one defining form")
        for src in self.forms:
            parse_poly(src, self.n, self.base_field)  # validates syntax and homogeneity

    @property
    def base_field(self) -> FieldCtx:
        return field_create(self.p, self.e)

    @property
    def q(self) -> int:
        return self.p ** self.e

    def field(self, N: int) -> FieldCtx:
        return field_create(self.p, self.e * N)

    def polys(self, N: int = 1) -> list[HomogPoly]:
        """Defining forms lifted to F_{q^N}."""
        return list(_lifted_polys(self, N))

    @property
    def is_hypersurface(self) -> bool:
        return len(self.forms) == 1 and self.m == self.n - 1

    def to_dict(self) -> dict:
        return {
            "p": self.p, "e": self.e, "q": self.q, "n": self.n, "m": self.m, "d": self.d,
            "forms": list(self.forms),
            "hypotheses": {"geometrically_irreducible": "assumed, not verified"},
        }


@functools.lru_cache(maxsize=256)
def _lifted_polys(spec: VarietySpec, N: int) -> tuple[HomogPoly, ...]:
    ext = spec.field(N)
    return tuple(parse_poly(src, spec.n, spec.base_field).lift(ext) for src in spec.forms)


def parse_spec(text: str) -> VarietySpec:
    """Parse the key=value variety format (keys p, e, n, m, d, poly)."""
    values: dict[str, int] = {}
    forms: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "poly":
            try:
                parts = shlex.split(value, comments=True)
            except ValueError as exc:
                raise InputError(f"line {lineno}: {exc}") from None
            if len(parts) != 1:
                raise InputError(f"line {lineno}: poly must be a single quoted expression")
            forms.append(parts[0])
        elif key in ("p", "e", "n", "m", "d"):
            value = value.split("#", 1)[0].strip()
            try:
                values[key] = int(value)
            except ValueError:
                raise InputError(f"line {lineno}: {key} must be an integer, got {value!r}") from None
        else:
            raise InputError(f"line {lineno}: unknown key {key!r}")
    missing = [k for k in ("p", "n", "m", "d") if k not in values]
    if missing:
        raise InputError(f"missing keys: {', '.join(missing)}")
    return VarietySpec(values["p"], values.get("e", 1), values["n"], values["m"], values["d"], tuple(forms))


def load_spec(path) -> VarietySpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read variety file {path}: {exc.strerror}") from None
    return parse_spec(text)


@dataclass(frozen=True)
class PointSet:
    N: int
    ctx: FieldCtx
    n: int
    points: np.ndarray

    def __len__(self):
        return len(self.points)


_points_cache: dict[tuple[VarietySpec, int], PointSet] = {}
_points_lock = threading.Lock()


def points_over(spec: VarietySpec, N: int, budget: int | None = None) -> PointSet:
    """All points of Z(forms) in P^n(F_{q^N}), in enumeration order (cached)."""
    # checked up front so a cached result never sidesteps a tighter budget
    limit = projspace.POINT_BUDGET if budget is None else budget
    total = point_count(spec.q ** N, spec.n)
    if total > limit:
        raise BudgetError(f"|P^{spec.n}(F_{spec.q ** N})| = {total} exceeds point budget {limit}")
    key = (spec, N)
    with _points_lock:
        hit = _points_cache.get(key)
    if hit is not None:
        return hit
    ctx = spec.field(N)
    polys = spec.polys(N)
    found = []
    for block in iter_point_blocks(ctx, spec.n, budget=budget):
        mask = np.ones(len(block), dtype=bool)
        for f in polys:
            mask &= evaluate_many(f, block) == 0
        found.append(block[mask])
    pts = np.concatenate(found) if found else np.zeros((0, spec.n + 1), dtype=np.int64)
    for f in polys:
        if np.any(evaluate_many(f, pts)):
            raise AssertionError("enumerated point does not satisfy a defining form")
    ps = PointSet(N, ctx, spec.n, pts)
    with _points_lock:
        _points_cache[key] = ps
    return ps


def intersection_count(pts: PointSet, V: LinearSubspace) -> int:
    """|X(F) ∩ V(F)|: number of cached points of X lying in V."""
    if V.ctx is not pts.ctx or V.n != pts.n:
        raise InputError("subspace and point set live over different fields or spaces")
    if len(pts) == 0:
        return 0
    return int(contains_many(V, pts.points).sum())


def subspace_in_variety(spec: VarietySpec, N: int, V: LinearSubspace) -> bool:
    """Whether every defining form restricts to zero on V."""
    return all(restrict_to_subspace(f, V.rows).is_zero() for f in spec.polys(N))


def degree_sanity(spec: VarietySpec, N_probe: int = 1, **kwargs) -> dict:
    """Compare finite intersection counts with the declared degree; report only."""
    from .stats import exact_distribution

    hist = exact_distribution(spec, N_probe, **kwargs)
    Q = spec.q ** N_probe
    full = (Q ** (spec.n + 1 - spec.m) - 1) // (Q - 1)
    finite = dict(hist.counts)
    if hist.contained:
        finite[full] = finite.get(full, 0) - hist.contained
    ks = [k for k, c in finite.items() if c > 0]
    max_count = max(ks) if ks else 0
    warnings = []
    if max_count > spec.d:
        warnings.append(f"a subspace meets X in {max_count} > d = {spec.d} points; declared degree looks too small")
    elif max_count < spec.d:
        warnings.append(f"no subspace over F_{Q} meets X in d = {spec.d} points (max {max_count}); "
                        "small fields can miss d, try a larger N")
    return {"N": N_probe, "d": spec.d, "max_count": max_count, "contained": hist.contained,
            "ok": max_count <= spec.d, "warnings": warnings}


def slice_irreducibility_counts(spec: VarietySpec, N: int, budget: int | None = None) -> tuple[int, int]:
    """(planes with absolutely irreducible section, all planes) over F_{q^N}.

    X must be a surface in P^3 given by one form of degree <= 3.
    """
    if spec.n != 3 or len(spec.forms) != 1:
        raise InputError("slice irreducibility density needs a single-form surface in P^3")
    (f,) = spec.polys(N)
    if f.degree > 3:
        raise UnsupportedDegreeError(f"slice irreducibility is only decided for degree <= 3, got {f.degree}")
    ctx = spec.field(N)
    good = total = 0
    for plane in enumerate_subspaces(ctx, 3, 1, budget=budget):
        section = restrict_to_subspace(f, plane.rows)
        total += 1
        if section.is_zero():
            continue
        if section.degree == 1 or linear_factor_search(section).irreducible:
            good += 1
    return good, total


def slice_irreducibility_density(spec: VarietySpec, N: int, budget: int | None = None) -> Fraction:
    """Fraction of planes of P^3(F_{q^N}) whose section of X is absolutely irreducible."""
    return Fraction(*slice_irreducibility_counts(spec, N, budget))
