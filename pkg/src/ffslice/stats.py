"""Intersection-count distributions p_k^N and their limits.

``exact_distribution`` counts, for every codimension-m subspace V of
P^n(F_{q^N}), how many rational points of X lie on V.  The limiting law
for a variety with the simple tangency property is the truncated
rencontres sum returned by ``closed_form_pk``.

Randomness: a run seed s drives block b of any Monte Carlo routine through
``numpy.random.SeedSequence(s, spawn_key=(b,))``.  Blocks have a fixed size
and are merged in block order, so results do not depend on the thread
count.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, ConsistencyError, InputError
from .gf import FieldCtx
from .linsub import (
    enumerate_subspaces,
    gaussian_binomial,
    lines_through,
    sample_uniform,
    subspace_from_rows,
)
from .polynomial import HomogPoly, conic_discriminant, evaluate_many
from .projspace import point_count
from .variety import VarietySpec, intersection_count, points_over, subspace_in_variety

DEFAULT_SEED = 0xB3271
MC_BLOCK = 512
PAIR_BUDGET = 1 << 32
EXACT_MODE_LIMIT = 1 << 22


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _rencontres_tail(top: int, k: int) -> Fraction:
    return sum((Fraction((-1) ** (k + s) * math.comb(s, k), math.factorial(s)) for s in range(k, top + 1)),
               Fraction(0))


def closed_form_pk(d: int, k: int) -> Fraction:
    """Limit probability that a random codim-m subspace meets X (degree d) in k points."""
    if d < 0 or not 0 <= k <= d:
        raise InputError(f"need 0 <= k <= d, got k={k}, d={d}")
    return _rencontres_tail(d, k)


def closed_form_conjecture(d: int, e: int, k: int) -> Fraction:
    """Predicted probability for a random irreducible degree-e slice; k ranges over 0..d*e."""
    if d < 1 or e < 1 or not 0 <= k <= d * e:
        raise InputError(f"need 0 <= k <= d*e, got k={k}, d={d}, e={e}")
    return _rencontres_tail(d * e, k)


def limit_vector(d: int, e: int = 1) -> list[Fraction]:
    return [closed_form_conjecture(d, e, k) if e != 1 else closed_form_pk(d, k) for k in range(d * e + 1)]


# ---------------------------------------------------------------------------
# Histograms
# ---------------------------------------------------------------------------

@dataclass
class IntersectionHistogram:
    """Counts of subspaces by number of intersection points.

    ``counts`` holds every subspace (or sample) under its set-theoretic
    point count, so ``sum(counts.values()) == total``.  ``contained`` says
    how many of them lie entirely inside X; those sit at k = |V(F)|.
    """

    N: int
    Q: int
    mode: str
    total: int
    counts: dict[int, int]
    contained: int = 0
    samples: int | None = None
    seed: int | None = None
    stderr: dict[int, float] | None = None

    def probabilities(self) -> dict[int, Fraction]:
        return {k: Fraction(c, self.total) for k, c in sorted(self.counts.items())}

    def deviation(self, limit: Sequence[Fraction]) -> Fraction:
        probs = self.probabilities()
        keys = set(probs) | set(range(len(limit)))
        return max(abs(probs.get(k, Fraction(0)) - (limit[k] if k < len(limit) else 0)) for k in keys)

    def check_mass(self):
        if sum(self.counts.values()) != self.total or any(c < 0 for c in self.counts.values()):
            raise ConsistencyError(f"histogram {self.counts} does not add up to {self.total}")
        return self


def _sorted_counts(c: Counter) -> dict[int, int]:
    return {int(k): int(v) for k, v in sorted(c.items()) if v}


def _run_blocks(fn, blocks: Sequence, threads: int) -> list:
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, blocks))


# ---------------------------------------------------------------------------
# Exact counting
# ---------------------------------------------------------------------------

def _generic_counts(spec: VarietySpec, N: int, budget: int, threads: int) -> tuple[Counter, int]:
    pts = points_over(spec, N)
    ctx = pts.ctx
    full = None
    counts: Counter = Counter()
    contained = 0
    subspaces = list(enumerate_subspaces(ctx, spec.n, spec.m, budget=budget))
    chunk = max(1, len(subspaces) // max(threads * 4, 1))
    blocks = [subspaces[i:i + chunk] for i in range(0, len(subspaces), chunk)]

    def work(block):
        local: Counter = Counter()
        inside = 0
        for V in block:
            k = intersection_count(pts, V)
            local[k] += 1
            if k == V.point_count() and subspace_in_variety(spec, N, V):
                inside += 1
        return local, inside

    for local, inside in _run_blocks(work, blocks, threads):
        counts.update(local)
        contained += inside
    return counts, contained


def _pair_counts(spec: VarietySpec, N: int, threads: int) -> tuple[Counter, int]:
    """Line histogram from point pairs.

    For each point P of X, the other points are grouped by the line they
    span with P; a line carrying j >= 2 points of X shows up from each of
    its j points with j-1 partners.  Lines with one point follow from the
    incidence total |X| * (lines per point), empty lines from |J|.
    """
    pts = points_over(spec, N)
    ctx = pts.ctx
    Q = ctx.order
    n = spec.n
    X = pts.points
    size = len(X)
    if size * size > PAIR_BUDGET:
        raise BudgetError(f"{size} points give too many pairs for the pair-counting path")
    total = gaussian_binomial(n + 1, 2, Q)
    per_point = point_count(Q, n - 1)

    def work(rng):
        obs: Counter = Counter()
        full_lines = set()
        for i in range(*rng):
            others = np.delete(X, i, axis=0)
            if len(others) == 0:
                continue
            lines = lines_through(ctx, X[i], others).reshape(len(others), -1)
            uniq, cnt = np.unique(lines, axis=0, return_counts=True)
            obs.update(Counter((cnt + 1).tolist()))
            for row in uniq[cnt + 1 == Q + 1]:
                full_lines.add(tuple(row.tolist()))
        return obs, full_lines

    step = max(1, min(256, size // max(threads, 1) or 1))
    ranges = [(s, min(size, s + step)) for s in range(0, size, step)]
    obs: Counter = Counter()
    full_lines: set = set()
    for o, fl in _run_blocks(work, ranges, threads):
        obs.update(o)
        full_lines |= fl

    counts: Counter = Counter()
    incidences = 0
    for j, seen in obs.items():
        if seen % j:
            raise ConsistencyError(f"{seen} observations of {j}-point lines is not a multiple of {j}")
        counts[j] = seen // j
        incidences += j * counts[j]
    counts[1] = size * per_point - incidences
    counts[0] = total - sum(counts.values())
    if counts[1] < 0 or counts[0] < 0:
        raise ConsistencyError(f"negative recovered line counts {dict(counts)}")

    contained = 0
    for flat in full_lines:
        rows = [flat[:n + 1], flat[n + 1:]]
        V = subspace_from_rows(ctx, n, rows)
        if subspace_in_variety(spec, N, V):
            contained += 1
    return counts, contained


def exact_distribution(spec: VarietySpec, N: int, strategy: str = "auto", threads: int = 1,
                       budget: int | None = None) -> IntersectionHistogram:
    """Exact histogram of |X(F_{q^N}) ∩ V| over all codimension-m subspaces V.

    ``strategy`` is "generic" (enumerate subspaces), "pairs" (line
    subspaces only, counted from pairs of points of X) or "auto", which
    takes "pairs" whenever the subspaces are lines.
    """
    Q = spec.q ** N
    total = gaussian_binomial(spec.n + 1, spec.n + 1 - spec.m, Q)
    is_line = spec.n - spec.m == 1
    if strategy == "auto":
        strategy = "pairs" if is_line else "generic"
    if strategy == "pairs":
        if not is_line:
            raise InputError("the pair-counting path needs line subspaces (n - m = 1)")
        counts, contained = _pair_counts(spec, N, threads)
    elif strategy == "generic":
        counts, contained = _generic_counts(spec, N, budget, threads)
    else:
        raise InputError(f"unknown strategy {strategy!r}")
    hist = IntersectionHistogram(N, Q, "exact", total, _sorted_counts(counts), contained)
    return hist.check_mass()


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(samples: int) -> list[tuple[int, int]]:
    return [(b, min(MC_BLOCK, samples - b * MC_BLOCK)) for b in range(math.ceil(samples / MC_BLOCK))]


def _stderr(counts: dict[int, int], samples: int) -> dict[int, float]:
    return {k: math.sqrt((c / samples) * (1 - c / samples) / samples) for k, c in counts.items()}


def mc_distribution(spec: VarietySpec, N: int, samples: int, seed: int = DEFAULT_SEED,
                    threads: int = 1) -> IntersectionHistogram:
    """Empirical histogram from ``samples`` uniform codimension-m subspaces."""
    if samples < 1:
        raise InputError("Monte Carlo needs at least one sample")
    pts = points_over(spec, N)
    ctx = pts.ctx

    def work(block):
        b, size = block
        rng = block_rng(seed, b)
        local: Counter = Counter()
        inside = 0
        for _ in range(size):
            V = sample_uniform(ctx, spec.n, spec.m, rng)
            k = intersection_count(pts, V)
            local[k] += 1
            if k == V.point_count() and subspace_in_variety(spec, N, V):
                inside += 1
        return local, inside

    counts: Counter = Counter()
    contained = 0
    for local, inside in _run_blocks(work, _blocks(samples), threads):
        counts.update(local)
        contained += inside
    counts = _sorted_counts(counts)
    return IntersectionHistogram(N, ctx.order, "mc", samples, counts, contained,
                                 samples=samples, seed=seed, stderr=_stderr(counts, samples)).check_mass()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _rational(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator), "approx": float(x)}


def limit_json(d: int, e: int = 1) -> dict:
    return {str(k): _rational(v) for k, v in enumerate(limit_vector(d, e))}


def level_json(hist: IntersectionHistogram, d: int) -> dict:
    limit = limit_vector(d)
    probs = hist.probabilities()
    # every k in 0..d is listed, so JSON and CSV carry the same rows
    ks = sorted(set(probs) | set(range(d + 1)))
    out = {
        "N": hist.N,
        "q_N": hist.Q,
        "mode": hist.mode,
        "total": str(hist.total),
        "counts": {str(k): str(hist.counts.get(k, 0)) for k in ks},
        "contained": str(hist.contained),
        "p": {str(k): _rational(probs.get(k, Fraction(0))) for k in ks},
        "deviation": float(hist.deviation(limit)),
        "deviation_exact": _rational(hist.deviation(limit)),
    }
    if hist.mode == "mc":
        out["samples"] = hist.samples
        out["seed"] = hist.seed
        out["stderr"] = {str(k): hist.stderr.get(k, 0.0) for k in ks}
    return out


def choose_mode(spec: VarietySpec, N: int, mc_above: int | None) -> str:
    if mc_above is not None:
        return "mc" if N > mc_above else "exact"
    Q = spec.q ** N
    return "exact" if gaussian_binomial(spec.n + 1, spec.n + 1 - spec.m, Q) <= EXACT_MODE_LIMIT else "mc"


def convergence_report(spec: VarietySpec, levels: Iterable[int], mc_above: int | None = None,
                       samples: int = 10_000, seed: int = DEFAULT_SEED, threads: int = 1,
                       modes: dict[int, str] | None = None) -> dict:
    """Per-level distributions with their deviation from the closed-form limit."""
    rows = []
    for N in levels:
        mode = (modes or {}).get(N) or choose_mode(spec, N, mc_above)
        if mode == "exact":
            hist = exact_distribution(spec, N, threads=threads)
        elif mode == "mc":
            hist = mc_distribution(spec, N, samples, seed=seed, threads=threads)
        else:
            raise InputError(f"unknown mode {mode!r}")
        rows.append(level_json(hist, spec.d))
    return {"variety": spec.to_dict(), "levels": rows, "limit": limit_json(spec.d)}


def report_csv(report: dict) -> str:
    header = "N,mode,q_N,k,count,total,p_num,p_den,p_approx,limit_num,limit_den,limit_approx,deviation"
    lines = [header]
    limit = report["limit"]
    for lvl in report["levels"]:
        ks = sorted({int(k) for k in lvl["p"]} | {int(k) for k in limit})
        for k in ks:
            p = lvl["p"].get(str(k), {"num": "0", "den": "1", "approx": 0.0})
            lim = limit.get(str(k), {"num": "0", "den": "1", "approx": 0.0})
            lines.append(",".join(str(x) for x in (
                lvl["N"], lvl["mode"], lvl["q_N"], k, lvl["counts"].get(str(k), "0"), lvl["total"],
                p["num"], p["den"], repr(p["approx"]), lim["num"], lim["den"], repr(lim["approx"]),
                repr(lvl["deviation"]))))
    return "\n".join(lines) + "\n"


def plot_data(report: dict) -> str:
    return "q_N\tdeviation\n" + "".join(f"{lvl['q_N']}\t{lvl['deviation']!r}\n" for lvl in report["levels"])


# ---------------------------------------------------------------------------
# Probe: random irreducible conics against a plane curve
# ---------------------------------------------------------------------------

_CONIC_EXPS = [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


def random_conic(ctx: FieldCtx, rng: np.random.Generator) -> HomogPoly:
    """Uniform nonzero ternary quadratic form, i.e. uniform up to scalars."""
    while True:
        c = rng.integers(0, ctx.order, size=6).tolist()
        if any(c):
            return HomogPoly(ctx, 3, 2, dict(zip(_CONIC_EXPS, c)))


def conjecture_probe(spec: VarietySpec, N: int, samples: int, seed: int = DEFAULT_SEED,
                     e: int = 2, threads: int = 1) -> dict:
    """Histogram of |X ∩ Z(g)| over ``samples`` absolutely irreducible conics g."""
    if e != 2:
        raise InputError("the conjecture probe supports e = 2 only")
    if spec.n != 2 or spec.m != 1:
        raise InputError("the conjecture probe needs a plane curve (n = 2, m = 1)")
    if samples < 1:
        raise InputError("the conjecture probe needs at least one sample")
    pts = points_over(spec, N)
    ctx = pts.ctx
    X = pts.points

    def work(block):
        b, size = block
        rng = block_rng(seed, b)
        local: Counter = Counter()
        rejected = 0
        accepted = 0
        while accepted < size:
            g = random_conic(ctx, rng)
            if conic_discriminant(g) == 0:
                rejected += 1
                continue
            accepted += 1
            if len(X):
                local[int(np.count_nonzero(evaluate_many(g, X) == 0))] += 1
            else:
                local[0] += 1
        return local, rejected

    counts: Counter = Counter()
    rejected = 0
    for local, rej in _run_blocks(work, _blocks(samples), threads):
        counts.update(local)
        rejected += rej
    counts = _sorted_counts(counts)
    prediction = limit_vector(spec.d, e)
    ks = sorted(set(counts) | set(range(len(prediction))))
    freq = {k: counts.get(k, 0) / samples for k in ks}
    return {
        "variety": spec.to_dict(),
        "N": N,
        "q_N": ctx.order,
        "e": e,
        "samples": samples,
        "seed": seed,
        "rejected_reducible": rejected,
        "counts": {str(k): str(counts.get(k, 0)) for k in ks},
        "frequency": {str(k): freq[k] for k in ks},
        "stderr": {str(k): math.sqrt(freq[k] * (1 - freq[k]) / samples) for k in ks},
        "prediction": {str(k): _rational(prediction[k]) if k < len(prediction) else _rational(Fraction(0))
                       for k in ks},
    }
