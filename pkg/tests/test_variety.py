from fractions import Fraction

import numpy as np
import pytest

from ffslice.errors import InputError, UnsupportedDegreeError
from ffslice.gf import field_create
from ffslice.linsub import enumerate_subspaces, subspace_from_rows
from ffslice.variety import (
    VarietySpec,
    degree_sanity,
    intersection_count,
    load_spec,
    parse_spec,
    points_over,
    slice_irreducibility_counts,
    slice_irreducibility_density,
    subspace_in_variety,
)

from conftest import CONIC, NODAL_CUBIC, QUADRIC, ref_eval, ref_points, spec_text


def conic(p=3):
    return parse_spec(spec_text(p, 2, 1, 2, CONIC))


def test_parse_format():
    text = '# a conic\np=3\ne=1\nn=2  \nm=1\nd=2 # degree\npoly="x0*x2 - x1^2"  # comment\n'
    spec = parse_spec(text)
    assert spec == VarietySpec(3, 1, 2, 1, 2, (CONIC,))
    assert spec.to_dict()["hypotheses"]["geometrically_irreducible"] == "assumed, not verified"


@pytest.mark.parametrize("text", [
    "p=4\nn=2\nm=1\nd=2\npoly=\"x0\"\n",
    "p=3\nn=2\nm=1\nd=2\n",
    "p=3\nn=2\nm=3\nd=2\npoly=\"x0\"\n",
    "p=3\nn=2\nm=1\nd=2\npoly=\"x0 + x1^2\"\n",
    "p=3\nn=2\nm=1\nd=2\ncolour=blue\n",
    "p=three\nn=2\nm=1\nd=2\npoly=\"x0\"\n",
    "p=3\nn=2\nm=1\nd=2\npoly=\"x0\n",
    "p=3\nn=2\nm=1\nd=2\nnonsense\n",
])
def test_parse_errors(text):
    with pytest.raises(InputError):
        parse_spec(text)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_spec(tmp_path / "missing.var")


@pytest.mark.parametrize("N", [1, 2, 3])
def test_conic_points(N):
    ps = points_over(conic(), N)
    assert len(ps) == 3 ** N + 1
    # oracle: filter every point with the reference evaluator
    ctx = field_create(3, N)
    if N <= 2:
        terms = conic().polys(N)[0].terms
        assert {tuple(P) for P in ps.points.tolist()} == {P for P in ref_points(ctx, 2) if ref_eval(ctx, terms, P) == 0}


def test_hyperplane_points():
    assert len(points_over(parse_spec(spec_text(2, 2, 1, 1, "x0")), 1)) == 3


def test_several_forms():
    # twisted cubic: q^N + 1 points
    spec = parse_spec(spec_text(3, 3, 1, 3, "x0*x2 - x1^2", "x1*x3 - x2^2", "x0*x3 - x1*x2"))
    assert len(points_over(spec, 1)) == 4
    assert len(points_over(spec, 2)) == 10


def test_extension_base_field():
    spec = parse_spec(spec_text(2, 2, 1, 2, CONIC, e=2))
    assert spec.q == 4
    assert len(points_over(spec, 1)) == 5
    assert len(points_over(spec, 2)) == 17


def test_intersection_examples():
    spec = conic()
    ps = points_over(spec, 1)
    ctx = ps.ctx
    z0 = subspace_from_rows(ctx, 2, [(1, 0, 0), (0, 1, 0)])
    assert intersection_count(ps, z0) == 1
    counts = [intersection_count(ps, V) for V in enumerate_subspaces(ctx, 2, 1)]
    assert counts.count(0) == 3
    (full,) = enumerate_subspaces(ctx, 2, 0)
    assert intersection_count(ps, full) == len(ps)


def test_subspace_in_variety():
    spec = parse_spec(spec_text(2, 2, 1, 1, "x0"))
    ctx = spec.base_field
    assert subspace_in_variety(spec, 1, subspace_from_rows(ctx, 2, [(0, 1, 0), (0, 0, 1)]))
    assert not subspace_in_variety(spec, 1, subspace_from_rows(ctx, 2, [(1, 0, 0), (0, 0, 1)]))


def test_degree_sanity():
    rep = degree_sanity(conic(), 1)
    assert rep["max_count"] == 2 and rep["ok"] and not rep["warnings"]
    rep = degree_sanity(parse_spec(spec_text(3, 2, 1, 1, "x0")), 1)
    assert rep["max_count"] == 1 and rep["contained"] == 1
    rep = degree_sanity(parse_spec(spec_text(2, 2, 1, 3, "x0^2*x2 + x1^3 + x1*x2^2 + x2^3")), 1)
    assert rep["max_count"] < 3 and rep["warnings"]
    rep = degree_sanity(parse_spec(spec_text(3, 2, 1, 1, CONIC)), 1)
    assert not rep["ok"]


def _dual_tangent_planes(Q_field):
    """Planes a.x = 0 tangent to x0x3 - x1x2 are the points of a0a3 - a1a2 = 0."""
    ctx = Q_field
    n = 0
    for a in ref_points(ctx, 3):
        if ctx.sub(ctx.ref_mul(a[0], a[3]), ctx.ref_mul(a[1], a[2])) == 0:
            n += 1
    return n


@pytest.mark.parametrize("N,expect", [(1, Fraction(24, 40)), (2, Fraction(720, 820))])
def test_slice_density(N, expect):
    spec = parse_spec(spec_text(3, 3, 2, 2, QUADRIC))
    good, total = slice_irreducibility_counts(spec, N)
    ctx = field_create(3, N)
    assert total == len(ref_points(ctx, 3))
    assert good == total - _dual_tangent_planes(ctx)
    assert slice_irreducibility_density(spec, N) == expect


def test_slice_density_rejects():
    with pytest.raises(InputError):
        slice_irreducibility_density(conic(), 1)
    with pytest.raises(UnsupportedDegreeError):
        slice_irreducibility_density(parse_spec(spec_text(2, 3, 2, 4, "x0^4 + x1^4 + x2^4 + x3^4")), 1)


def test_cubic_surface_density_runs():
    spec = parse_spec(spec_text(2, 3, 2, 3, "x0^3 + x1^3 + x2^3 + x3^3"))
    good, total = slice_irreducibility_counts(spec, 1)
    assert total == 15 and 0 < good <= total


def test_budget_applies_to_cached_points():
    from ffslice.errors import BudgetError
    spec = conic()
    points_over(spec, 2)
    with pytest.raises(BudgetError):
        points_over(spec, 2, budget=50)
