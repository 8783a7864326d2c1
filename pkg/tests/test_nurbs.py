import json

import numpy as np
import pytest

from tdcshell import nurbs
from tdcshell.errors import DomainError

from conftest import quarter_arc_patch


def random_params(patch, rng, n):
    (r0, r1), (s0, s1) = patch.domain
    return rng.uniform(r0, r1, n), rng.uniform(s0, s1, n)


def test_partition_of_unity_and_derivative_sums(rng):
    patch = quarter_arc_patch()
    patch = nurbs.refine_uniform(nurbs.elevate_degree(patch, 3), 4)
    R, S = random_params(patch, rng, 1000)
    for r, s in zip(R, S):
        ev = nurbs.eval_basis(patch, (r, s), max_deriv=3)
        assert abs(ev.values.sum() - 1.0) < 1e-12
        assert np.abs(ev.d1.sum(axis=0)).max() < 1e-12 * 10
        assert np.abs(ev.d2.sum(axis=0)).max() < 1e-10
        assert np.abs(ev.d3.sum(axis=0)).max() < 1e-8


def test_active_count_and_corner_interpolation():
    patch = nurbs.make_field_patch(1, 1)
    ev = nurbs.eval_basis(patch, (0.0, 0.0), max_deriv=0)
    assert len(ev.values) == 4
    assert abs(ev.values.max() - 1.0) < 1e-14
    assert np.sort(ev.values)[:-1].max() < 1e-14

    quad = nurbs.make_field_patch(2, 3)
    pr, ps = quad.degrees
    ev = nurbs.eval_basis(quad, (0.41, 0.77), max_deriv=1)
    assert len(ev.values) == (pr + 1) * (ps + 1)


def test_uniform_quadratic_midspan_sums():
    patch = nurbs.make_field_patch(2, 4)
    ev = nurbs.eval_basis(patch, (0.375, 0.375), max_deriv=1)
    assert abs(ev.values.sum() - 1.0) < 1e-12
    assert np.abs(ev.d1.sum(axis=0)).max() < 1e-12


def test_circular_arc_is_exact(rng):
    R = 2.5
    patch = quarter_arc_patch(radius=R)
    for r, s in zip(*random_params(patch, rng, 50)):
        x = nurbs.map_point(patch, r, s)
        assert abs(x[0] ** 2 + x[2] ** 2 - R * R) < 1e-12


def test_derivatives_match_finite_differences(rng):
    patch = nurbs.refine_uniform(nurbs.elevate_degree(quarter_arc_patch(), 4), 3)
    h = 1e-5

    def ev(r, s, k):
        return nurbs.eval_basis(patch, (r, s), max_deriv=k)

    for r, s in zip(*[v for v in (rng.uniform(0.1, 0.9, 8), rng.uniform(0.1, 0.9, 8))]):
        e0 = ev(r, s, 3)
        checks = [
            ((ev(r + h, s, 0).values - ev(r - h, s, 0).values) / (2 * h), e0.d1[:, 0]),
            ((ev(r, s + h, 0).values - ev(r, s - h, 0).values) / (2 * h), e0.d1[:, 1]),
            ((ev(r + h, s, 1).d1[:, 0] - ev(r - h, s, 1).d1[:, 0]) / (2 * h), e0.d2[:, 0]),
            ((ev(r, s + h, 1).d1[:, 0] - ev(r, s - h, 1).d1[:, 0]) / (2 * h), e0.d2[:, 1]),
            ((ev(r, s + h, 1).d1[:, 1] - ev(r, s - h, 1).d1[:, 1]) / (2 * h), e0.d2[:, 2]),
            ((ev(r + h, s, 2).d2[:, 0] - ev(r - h, s, 2).d2[:, 0]) / (2 * h), e0.d3[:, 0]),
            ((ev(r, s + h, 2).d2[:, 0] - ev(r, s - h, 2).d2[:, 0]) / (2 * h), e0.d3[:, 1]),
            ((ev(r, s + h, 2).d2[:, 2] - ev(r, s - h, 2).d2[:, 2]) / (2 * h), e0.d3[:, 3]),
        ]
        for fd, exact in checks:
            scale = max(np.abs(exact).max(), 1.0)
            assert np.abs(fd - exact).max() < 1e-6 * scale


def test_refine_identity_on_single_span():
    patch = quarter_arc_patch()
    same = nurbs.refine_uniform(patch, 1)
    assert np.allclose(same.control_points, patch.control_points)
    assert np.allclose(same.weights, patch.weights)
    assert len(same.kv_r.knots) == len(patch.kv_r.knots)


def test_refine_preserves_geometry(rng):
    patch = quarter_arc_patch()
    fine = nurbs.refine_uniform(patch, 4)
    for r, s in zip(*random_params(patch, rng, 100)):
        assert np.abs(nurbs.map_point(fine, r, s) - nurbs.map_point(patch, r, s)).max() < 1e-12


def test_refine_span_doubling_sequence():
    patch = quarter_arc_patch()
    for n in (2, 4, 8, 16):
        ref = nurbs.refine_uniform(patch, n)
        assert ref.kv_r.n_spans == n
        assert ref.kv_s.n_spans == n
    with pytest.raises(ValueError):
        nurbs.refine_uniform(nurbs.refine_uniform(patch, 3), 4)


def test_elevate_identity_and_errors():
    patch = quarter_arc_patch()
    same = nurbs.elevate_degree(patch, 2)
    assert same.degrees == (2, 2)
    with pytest.raises(ValueError):
        nurbs.elevate_degree(patch, 1)


def test_elevate_preserves_geometry(rng):
    patch = quarter_arc_patch()
    up = nurbs.elevate_degree(patch, 4)
    assert up.degrees == (4, 4)
    for r, s in zip(*random_params(patch, rng, 100)):
        assert np.abs(nurbs.map_point(up, r, s) - nurbs.map_point(patch, r, s)).max() < 1e-12


def test_elevate_refine_commute_pointwise(rng):
    patch = quarter_arc_patch()
    a = nurbs.refine_uniform(nurbs.elevate_degree(patch, 4), 3)
    b = nurbs.elevate_degree(nurbs.refine_uniform(patch, 3), 4)
    for r, s in zip(*random_params(patch, rng, 60)):
        assert np.abs(nurbs.map_point(a, r, s) - nurbs.map_point(b, r, s)).max() < 1e-12


def test_elevation_keeps_interior_continuity():
    patch = nurbs.refine_uniform(quarter_arc_patch(), 4)
    up = nurbs.elevate_degree(patch, 5)
    # multiplicity of interior knots grows by the elevation amount only
    interior = up.kv_r.breakpoints[1:-1]
    for u in interior:
        assert np.sum(np.isclose(up.kv_r.knots, u)) == 1 + 3


def test_json_roundtrip():
    patch = quarter_arc_patch()
    clone = nurbs.NurbsPatch.from_json(patch.to_json())
    assert np.allclose(clone.control_points, patch.control_points)
    assert np.allclose(clone.weights, patch.weights)
    assert clone.degrees == patch.degrees
    data = json.loads(patch.to_json())
    assert set(data) == {"degree_r", "degree_s", "knots_r", "knots_s",
                         "control_points", "weights"}


def test_domain_error_outside_patch():
    patch = quarter_arc_patch()
    with pytest.raises(DomainError):
        nurbs.eval_basis(patch, (1.5, 0.5))
    with pytest.raises(DomainError):
        nurbs.eval_basis(patch, (0.5, -0.2))


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        nurbs.KnotVector(2, np.array([0.0, 0.0, 1.0, 1.0]))  # not clamped for p=2
    with pytest.raises(ValueError):
        nurbs.KnotVector(2, np.array([0.0, 0.0, 0.0, 0.5, 0.2, 1.0, 1.0, 1.0]))
    patch = quarter_arc_patch()
    with pytest.raises(ValueError):
        nurbs.NurbsPatch(patch.kv_r, patch.kv_s, patch.control_points,
                         -patch.weights)
