import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hodge_transport.chains import (
    PointCloudSeries, betti1, boundary_at_scale, build_ambient, compute_thresholds,
    full_boundaries, load_series_csv, save_series_csv,
)
from hodge_transport.errors import InvalidInputError


@pytest.mark.parametrize("n", [3, 4, 7, 12])
def test_ambient_counts_and_order(n):
    amb = build_ambient(n)
    assert amb.n_edges == n * (n - 1) // 2
    assert amb.n_triangles == n * (n - 1) * (n - 2) // 6
    assert list(amb.edges) == sorted(amb.edges)
    assert list(amb.triangles) == sorted(amb.triangles)
    assert all(i < j for i, j in amb.edges)


def test_ambient_rejects_small():
    with pytest.raises(InvalidInputError):
        build_ambient(2)


@pytest.mark.parametrize("n", [4, 6, 9])
def test_boundary_of_boundary_vanishes(n):
    B1, B2 = full_boundaries(build_ambient(n))
    assert not np.any(B1 @ B2)


def test_full_boundaries_match_oracle():
    amb = build_ambient(5)
    B1, B2 = full_boundaries(amb)
    R1, R2 = oracles.boundaries(5, list(amb.edges), list(amb.triangles))
    assert np.array_equal(B1, R1)
    assert np.array_equal(B2, R2)


def test_thresholds_right_triangle():
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
    amb = build_ambient(3)
    th = compute_thresholds(pts, amb)
    # edges (0,1), (0,2), (1,2)
    assert np.allclose(th.edge_thresholds, [3.0, 4.0, 5.0])
    assert np.allclose(th.triangle_thresholds, [5.0])


def test_active_sets_ties_inclusive():
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
    amb = build_ambient(3)
    th = compute_thresholds(pts, amb)
    b = boundary_at_scale(th, amb, 4.0)
    assert b.active_edges.tolist() == [True, True, False]
    assert not b.active_triangles.any()
    assert betti1(b) == 0
    b = boundary_at_scale(th, amb, 5.0)
    assert b.active_triangles.all()


def test_two_squares_have_two_loops():
    sq = oracles.regular_polygon(4)
    pts = np.vstack([sq, sq + [5.0, 0.0]])
    amb = build_ambient(8)
    th = compute_thresholds(pts, amb)
    assert betti1(boundary_at_scale(th, amb, 1.5)) == 2
    assert betti1(boundary_at_scale(th, amb, 2.0)) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 9), st.integers(0, 10_000), st.floats(0.1, 2.0))
def test_betti1_matches_oracle(n, seed, d):
    pts = np.random.default_rng(seed).uniform(-1, 1, (n, 2))
    amb = build_ambient(n)
    b = boundary_at_scale(compute_thresholds(pts, amb), amb, d)
    assert betti1(b) == oracles.betti1(pts, d)


def test_negative_scale_rejected():
    amb = build_ambient(3)
    th = compute_thresholds(np.eye(3, 2), amb)
    with pytest.raises(InvalidInputError):
        boundary_at_scale(th, amb, -0.1)


def test_threshold_shape_checked():
    with pytest.raises(InvalidInputError):
        compute_thresholds(np.zeros((4, 2)), build_ambient(3))


def test_series_validation():
    with pytest.raises(InvalidInputError):
        PointCloudSeries(np.array([0.0, 0.0]), np.zeros((2, 3, 2)))
    with pytest.raises(InvalidInputError):
        PointCloudSeries(np.array([0.0]), np.zeros((1, 3, 3)))
    with pytest.raises(InvalidInputError):
        PointCloudSeries(np.array([0.0]), np.zeros((1, 2, 2)))


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    s = PointCloudSeries(np.array([0.0, 0.25, 0.5]), rng.standard_normal((3, 5, 2)))
    path = tmp_path / "s.csv"
    save_series_csv(s, path)
    back = load_series_csv(path)
    assert np.array_equal(back.times, s.times)
    assert np.array_equal(back.points, s.points)


def test_csv_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n0,1,2\n")
    with pytest.raises(InvalidInputError):
        load_series_csv(p)
    p.write_text("t,x,y\n0,0,0\n0,1,0\n0,0,1\n1,0,0\n")
    with pytest.raises(InvalidInputError):
        load_series_csv(p)
