import numpy as np
import pytest

from hodge_transport import datasets as ds
from hodge_transport.chains import betti1, boundary_at_scale, build_ambient, compute_thresholds
from hodge_transport.errors import InvalidInputError
from hodge_transport.persistence import compute_h1_persistence, top2_points

POINT_CLOUDS = ["double_circles", "size_only", "dumbbell_deform", "dumbbell_rotate"]


@pytest.mark.parametrize("name", POINT_CLOUDS)
def test_samples_match_frame_at_and_period_closes(name):
    cfg = ds.GeneratorConfig(name, n_times=16)
    s = ds.generate(cfg)
    assert np.array_equal(s.times, np.arange(16) / 16)
    for j in (0, 5, 11):
        assert np.allclose(s.frame(j), ds.frame_at(cfg, s.times[j]), atol=1e-14)
    assert np.allclose(ds.frame_at(cfg, cfg.period), s.frame(0), atol=1e-12)


@pytest.mark.parametrize("name", POINT_CLOUDS)
def test_deterministic_and_seeded(name):
    a = ds.generate(ds.GeneratorConfig(name, seed=4))
    b = ds.generate(ds.GeneratorConfig(name, seed=4))
    c = ds.generate(ds.GeneratorConfig(name, seed=5))
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_separation_extremes():
    cfg = ds.GeneratorConfig("double_circles")
    assert ds.separation(cfg, 0.0) == pytest.approx(cfg.p("s_max"))
    assert ds.separation(cfg, 0.5) == pytest.approx(cfg.p("s_min"))


def test_double_circle_lifetime_order_flips_once_per_period():
    cfg = ds.GeneratorConfig("double_circles")
    s = ds.generate(cfg)
    amb = build_ambient(s.n_points)
    # the right ring is rigid, so its point keeps this birth value
    right_birth = 0.5840104981307422
    right_on_top = []
    for j in range(len(s)):
        dg = compute_h1_persistence(compute_thresholds(s.frame(j), amb), amb)
        top = top2_points(dg)
        assert np.min(np.abs(top[:, 0] - right_birth)) < 1e-12
        right_on_top.append(abs(top[0, 0] - right_birth) < 1e-12)
    assert np.flatnonzero(right_on_top).tolist() == [len(s) // 2]


def test_size_only_is_uniform_scaling():
    cfg = ds.GeneratorConfig("size_only")
    s = ds.generate(cfg)
    base = ds.gen_double_circles(cfg).frame(0)
    for j in range(len(s)):
        assert np.allclose(s.frame(j), base * ds.size_factor(cfg, s.times[j]))
    assert ds.size_factor(cfg, 0.25) == pytest.approx(1 + cfg.p("amplitude"))


def test_dumbbell_variants_share_first_frame():
    a = ds.generate(ds.GeneratorConfig("dumbbell_deform"))
    b = ds.generate(ds.GeneratorConfig("dumbbell_rotate"))
    assert np.array_equal(a.frame(0), b.frame(0))
    assert a.n_points == 2 * 12 + 16


def test_dumbbell_loops_at_reference_scale():
    for name in ("dumbbell_deform", "dumbbell_rotate"):
        s = ds.generate(ds.GeneratorConfig(name, n_times=8))
        amb = build_ambient(s.n_points)
        for j in range(len(s)):
            assert betti1(boundary_at_scale(compute_thresholds(s.frame(j), amb), amb, 1.35)) == 3


def test_rotated_dumbbell_has_constant_diagram():
    s = ds.generate(ds.GeneratorConfig("dumbbell_rotate", n_times=8))
    amb = build_ambient(s.n_points)
    tops = [top2_points(compute_h1_persistence(compute_thresholds(s.frame(j), amb), amb)) for j in range(8)]
    assert np.ptp(np.array(tops), axis=0).max() < 1e-12


def test_add_noise():
    s = ds.generate(ds.GeneratorConfig("double_circles", n_times=8))
    same = ds.add_noise(s, 0.0, 1)
    assert np.array_equal(same.points, s.points) and same.points is not s.points
    a, b = ds.add_noise(s, 0.1, 3), ds.add_noise(s, 0.1, 3)
    assert np.array_equal(a.points, b.points)
    assert np.std(a.points - s.points) == pytest.approx(0.1, rel=0.15)
    with pytest.raises(InvalidInputError):
        ds.add_noise(s, -1.0, 0)


def test_vineyard_family():
    cfg = ds.GeneratorConfig("vineyard_like")
    fam = ds.generate(cfg)
    assert len(fam.frames) == cfg.n_times
    for a in range(3):
        assert np.allclose(fam.vines[a, -1], fam.vines[(a + 1) % 3, 0])
    for psi in fam.frames:
        assert np.allclose(psi.T @ psi, np.eye(3), atol=1e-12)
    assert fam.latitude == pytest.approx(0.33272, abs=1e-5)
    assert fam.crossing_windows
    with pytest.raises(InvalidInputError):
        ds.frame_at(cfg, 0.0)


@pytest.mark.parametrize("kwargs", [
    {"n_times": 4},
    {"n_points_per_feature": 2},
    {"period": 0.0},
    {"shape": {"bogus": 1.0}},
    {"shape": {"radius": -1.0}},
])
def test_invalid_generator_config(kwargs):
    with pytest.raises(InvalidInputError):
        ds.GeneratorConfig("double_circles", **kwargs)


@pytest.mark.parametrize("name,shape", [
    ("double_circles", {"s_min": 0.0}),
    ("double_circles", {"s_max": 1.0}),
    ("size_only", {"amplitude": 0.5}),
    ("dumbbell_deform", {"outer_center": 2.0}),
    ("dumbbell_deform", {"right_ratio": 1.5}),
    ("dumbbell_rotate", {"middle_points": 2}),
])
def test_invalid_shapes(name, shape):
    with pytest.raises(InvalidInputError):
        ds.generate(ds.GeneratorConfig(name, shape=shape))


def test_odd_times_rejected_for_double_circles():
    with pytest.raises(InvalidInputError):
        ds.generate(ds.GeneratorConfig("double_circles", n_times=9))
