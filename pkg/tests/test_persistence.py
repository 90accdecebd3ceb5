import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hodge_transport import datasets
from hodge_transport.chains import build_ambient, compute_thresholds, full_boundaries
from hodge_transport.errors import ShortDiagramError
from hodge_transport.persistence import (
    PersistenceDiagram, alive_at, compute_h1_persistence, select_dominant_alive, signed_lift, top2_points,
)


def _diagram(pts, j=0):
    amb = build_ambient(len(pts))
    return compute_h1_persistence(compute_thresholds(pts, amb, j), amb), amb


# (birth, death) of the single loop, from the brute-force Betti curve
POLYGONS = [
    (4, 1.4142135623730951, 2.0),
    (6, 1.0000000000000004, 1.7320508075688772),
    (12, 0.517638090205042, 1.7320508075688772),
]


@pytest.mark.parametrize("n,birth,death", POLYGONS)
def test_regular_polygon_interval(n, birth, death):
    dg, _ = _diagram(oracles.regular_polygon(n))
    assert len(dg) == 1
    p = dg.points[0]
    assert p.birth == pytest.approx(birth, abs=1e-12)
    assert p.death == pytest.approx(death, abs=1e-12)


def test_double_circles_frozen_top2():
    cfg = datasets.GeneratorConfig("double_circles")
    dg, _ = _diagram(datasets.generate(cfg).frame(0))
    top = top2_points(dg)
    assert sorted(top[:, 0]) == pytest.approx([0.5639319554104631, 0.5840104981307422], abs=1e-12)
    assert sorted(top[:, 1]) == pytest.approx([1.7379439862545358, 1.831981043368819], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 9), st.integers(0, 10_000))
def test_alive_count_is_betti1(n, seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, (n, 2))
    dg, _ = _diagram(pts)
    crit = oracles.critical_values(pts)
    # midpoints keep clear of last-bit differences in the distance formula
    for d in np.append(0.5 * (crit[1:] + crit[:-1]), crit[-1] + 1.0):
        assert len(alive_at(dg, d)) == oracles.betti1(pts, d)


@pytest.mark.parametrize("seed", range(5))
def test_representatives_are_cycles(seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, (9, 2))
    dg, amb = _diagram(pts)
    B1, _ = full_boundaries(amb)
    th = compute_thresholds(pts, amb)
    for p in dg.points:
        assert not np.any(B1 @ p.rep_cycle)
        support = np.flatnonzero(p.rep_cycle)
        assert th.edge_thresholds[support].max() <= p.birth
        assert p.rep_cycle[p.birth_edge] == 1.0


def test_signed_lift_triangle():
    amb = build_ambient(3)
    v = signed_lift([0, 1, 2], amb)
    B1, _ = full_boundaries(amb)
    assert not np.any(B1 @ v)
    assert set(np.abs(v)) == {1.0}
    with pytest.raises(ValueError):
        signed_lift([0, 1], amb)


def test_points_sorted_by_lifetime():
    sq = oracles.regular_polygon(4)
    dg, _ = _diagram(np.vstack([sq, 2 * sq + [6.0, 0.0]]))
    life = [p.lifetime for p in dg.points]
    assert life == sorted(life, reverse=True)
    top = select_dominant_alive(dg, 2.9, 1)
    assert top[0].birth == pytest.approx(2 * np.sqrt(2))
    with pytest.raises(ValueError):
        select_dominant_alive(dg, 1.0, 0)


def test_short_diagram():
    dg, _ = _diagram(oracles.regular_polygon(5))
    with pytest.raises(ShortDiagramError):
        top2_points(dg)
    with pytest.raises(ShortDiagramError):
        top2_points(PersistenceDiagram(3, ()))


def test_keep_zero_length():
    pts = np.random.default_rng(0).uniform(-1, 1, (8, 2))
    amb = build_ambient(8)
    th = compute_thresholds(pts, amb)
    full = compute_h1_persistence(th, amb, keep_zero_length=True)
    short = compute_h1_persistence(th, amb)
    assert len(full) >= len(short)
    assert all(p.lifetime > 0 for p in short.points)
