import numpy as np
import pytest

import oracles
from hodge_transport.chains import boundary_at_scale, build_ambient, compute_thresholds, full_boundaries
from hodge_transport.errors import InvalidInputError
from hodge_transport.laplacian import (
    OperatorKind, WeightVector, extended_hodge, natural_hodge, perturb_operator, sigmoid_weight,
    smooth_hodge, smooth_hodge_d_derivative, smooth_hodge_from_weights,
)
from hodge_transport.spectral import zero_modes


def _cloud(seed=1, n=8):
    return np.random.default_rng(seed).uniform(-1, 1, (n, 2))


@pytest.mark.parametrize("d", [0.3, 0.6, 0.9, 1.4])
def test_extended_kernel_is_betti1(d):
    pts = _cloud()
    amb = build_ambient(len(pts))
    op = extended_hodge(boundary_at_scale(compute_thresholds(pts, amb), amb, d))
    s, _ = zero_modes(op)
    assert op.kind is OperatorKind.EXTENDED
    assert s.zero_dim == oracles.betti1(pts, d)


def test_extended_is_psd_and_identity_off_complex():
    pts = _cloud(4)
    amb = build_ambient(len(pts))
    b = boundary_at_scale(compute_thresholds(pts, amb), amb, 0.7)
    L = extended_hodge(b).matrix
    assert np.allclose(L, L.T)
    assert np.linalg.eigvalsh(L).min() > -1e-10
    off = np.flatnonzero(~b.active_edges)
    assert np.array_equal(L[np.ix_(off, off)], np.eye(off.size))
    on = np.flatnonzero(b.active_edges)
    assert not L[np.ix_(on, off)].any()


def test_extended_kernel_equals_harmonic_oracle():
    pts = oracles.regular_polygon(7) + 0.01 * _cloud(2, 7)
    amb = build_ambient(7)
    op = extended_hodge(boundary_at_scale(compute_thresholds(pts, amb), amb, 1.0))
    _, basis = zero_modes(op)
    assert np.allclose(basis @ basis.T, oracles.harmonic_projection(pts, 1.0), atol=1e-9)


def test_sigmoid_value():
    assert sigmoid_weight(1.0, 1.0) == pytest.approx(0.7310585786300049, abs=1e-15)
    with pytest.raises(InvalidInputError):
        sigmoid_weight(1.0, 0.0)


def test_unit_weights_give_full_laplacian():
    amb = build_ambient(5)
    B1, B2 = full_boundaries(amb)
    w = WeightVector(np.ones(5), np.ones(amb.n_edges), np.ones(amb.n_triangles))
    L = smooth_hodge_from_weights(amb, w, mu=3.0)
    assert np.allclose(L, B1.T @ B1 + B2 @ B2.T)


def test_smooth_approaches_extended():
    pts = _cloud(5)
    amb = build_ambient(len(pts))
    th = compute_thresholds(pts, amb)
    d = 0.8
    gap = np.min(np.abs(np.concatenate([th.edge_thresholds, th.triangle_thresholds]) - d))
    ext = extended_hodge(boundary_at_scale(th, amb, d))
    sm = smooth_hodge(th, amb, d, epsilon=gap / 40)
    assert perturb_operator(ext, sm) < 1e-6


def test_natural_hodge_on_active_block():
    pts = _cloud(6)
    amb = build_ambient(len(pts))
    b = boundary_at_scale(compute_thresholds(pts, amb), amb, 0.9)
    on = np.flatnonzero(b.active_edges)
    assert np.allclose(natural_hodge(b)[np.ix_(on, on)], extended_hodge(b).matrix[np.ix_(on, on)])


def test_d_derivative_second_order():
    pts = _cloud(7)
    amb = build_ambient(len(pts))
    th = compute_thresholds(pts, amb)
    d, eps = 0.9, 0.05
    exact = smooth_hodge_d_derivative(th, amb, d, eps)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (smooth_hodge(th, amb, d + h, eps).matrix - smooth_hodge(th, amb, d - h, eps).matrix) / (2 * h)
        errs.append(np.linalg.norm(fd - exact, 2))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


def test_smooth_parameter_checks():
    amb = build_ambient(3)
    th = compute_thresholds(np.eye(3, 2), amb)
    with pytest.raises(InvalidInputError):
        smooth_hodge(th, amb, 1.0, epsilon=-1.0)
    with pytest.raises(InvalidInputError):
        smooth_hodge(th, amb, 1.0, epsilon=0.1, mu=0.0)


def test_perturb_operator():
    a = np.diag([1.0, 2.0])
    assert perturb_operator(a, np.diag([1.0, 2.5])) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        perturb_operator(a, np.eye(3))
