import numpy as np
import pytest

import oracles
from hodge_transport.chains import boundary_at_scale, build_ambient, compute_thresholds
from hodge_transport.errors import ContourViolationError, GapFailureError, InvalidFrameError, InvalidInputError
from hodge_transport.laplacian import extended_hodge
from hodge_transport.spectral import (
    kernel_projection, projection_from_basis, regular_mask, resolvent_bound_check, riesz_projection,
    stability_ratios, zero_modes,
)


def _operator(seed=0, n=8, d=0.9):
    pts = np.random.default_rng(seed).uniform(-1, 1, (n, 2))
    amb = build_ambient(n)
    return extended_hodge(boundary_at_scale(compute_thresholds(pts, amb), amb, d))


@pytest.mark.parametrize("seed", range(6))
def test_riesz_matches_eigendecomposition(seed):
    op = _operator(seed)
    proj, s = kernel_projection(op)
    R = riesz_projection(op, s.gap)
    assert R.rank == s.zero_dim
    assert np.linalg.norm(R.P - proj.P, 2) < 1e-6


def test_riesz_on_diagonal():
    L = np.diag([0.0, 0.0, 1.0, 3.0])
    R = riesz_projection(L, 1.0)
    assert np.allclose(R.P, np.diag([1.0, 1.0, 0.0, 0.0]), atol=1e-12)


def test_riesz_rejects_bad_contour():
    L = np.diag([0.0, 0.5, 2.0])
    with pytest.raises(ContourViolationError):
        riesz_projection(L, 1.0)
    with pytest.raises(InvalidInputError):
        riesz_projection(L, 1.0, n_nodes=8)
    with pytest.raises(InvalidInputError):
        riesz_projection(L, 0.0)


def test_largest_eigenvalue_matches_power_iteration():
    op = _operator(3)
    s, _ = zero_modes(op)
    assert s.eigenvalues.max() == pytest.approx(oracles.power_iteration(op.matrix), rel=1e-8)


def test_gap_failure_when_ambiguous():
    L = np.diag([0.0, 5e-9, 1.0])
    with pytest.raises(GapFailureError) as exc:
        zero_modes(L, zero_tol=1e-9)
    assert exc.value.above == pytest.approx(5e-9)


def test_zero_tol_must_be_positive():
    with pytest.raises(InvalidInputError):
        zero_modes(np.eye(2), zero_tol=0.0)


def test_projection_requires_orthonormal_basis():
    with pytest.raises(InvalidFrameError):
        projection_from_basis(np.array([[1.0], [1.0]]))


def test_resolvent_bound_holds():
    op = _operator(2)
    s, _ = zero_modes(op)
    rep = resolvent_bound_check(op, s.gap)
    assert rep.ok
    assert rep.max_norm == pytest.approx(2.0 / s.gap, rel=1e-6)


def test_regular_mask_neighbours():
    zd = np.array([[1, 1, 1], [1, 2, 1], [1, 1, 1]])
    gap = np.ones((3, 3))
    gap[0, 0] = 1e-6
    m = regular_mask(zd, gap)
    expected = np.array([[False, False, True], [False, False, False], [True, False, True]])
    assert np.array_equal(m, expected)


def _family(points_fn, scales, n_t):
    out = []
    for d in scales:
        row = []
        for j in range(n_t):
            pts = points_fn(j)
            amb = build_ambient(len(pts))
            row.append(extended_hodge(boundary_at_scale(compute_thresholds(pts, amb), amb, d)))
        out.append(row)
    return out


def test_stability_identical_families():
    def pts(j):
        return oracles.regular_polygon(6, 1 + 0.05 * j)

    fam = _family(pts, np.linspace(1.1, 1.5, 5), 5)
    rep = stability_ratios(fam, fam)
    assert rep.regular.any()
    assert not rep.dP.any() and not rep.dL.any() and not rep.dF.any()
    assert rep.fraction_holding == 1.0


def test_stability_bound_under_noise():
    rng = np.random.default_rng(9)
    noise = 0.01 * rng.standard_normal((5, 6, 2))

    def base(j):
        return oracles.regular_polygon(6, 1 + 0.05 * j)

    fam = _family(base, np.linspace(1.1, 1.5, 5), 5)
    fam2 = _family(lambda j: base(j) + noise[j], np.linspace(1.1, 1.5, 5), 5)
    rep = stability_ratios(fam, fam2)
    assert rep.fraction_holding == 1.0
    reg = rep.regular
    assert np.all(rep.dP[reg] <= rep.bound * rep.dL[reg] + 1e-12)
