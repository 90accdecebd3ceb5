"""Zero-mode extraction, Riesz projection oracle and stability diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContourViolationError, GapFailureError, InvalidFrameError, InvalidInputError
from .laplacian import HodgeOperator, OperatorKind

DEFAULT_GAMMA_MIN = 1e-4
DEFAULT_NODES = 64
# an eigenvalue this close above zero_tol makes the kernel ambiguous
GAP_SEPARATION = 10.0


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    zero_dim: int
    gap: float
    zero_tol: float


@dataclass(frozen=True)
class Projection:
    P: np.ndarray
    rank: int


def _matrix(L) -> np.ndarray:
    return L.matrix if isinstance(L, HodgeOperator) else np.asarray(L, dtype=float)


def default_zero_tol(eigenvalues) -> float:
    top = float(np.max(eigenvalues)) if len(eigenvalues) else 1.0
    return 1e-8 * max(top, 1.0)


def _eigh(L):
    """Eigenpairs, exploiting the identity block of an extended operator."""
    A = _matrix(L)
    m = A.shape[0]
    act = getattr(L, "active_edges", None)
    if isinstance(L, HodgeOperator) and L.kind is OperatorKind.EXTENDED and act is not None:
        idx = np.flatnonzero(act)
        n_off = m - idx.size
        if idx.size:
            w, v = np.linalg.eigh(A[np.ix_(idx, idx)])
        else:
            w, v = np.zeros(0), np.zeros((0, 0))
        vecs = np.zeros((m, idx.size))
        vecs[idx, :] = v
        evals = np.concatenate([w, np.ones(n_off)])
        order = np.argsort(evals, kind="stable")
        return evals[order], vecs
    return np.linalg.eigh(A)


def zero_modes(L, zero_tol: float | None = None) -> tuple[SpectralSummary, np.ndarray]:
    """Spectral summary and an orthonormal kernel basis of ``L``.

    Raises
    ------
    GapFailureError
        If the first eigenvalue above ``zero_tol`` is within a factor
        ``GAP_SEPARATION`` of it, so the kernel dimension is ambiguous.
    """
    evals, vecs = _eigh(L)
    if zero_tol is None:
        zero_tol = default_zero_tol(evals)
    if not zero_tol > 0:
        raise InvalidInputError("zero_tol must be positive")
    k = int(np.sum(evals < zero_tol))
    gap = float(evals[k]) if k < evals.size else float("inf")
    if k < evals.size and gap <= GAP_SEPARATION * zero_tol:
        below = float(evals[k - 1]) if k > 0 else None
        raise GapFailureError(
            f"eigenvalue {gap:.3e} too close to zero tolerance {zero_tol:.3e}", below, gap
        )
    # eigh sorts ascending, and for extended operators the kernel sits in the active block
    basis = vecs[:, :k]
    return SpectralSummary(evals, k, gap, float(zero_tol)), basis


def projection_from_basis(basis: np.ndarray, tol: float = 1e-8) -> Projection:
    psi = np.asarray(basis, dtype=float)
    if psi.ndim != 2:
        raise InvalidFrameError("basis must be a 2-D array")
    k = psi.shape[1]
    err = np.linalg.norm(psi.T @ psi - np.eye(k)) if k else 0.0
    if err > tol:
        raise InvalidFrameError(f"basis columns are not orthonormal (error {err:.2e})")
    P = psi @ psi.T
    return Projection(0.5 * (P + P.T), k)


def kernel_projection(L, zero_tol: float | None = None) -> tuple[Projection, SpectralSummary]:
    summary, basis = zero_modes(L, zero_tol)
    return projection_from_basis(basis), summary


def _check_contour(L, gamma):
    evals = np.linalg.eigvalsh(_matrix(L))
    # the gap eigenvalue itself may come back a rounding error below gamma
    slack = 1e-9 * gamma
    bad = evals[(evals > gamma / 4 + slack) & (evals < gamma - slack)]
    if bad.size:
        raise ContourViolationError(
            f"eigenvalue {bad[0]:.4e} lies in the excluded annulus ({gamma / 4:.4e}, {gamma:.4e})"
        )


def _contour_nodes(gamma, n_nodes):
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    return 0.5 * gamma * np.exp(1j * theta)


def riesz_projection(L, gamma: float, n_nodes: int = DEFAULT_NODES, check: bool = True) -> Projection:
    """Spectral projection for the eigenvalues inside the circle of radius ``gamma/2``.

    Trapezoid rule on the circle: with z = r e^{i theta}, dz = i z dtheta, so
    (1/2 pi i) sum (z_j - L)^{-1} dz_j reduces to the mean of z_j (z_j - L)^{-1}.
    """
    if n_nodes < 16:
        raise InvalidInputError("at least 16 contour nodes are required")
    if not gamma > 0:
        raise InvalidInputError("gamma must be positive")
    A = _matrix(L)
    if check:
        _check_contour(L, gamma)
    m = A.shape[0]
    eye = np.eye(m)
    acc = np.zeros((m, m), dtype=complex)
    for z in _contour_nodes(gamma, n_nodes):
        acc += z * np.linalg.solve(z * eye - A, eye)
    acc /= n_nodes
    resid = float(np.max(np.abs(acc.imag))) if m else 0.0
    if resid > 1e-8:
        raise ContourViolationError(f"imaginary residue {resid:.2e} in contour integral")
    P = acc.real
    P = 0.5 * (P + P.T)
    return Projection(P, int(round(np.trace(P))))


@dataclass(frozen=True)
class ResolventReport:
    max_norm: float
    bound: float
    ok: bool


def resolvent_bound_check(L, gamma: float, n_nodes: int = DEFAULT_NODES) -> ResolventReport:
    A = _matrix(L)
    eye = np.eye(A.shape[0])
    worst = 0.0
    for z in _contour_nodes(gamma, n_nodes):
        smin = np.linalg.svd(z * eye - A, compute_uv=False)[-1]
        worst = max(worst, 1.0 / smin)
    bound = 2.0 / gamma
    return ResolventReport(worst, bound, worst <= bound * (1 + 1e-9))


def regular_mask(zero_dim: np.ndarray, gap: np.ndarray, gamma_min: float = DEFAULT_GAMMA_MIN,
                 valid: np.ndarray | None = None) -> np.ndarray:
    """Pointwise regular-region certification on a (d, t) grid.

    A point is regular when its gap is at least ``gamma_min`` and its kernel
    dimension equals that of every existing 4-neighbour.
    """
    zd = np.asarray(zero_dim)
    ok = np.asarray(gap) >= gamma_min
    if valid is not None:
        ok &= valid
    same = np.ones_like(ok)
    same[1:, :] &= zd[1:, :] == zd[:-1, :]
    same[:-1, :] &= zd[:-1, :] == zd[1:, :]
    same[:, 1:] &= zd[:, 1:] == zd[:, :-1]
    same[:, :-1] &= zd[:, :-1] == zd[:, 1:]
    return ok & same


def projection_curvature(P, dPd, dPt):
    """P [dP_d, dP_t] P in the ambient space."""
    return P @ (dPd @ dPt - dPt @ dPd) @ P


def central_difference(grid, i, j, axis, h):
    if axis == 0:
        return (grid[i + 1][j] - grid[i - 1][j]) / (2 * h)
    return (grid[i][j + 1] - grid[i][j - 1]) / (2 * h)


@dataclass
class StabilityReport:
    dL: np.ndarray          # ||L - L~|| per grid point
    dP: np.ndarray          # ||P - P~|| per grid point
    ratio: np.ndarray       # dP / dL (0 where dL == 0)
    gap: np.ndarray         # min of both gaps, pointwise
    regular: np.ndarray     # jointly regular mask
    gamma: float            # constant used for the bound
    bound: float            # 2 / gamma
    holds: np.ndarray       # bound satisfied, per regular point
    dDP: np.ndarray         # ||dP - dP~|| (max over both directions), stencil-interior points
    dF: np.ndarray          # ||F - F~||_F, stencil-interior points
    interior: np.ndarray    # mask where dDP and dF are defined

    @property
    def fraction_holding(self) -> float:
        n = int(self.regular.sum())
        return float(self.holds[self.regular].sum()) / n if n else 1.0


def _grid_spectra(family, zero_tol):
    n_d, n_t = len(family), len(family[0])
    P = [[None] * n_t for _ in range(n_d)]
    zd = np.zeros((n_d, n_t), dtype=int)
    gap = np.zeros((n_d, n_t))
    valid = np.ones((n_d, n_t), dtype=bool)
    for i in range(n_d):
        for j in range(n_t):
            try:
                proj, summ = kernel_projection(family[i][j], zero_tol)
            except GapFailureError:
                valid[i, j] = False
                zd[i, j] = -1
                continue
            P[i][j] = proj.P
            zd[i, j] = summ.zero_dim
            gap[i, j] = min(summ.gap, 1e300)
    return P, zd, gap, valid


def stability_ratios(L_family, Lt_family, gamma: float | None = None, *, dd: float = 1.0,
                     dt: float = 1.0, zero_tol: float | None = None,
                     gamma_min: float = DEFAULT_GAMMA_MIN) -> StabilityReport:
    """Compare zero-mode projections of two operator families on one grid.

    ``gamma`` defaults to the smallest pointwise gap over the jointly regular
    points, which is the constant the projection bound is checked against.
    """
    n_d, n_t = len(L_family), len(L_family[0])
    P, zd, gap, valid = _grid_spectra(L_family, zero_tol)
    Pt, zdt, gapt, validt = _grid_spectra(Lt_family, zero_tol)
    reg = regular_mask(zd, gap, gamma_min, valid) & regular_mask(zdt, gapt, gamma_min, validt)
    g = np.minimum(gap, gapt)
    if gamma is None:
        gamma = float(g[reg].min()) if reg.any() else float("nan")
    dL = np.zeros((n_d, n_t))
    dP = np.zeros((n_d, n_t))
    for i in range(n_d):
        for j in range(n_t):
            if not reg[i, j]:
                continue
            dL[i, j] = _opnorm(_matrix(L_family[i][j]) - _matrix(Lt_family[i][j]))
            dP[i, j] = _opnorm(P[i][j] - Pt[i][j])
    ratio = np.divide(dP, dL, out=np.zeros_like(dP), where=dL > 0)
    bound = 2.0 / gamma
    holds = dP <= bound * dL * (1 + 1e-9) + 1e-12

    interior = np.zeros((n_d, n_t), dtype=bool)
    interior[1:-1, 1:-1] = True
    for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
        interior[1:-1, 1:-1] &= reg[1 + di:n_d - 1 + di, 1 + dj:n_t - 1 + dj]
    dDP = np.zeros((n_d, n_t))
    dF = np.zeros((n_d, n_t))
    for i, j in zip(*np.nonzero(interior)):
        a_d = central_difference(P, i, j, 0, dd)
        a_t = central_difference(P, i, j, 1, dt)
        b_d = central_difference(Pt, i, j, 0, dd)
        b_t = central_difference(Pt, i, j, 1, dt)
        dDP[i, j] = max(_opnorm(a_d - b_d), _opnorm(a_t - b_t))
        F = projection_curvature(P[i][j], a_d, a_t)
        Ft = projection_curvature(Pt[i][j], b_d, b_t)
        dF[i, j] = np.linalg.norm(F - Ft)
    return StabilityReport(dL, dP, ratio, g, reg, gamma, bound, holds, dDP, dF, interior)


def _opnorm(a: np.ndarray) -> float:
    if not a.any():
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (a + a.T)))))
