"""Zero-mode frames on a (d, t) grid and their discrete gauge geometry.

Curvature is the central-difference discretisation of P [dP, dP] P, evaluated
in the local frame.  The one-step transport between neighbouring frames is the
orthogonal polar factor Q of their overlap matrix Psi_a^T Psi_b.  A vector with
coordinates v in frame a is carried to coordinates Q^T v in frame b, so a path
holonomy is the ordered product of the transposed steps.  This product
transforms by conjugation under a change of gauge at the base point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations, product

import numpy as np

from .errors import DegenerateSelectionError, InvalidFrameError, RankDeficitError, TransportBreakdownError
from .persistence import PersistenceDiagram, select_dominant_alive
from .spectral import zero_modes

ORTHO_TOL = 1e-10
MIN_PROJECTED_NORM = 1e-8
MIN_OVERLAP_SIGMA = 1e-6


class Selection(str, Enum):
    FULL_KERNEL = "full_kernel"
    PERSISTENCE = "persistence"


@dataclass(frozen=True)
class ZeroModeFrame:
    grid_index: tuple
    psi: np.ndarray = field(repr=False)
    selection: Selection = Selection.FULL_KERNEL

    @property
    def k(self) -> int:
        return self.psi.shape[1]

    def regauge(self, R: np.ndarray) -> "ZeroModeFrame":
        return ZeroModeFrame(self.grid_index, self.psi @ R, self.selection)


@dataclass
class CurvatureField:
    F: list                 # n_d x n_t nested list of k x k arrays (None where undefined)
    norm: np.ndarray        # Frobenius norms, NaN where undefined
    mask: np.ndarray        # True where F is defined

    def max_norm(self) -> float:
        return float(np.nanmax(self.norm)) if self.mask.any() else 0.0

    def ambient(self, frames, i, j) -> np.ndarray:
        psi = _psi(frames[i][j])
        return psi @ self.F[i][j] @ psi.T


@dataclass
class TransportRecord:
    steps: list
    cumulative: np.ndarray
    cycle_holonomy: np.ndarray
    permutation: np.ndarray
    permutation_map: tuple
    deviation: float

    @property
    def k(self) -> int:
        return self.cycle_holonomy.shape[0]


def _psi(frame) -> np.ndarray:
    return frame.psi if isinstance(frame, ZeroModeFrame) else np.asarray(frame, dtype=float)


def gram_schmidt(vectors, tol: float = MIN_PROJECTED_NORM) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalisation pass, in the given order."""
    cols = []
    for idx, v in enumerate(vectors):
        w = np.array(v, dtype=float)
        for _ in range(2):
            for q in cols:
                w -= (q @ w) * q
        n = np.linalg.norm(w)
        if n < tol:
            raise DegenerateSelectionError(f"vector {idx} is dependent on the previous ones (residual {n:.2e})")
        cols.append(w / n)
    return np.column_stack(cols) if cols else np.zeros((len(vectors[0]) if vectors else 0, 0))


def kernel_frame(L, grid_index=(0, 0), zero_tol=None) -> ZeroModeFrame:
    _, basis = zero_modes(L, zero_tol)
    return ZeroModeFrame(tuple(grid_index), basis, Selection.FULL_KERNEL)


def selected_frame(L, diagram: PersistenceDiagram, d: float, k: int, grid_index=(0, 0),
                   zero_tol=None, kernel_basis=None) -> ZeroModeFrame:
    """Persistence-selected zero-mode frame at scale ``d``.

    The representative cycles of the ``k`` longest-lived intervals alive at
    ``d`` are projected onto the kernel of ``L`` and orthonormalised in
    lifetime order.
    """
    chosen = select_dominant_alive(diagram, d, k)
    if len(chosen) < k:
        raise RankDeficitError(f"{len(chosen)} intervals alive at d={d}, {k} requested", len(chosen), k)
    if kernel_basis is None:
        _, kernel_basis = zero_modes(L, zero_tol)
    if kernel_basis.shape[1] < k:
        raise RankDeficitError(
            f"kernel dimension {kernel_basis.shape[1]} below requested rank {k}", kernel_basis.shape[1], k
        )
    projected = []
    for p in chosen:
        c = kernel_basis @ (kernel_basis.T @ p.rep_cycle)
        if np.linalg.norm(c) < MIN_PROJECTED_NORM:
            raise DegenerateSelectionError(f"cycle born at {p.birth:.4g} is orthogonal to the kernel")
        projected.append(c)
    return ZeroModeFrame(tuple(grid_index), gram_schmidt(projected), Selection.PERSISTENCE)


def _frame_curvature(c, dp, dm, tp, tm, dd, dt):
    """k x k curvature in the frame ``c`` from its four stencil neighbours.

    With A = dP_d and B = dP_t written through low-rank factors,
    c^T (AB - BA) c = X Y - (X Y)^T where X = c^T A and Y = B c.
    """
    X = ((c.T @ dp) @ dp.T - (c.T @ dm) @ dm.T) / (2 * dd)
    Y = (tp @ (tp.T @ c) - tm @ (tm.T @ c)) / (2 * dt)
    XY = X @ Y
    return XY - XY.T


def curvature_grid(frames, dd: float, dt: float, mask=None) -> CurvatureField:
    """Central-difference curvature on the interior of a frame grid.

    ``frames`` is an ``n_d x n_t`` nested list; ``None`` marks missing frames.
    ``mask`` (optional boolean grid) marks certified regular points; a stencil
    touching an uncertified point is left undefined.
    """
    n_d, n_t = len(frames), len(frames[0])
    ok = np.array([[f is not None for f in row] for row in frames], dtype=bool)
    if mask is not None:
        ok &= np.asarray(mask, dtype=bool)
    F = [[None] * n_t for _ in range(n_d)]
    norm = np.full((n_d, n_t), np.nan)
    defined = np.zeros((n_d, n_t), dtype=bool)
    for i in range(1, n_d - 1):
        for j in range(1, n_t - 1):
            nbrs = ((i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1))
            if not all(ok[a, b] for a, b in nbrs):
                continue
            ks = {_psi(frames[a][b]).shape[1] for a, b in nbrs}
            if len(ks) != 1:
                continue
            Fij = _frame_curvature(
                _psi(frames[i][j]), _psi(frames[i + 1][j]), _psi(frames[i - 1][j]),
                _psi(frames[i][j + 1]), _psi(frames[i][j - 1]), dd, dt,
            )
            F[i][j] = Fij
            norm[i, j] = np.linalg.norm(Fij)
            defined[i, j] = True
    return CurvatureField(F, norm, defined)


def ambient_curvature(P, P_dp, P_dm, P_tp, P_tm, dd, dt):
    """The same quantity assembled from dense projections (reference path)."""
    A = (P_dp - P_dm) / (2 * dd)
    B = (P_tp - P_tm) / (2 * dt)
    return P @ (A @ B - B @ A) @ P


def one_step_transport(psi_a, psi_b, min_sigma: float = MIN_OVERLAP_SIGMA) -> np.ndarray:
    a, b = _psi(psi_a), _psi(psi_b)
    if a.shape != b.shape:
        raise InvalidFrameError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return polar_factor(a.T @ b, min_sigma)


def polar_factor(M: np.ndarray, min_sigma: float = MIN_OVERLAP_SIGMA) -> np.ndarray:
    U, s, Vt = np.linalg.svd(M)
    if s.size and s[-1] < min_sigma:
        raise TransportBreakdownError(f"overlap is nearly singular (sigma_min={s[-1]:.2e})", float(s[-1]))
    return U @ Vt


def path_holonomy(frames) -> np.ndarray:
    """Parallel transport around a closed path, in the coordinates of its first frame.

    ``frames`` lists the frames visited; the path closes from the last frame
    back to the first.
    """
    k = _psi(frames[0]).shape[1]
    U = np.eye(k)
    n = len(frames)
    for s in range(n):
        Q = one_step_transport(frames[s], frames[(s + 1) % n])
        U = Q.T @ U
    return U


def rectangle_path(frames, i0: int, j0: int, i1: int, j1: int, t_first: bool = False) -> list:
    """Frames around the rectangle with corners (i0, j0) and (i1, j1), one grid step at a time.

    The default order is (i0,j0) -> (i1,j0) -> (i1,j1) -> (i0,j1); with
    ``t_first`` the loop runs the other way round, (i0,j0) -> (i0,j1) -> ...
    For a small loop with i1 > i0 and j1 > j0 the d-first holonomy is close
    to I - F * area, the t-first one to I + F * area.
    """
    def span(a, b):
        step = 1 if b >= a else -1
        return list(range(a, b, step))

    if t_first:
        path = [frames[i0][j] for j in span(j0, j1)]
        path += [frames[i][j1] for i in span(i0, i1)]
        path += [frames[i1][j] for j in span(j1, j0)]
        path += [frames[i][j0] for i in span(i1, i0)]
    else:
        path = [frames[i][j0] for i in span(i0, i1)]
        path += [frames[i1][j] for j in span(j0, j1)]
        path += [frames[i][j1] for i in span(i1, i0)]
        path += [frames[i0][j] for j in span(j1, j0)]
    if not path:
        path = [frames[i0][j0]]
    return path


def loop_holonomy(frames, i0: int, j0: int, i1: int, j1: int, t_first: bool = False) -> np.ndarray:
    return path_holonomy(rectangle_path(frames, i0, j0, i1, j1, t_first))


def nearest_signed_permutation(U: np.ndarray):
    """Exhaustive search for the signed permutation closest to ``U`` in Frobenius norm.

    Returns ``(matrix, perm)`` where ``perm[i]`` is the column holding the
    nonzero entry of row ``i``.
    """
    k = U.shape[0]
    best, best_err, best_perm = None, np.inf, None
    for perm in permutations(range(k)):
        for signs in product((1.0, -1.0), repeat=k):
            Pi = np.zeros((k, k))
            Pi[np.arange(k), perm] = signs
            err = np.linalg.norm(U - Pi)
            if err < best_err - 1e-15:
                best, best_err, best_perm = Pi, err, perm
    return best, tuple(int(p) for p in best_perm)


def cycle_holonomy(frames) -> TransportRecord:
    """Holonomy of the closed time loop t_0 -> ... -> t_{N-1} -> t_0 at fixed scale."""
    n = len(frames)
    k = _psi(frames[0]).shape[1]
    steps = [one_step_transport(frames[j], frames[(j + 1) % n]) for j in range(n)]
    H = np.eye(k)
    cumulative = np.zeros(n)
    for j, Q in enumerate(steps):
        H = Q.T @ H
        cumulative[j] = np.linalg.norm(H - np.eye(k))
    Pi, perm = nearest_signed_permutation(H)
    return TransportRecord(steps, cumulative, H, Pi, perm, float(np.linalg.norm(H - np.eye(k))))


def gauge_invariants(U: np.ndarray):
    """Trace, determinant and eigenvalues (sorted by argument, then real part)."""
    ev = np.linalg.eigvals(U)
    ev = ev[np.lexsort((ev.real, np.round(np.angle(ev), 12)))]
    return float(np.trace(U)), float(np.linalg.det(U)), ev


def quotient_rotation(U: np.ndarray):
    """Action of a 3 x 3 holonomy on the orthogonal complement of (1, 1, 1).

    Returns the 2 x 2 restricted matrix and its rotation angle in degrees,
    using the basis (1,-1,0)/sqrt2, (1,1,-2)/sqrt6.
    """
    if U.shape != (3, 3):
        raise InvalidFrameError("quotient rotation is defined for rank-3 holonomies")
    B = np.column_stack([np.array([1.0, -1.0, 0.0]) / np.sqrt(2), np.array([1.0, 1.0, -2.0]) / np.sqrt(6)])
    Uq = B.T @ U @ B
    return Uq, float(np.degrees(np.arctan2(Uq[1, 0], Uq[0, 0])))
