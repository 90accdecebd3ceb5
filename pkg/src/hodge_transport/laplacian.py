"""Degree-1 Hodge operators on the ambient edge space.

Two variants are assembled:

* the *extended* Laplacian, which is the ordinary combinatorial Laplacian on
  active edges and the identity on inactive ones, so its kernel is exactly the
  harmonic space of the active complex;
* the *smooth* Hodge-type operator, in which every simplex carries a sigmoid
  activation weight and inactive edge directions are lifted by a penalty ``mu``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import expit

from .chains import AmbientChainSpace, BoundaryMatrices, FiltrationFrame, full_boundaries
from .errors import InvalidInputError


class OperatorKind(str, Enum):
    EXTENDED = "extended"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class HodgeOperator:
    matrix: np.ndarray
    kind: OperatorKind
    params: dict = field(default_factory=dict)
    # extended operators only: edges on which the matrix is the ordinary Laplacian
    active_edges: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class WeightVector:
    w_vertices: np.ndarray
    w_edges: np.ndarray
    w_triangles: np.ndarray


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def extended_hodge(bnd: BoundaryMatrices) -> HodgeOperator:
    act_e = bnd.active_edges
    act_t = bnd.active_triangles
    m = act_e.shape[0]
    L = np.zeros((m, m))
    idx = np.flatnonzero(act_e)
    if idx.size:
        b1 = bnd.B1[:, idx]
        b2 = bnd.B2[np.ix_(idx, np.flatnonzero(act_t))]
        L[np.ix_(idx, idx)] = b1.T @ b1 + b2 @ b2.T
    off = np.flatnonzero(~act_e)
    L[off, off] = 1.0
    return HodgeOperator(_symmetrize(L), OperatorKind.EXTENDED, {}, act_e.copy())


def natural_hodge(bnd: BoundaryMatrices) -> np.ndarray:
    """Ordinary Laplacian B1^T B1 + B2 B2^T with zero rows/columns for inactive edges."""
    return _symmetrize(bnd.B1.T @ bnd.B1 + bnd.B2 @ bnd.B2.T)


def sigmoid_weight(s, epsilon: float):
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    return expit(np.asarray(s, dtype=float) / epsilon)


def _sigmoid_slope(s, epsilon):
    w = sigmoid_weight(s, epsilon)
    return w * (1.0 - w) / epsilon


def activation_weights(thresh: FiltrationFrame, amb: AmbientChainSpace, d: float, epsilon: float) -> WeightVector:
    return WeightVector(
        np.ones(amb.vertex_count),
        sigmoid_weight(d - thresh.edge_thresholds, epsilon),
        sigmoid_weight(d - thresh.triangle_thresholds, epsilon),
    )


def _check_smooth_params(epsilon, mu):
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if not mu > 0:
        raise InvalidInputError(f"mu must be positive, got {mu}")


def smooth_hodge_from_weights(amb: AmbientChainSpace, w: WeightVector, mu: float) -> np.ndarray:
    B1, B2 = full_boundaries(amb)
    s0 = np.sqrt(w.w_vertices)
    s1 = np.sqrt(w.w_edges)
    d1 = (s0[:, None] * B1) * s1[None, :]
    # d2 d2^T = S1 B2 W2 B2^T S1
    up = (B2 * w.w_triangles[None, :]) @ B2.T
    L = d1.T @ d1 + s1[:, None] * up * s1[None, :] + mu * np.diag(1.0 - w.w_edges)
    return _symmetrize(L)


def smooth_hodge(thresh: FiltrationFrame, amb: AmbientChainSpace, d: float,
                 epsilon: float, mu: float = 1.0) -> HodgeOperator:
    _check_smooth_params(epsilon, mu)
    w = activation_weights(thresh, amb, d, epsilon)
    L = smooth_hodge_from_weights(amb, w, mu)
    return HodgeOperator(L, OperatorKind.SMOOTH, {"epsilon": float(epsilon), "mu": float(mu)})


def smooth_hodge_d_derivative(thresh: FiltrationFrame, amb: AmbientChainSpace, d: float,
                              epsilon: float, mu: float = 1.0) -> np.ndarray:
    """Analytic derivative of the smooth operator with respect to the scale ``d``."""
    _check_smooth_params(epsilon, mu)
    B1, B2 = full_boundaries(amb)
    w1 = sigmoid_weight(d - thresh.edge_thresholds, epsilon)
    w2 = sigmoid_weight(d - thresh.triangle_thresholds, epsilon)
    dw1 = _sigmoid_slope(d - thresh.edge_thresholds, epsilon)
    dw2 = _sigmoid_slope(d - thresh.triangle_thresholds, epsilon)
    s1 = np.sqrt(w1)
    ds1 = 0.5 * dw1 / np.where(s1 > 0, s1, 1.0)
    G = B1.T @ B1
    up = (B2 * w2[None, :]) @ B2.T
    dup = (B2 * dw2[None, :]) @ B2.T
    # d/dd [S1 (G + up) S1] with S1 = diag(sqrt(w1))
    K = G + up
    dL = ds1[:, None] * K * s1[None, :] + s1[:, None] * K * ds1[None, :]
    dL += s1[:, None] * dup * s1[None, :]
    dL -= mu * np.diag(dw1)
    return _symmetrize(dL)


def perturb_operator(L, Ltilde) -> float:
    """Spectral norm of ``L - Ltilde``."""
    a = L.matrix if isinstance(L, HodgeOperator) else np.asarray(L)
    b = Ltilde.matrix if isinstance(Ltilde, HodgeOperator) else np.asarray(Ltilde)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    if diff.size == 0:
        return 0.0
    if diff.shape[0] == diff.shape[1] and np.array_equal(diff, diff.T):
        return float(np.max(np.abs(np.linalg.eigvalsh(diff))))
    return float(np.linalg.norm(diff, 2))
