"""Independent reference implementations used to check the package.

Nothing here imports the package; everything is brute force on small inputs.
"""
from __future__ import annotations

from itertools import combinations, permutations

import numpy as np


def pairwise(points):
    p = np.asarray(points, dtype=float)
    return np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))


def rips(points, d):
    """Edges and triangles of the Rips complex at scale d, in lexicographic order."""
    D = pairwise(points)
    n = D.shape[0]
    edges = [(i, j) for i, j in combinations(range(n), 2) if D[i, j] <= d]
    eset = set(edges)
    tris = [(i, j, k) for i, j, k in combinations(range(n), 3)
            if (i, j) in eset and (i, k) in eset and (j, k) in eset]
    return edges, tris


def boundaries(n, edges, tris):
    B1 = np.zeros((n, len(edges)))
    for c, (i, j) in enumerate(edges):
        B1[i, c], B1[j, c] = -1.0, 1.0
    pos = {e: c for c, e in enumerate(edges)}
    B2 = np.zeros((len(edges), len(tris)))
    for c, (i, j, k) in enumerate(tris):
        B2[pos[(j, k)], c] += 1.0
        B2[pos[(i, k)], c] -= 1.0
        B2[pos[(i, j)], c] += 1.0
    return B1, B2


def _rank(A):
    return int(np.linalg.matrix_rank(A)) if A.size else 0


def betti1(points, d) -> int:
    """Rank-nullity: dim C1 - rank B1 - rank B2."""
    edges, tris = rips(points, d)
    B1, B2 = boundaries(len(points), edges, tris)
    return len(edges) - _rank(B1) - _rank(B2)


def critical_values(points):
    D = pairwise(points)
    return np.unique(D[np.triu_indices(D.shape[0], 1)])


def betti_curve(points):
    """(scale, beta1) at every pairwise distance; beta1 is constant between them."""
    return [(float(v), betti1(points, v)) for v in critical_values(points)]


def harmonic_projection(points, d):
    """Projection onto ker B1 ∩ ker B2^T, embedded in the full lexicographic edge space."""
    n = len(points)
    all_edges = list(combinations(range(n), 2))
    edges, tris = rips(points, d)
    B1, B2 = boundaries(n, edges, tris)
    A = np.vstack([B1, B2.T]) if tris else B1
    _, s, vt = np.linalg.svd(A)
    rank = int((s > 1e-9 * max(1.0, s.max() if s.size else 1.0)).sum())
    null = vt[rank:].T
    emb = np.zeros((len(all_edges), null.shape[1]))
    idx = [all_edges.index(e) for e in edges]
    emb[idx, :] = null
    return emb @ emb.T


def power_iteration(A, iters=5000, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = A @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        lam = float(v @ A @ v)
    return lam


def polar(M):
    """Orthogonal factor M (M^T M)^{-1/2} via a symmetric eigendecomposition."""
    w, V = np.linalg.eigh(M.T @ M)
    return M @ (V @ np.diag(1.0 / np.sqrt(w)) @ V.T)


def matching_cost(p, q):
    """Brute-force minimum over assignments of the summed Euclidean distances, halved."""
    best = np.inf
    for perm in permutations(range(len(q))):
        best = min(best, sum(np.linalg.norm(p[a] - q[b]) for a, b in enumerate(perm)))
    return 0.5 * best


def regular_polygon(n, radius=1.0, center=(0.0, 0.0), phase=0.0):
    a = phase + 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)])


# tangent planes of the unit sphere: an analytic rank-2 family with known curvature

def sphere_basis(theta, phi):
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    e_t = np.array([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)])
    e_p = np.array([-np.sin(phi), np.cos(phi), 0.0])
    return n, e_t, e_p


def sphere_frame(theta, phi):
    _, e_t, e_p = sphere_basis(theta, phi)
    return np.column_stack([e_t, e_p])


def sphere_curvature_ambient(theta, phi):
    """P [dP/dtheta, dP/dphi] P for P = I - n n^T, from exact derivatives."""
    _, e_t, e_p = sphere_basis(theta, phi)
    return np.sin(theta) * (np.outer(e_t, e_p) - np.outer(e_p, e_t))


def random_orthogonal(k, rng):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))
