"""Ambient chain space and Vietoris-Rips boundary matrices on a fixed vertex set.

Every complex built here lives inside the 2-skeleton of the full simplex on
``N`` vertices.  Edges and triangles are enumerated once, lexicographically, and
all per-scale objects are expressed in those fixed coordinates so that vectors
from different parameter values can be compared directly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class PointCloudSeries:
    """Time-indexed planar point clouds sharing one vertex labelling."""

    times: np.ndarray
    points: np.ndarray  # (n_times, N, 2)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 3 or points.shape[2] != 2:
            raise InvalidInputError(f"points must have shape (T, N, 2), got {points.shape}")
        if points.shape[0] != times.shape[0]:
            raise InvalidInputError("one time value per frame is required")
        if points.shape[1] < 3:
            raise InvalidInputError("at least 3 points per frame are required")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidInputError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.times.shape[0]

    def frame(self, j: int) -> np.ndarray:
        return self.points[j]


@dataclass(frozen=True)
class AmbientChainSpace:
    vertex_count: int
    edges: tuple
    triangles: tuple
    edge_index: dict = field(repr=False, compare=False)
    # (m2, 3) edge indices of the faces (j,k), (i,k), (i,j) of each triangle
    triangle_faces: np.ndarray = field(repr=False, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


@dataclass(frozen=True)
class FiltrationFrame:
    time_index: int
    edge_thresholds: np.ndarray
    triangle_thresholds: np.ndarray


@dataclass(frozen=True)
class BoundaryMatrices:
    B1: np.ndarray
    B2: np.ndarray
    active_edges: np.ndarray
    active_triangles: np.ndarray


_AMBIENT_CACHE: dict[int, AmbientChainSpace] = {}


def build_ambient(N: int) -> AmbientChainSpace:
    """Enumerate the edge and triangle bases of the full simplex on ``N`` vertices."""
    if int(N) != N or N < 3:
        raise InvalidInputError(f"need at least 3 vertices, got {N}")
    N = int(N)
    cached = _AMBIENT_CACHE.get(N)
    if cached is not None:
        return cached
    edges = tuple(combinations(range(N), 2))
    triangles = tuple(combinations(range(N), 3))
    edge_index = {e: k for k, e in enumerate(edges)}
    faces = np.array(
        [(edge_index[(j, k)], edge_index[(i, k)], edge_index[(i, j)]) for i, j, k in triangles],
        dtype=np.int64,
    ).reshape(-1, 3)
    amb = AmbientChainSpace(N, edges, triangles, edge_index, faces)
    _AMBIENT_CACHE[N] = amb
    return amb


_BOUNDARY_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def full_boundaries(amb: AmbientChainSpace) -> tuple[np.ndarray, np.ndarray]:
    """Integer boundary matrices of the maximal complex (every simplex active).

    The returned arrays are shared; callers must not modify them in place.
    """
    cached = _BOUNDARY_CACHE.get(amb.vertex_count)
    if cached is not None:
        return cached
    N, m, m2 = amb.vertex_count, amb.n_edges, amb.n_triangles
    B1 = np.zeros((N, m), dtype=np.int64)
    e = np.asarray(amb.edges, dtype=np.int64)
    cols = np.arange(m)
    B1[e[:, 0], cols] = -1
    B1[e[:, 1], cols] = 1
    B2 = np.zeros((m, m2), dtype=np.int64)
    cols = np.arange(m2)
    B2[amb.triangle_faces[:, 0], cols] = 1
    B2[amb.triangle_faces[:, 1], cols] = -1
    B2[amb.triangle_faces[:, 2], cols] = 1
    B1.setflags(write=False)
    B2.setflags(write=False)
    _BOUNDARY_CACHE[N] = (B1, B2)
    return B1, B2


def compute_thresholds(points, amb: AmbientChainSpace, time_index: int = 0) -> FiltrationFrame:
    pts = np.asarray(points, dtype=float)
    if pts.shape != (amb.vertex_count, 2):
        raise InvalidInputError(
            f"frame has shape {pts.shape}, ambient space expects ({amb.vertex_count}, 2)"
        )
    e = np.asarray(amb.edges, dtype=np.int64)
    edge_t = np.hypot(*(pts[e[:, 0]] - pts[e[:, 1]]).T)
    tri_t = edge_t[amb.triangle_faces].max(axis=1)
    return FiltrationFrame(time_index, edge_t, tri_t)


def boundary_at_scale(thresh: FiltrationFrame, amb: AmbientChainSpace, d: float) -> BoundaryMatrices:
    """Boundary matrices of the Rips complex at scale ``d``; ties count as active."""
    if d < 0:
        raise InvalidInputError(f"scale must be non-negative, got {d}")
    B1, B2 = full_boundaries(amb)
    act_e = thresh.edge_thresholds <= d
    act_t = thresh.triangle_thresholds <= d
    B1 = B1 * act_e[None, :]
    B2 = B2 * act_t[None, :]
    return BoundaryMatrices(B1.astype(float), B2.astype(float), act_e, act_t)


def betti1(bnd: BoundaryMatrices) -> int:
    """First Betti number of the active complex by rank-nullity."""
    n_e = int(bnd.active_edges.sum())
    if n_e == 0:
        return 0
    r1 = np.linalg.matrix_rank(bnd.B1[:, bnd.active_edges])
    b2 = bnd.B2[np.ix_(bnd.active_edges, bnd.active_triangles)]
    r2 = np.linalg.matrix_rank(b2) if b2.size else 0
    return n_e - int(r1) - int(r2)


def load_series_csv(path) -> PointCloudSeries:
    """Read a ``t,x,y`` CSV; rows sharing a ``t`` value form one frame."""
    frames: dict[float, list] = {}
    order: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:3]] != ["t", "x", "y"]:
            raise InvalidInputError(f"{path}: expected header t,x,y")
        for row in reader:
            t = float(row["t"])
            if t not in frames:
                frames[t] = []
                order.append(t)
            frames[t].append((float(row["x"]), float(row["y"])))
    if not order:
        raise InvalidInputError(f"{path}: no rows")
    sizes = {len(v) for v in frames.values()}
    if len(sizes) != 1:
        raise InvalidInputError(f"{path}: frames have differing point counts {sorted(sizes)}")
    return PointCloudSeries(np.array(order), np.array([frames[t] for t in order]))


def save_series_csv(series: PointCloudSeries, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        for t, frame in zip(series.times, series.points):
            for x, y in frame:
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
