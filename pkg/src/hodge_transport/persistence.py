"""H1 persistence of Vietoris-Rips filtrations with representative cycles.

Columns are reduced over GF(2), stored as Python integers used as bitsets.
Each finite or essential H1 interval carries the cycle recorded when its
birth edge was reduced, lifted to a signed integer cycle in the ambient edge
space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import AmbientChainSpace, FiltrationFrame
from .errors import ShortDiagramError


@dataclass(frozen=True)
class PersistencePoint:
    birth: float
    death: float
    rep_cycle: np.ndarray = field(repr=False, compare=False)
    birth_edge: int = -1

    @property
    def lifetime(self) -> float:
        return self.death - self.birth

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.death))


@dataclass(frozen=True)
class PersistenceDiagram:
    time_index: int
    points: tuple

    def __len__(self):
        return len(self.points)

    def finite_points(self):
        return [p for p in self.points if p.finite]

    def pairs(self) -> np.ndarray:
        return np.array([(p.birth, p.death) for p in self.points]).reshape(-1, 2)


def _sort_key(p: PersistencePoint):
    return (-p.lifetime, p.birth, p.birth_edge)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def signed_lift(edge_ids, amb: AmbientChainSpace, lead: int | None = None) -> np.ndarray:
    """Orient a GF(2) cycle so that it becomes an integer cycle.

    The support is split into closed trails by walking unused edges; each
    trail is oriented along its walking direction.  ``lead`` fixes which edge
    starts the first trail, traversed along its own orientation.
    """
    edges = amb.edges
    adj: dict[int, list[int]] = {}
    for e in sorted(edge_ids):
        i, j = edges[e]
        adj.setdefault(i, []).append(e)
        adj.setdefault(j, []).append(e)
    for lst in adj.values():
        lst.sort(reverse=True)
    used: set[int] = set()
    vec = np.zeros(amb.n_edges)
    remaining = sorted(edge_ids)

    def take(v):
        lst = adj[v]
        while lst and lst[-1] in used:
            lst.pop()
        return lst.pop() if lst else None

    order = ([lead] if lead is not None else []) + remaining
    for start_edge in order:
        if start_edge in used:
            continue
        i, j = edges[start_edge]
        used.add(start_edge)
        vec[start_edge] = 1.0
        origin, v = i, j
        while True:
            e = take(v)
            if e is None:
                break
            used.add(e)
            a, b = edges[e]
            if a == v:
                vec[e] = 1.0
                v = b
            else:
                vec[e] = -1.0
                v = a
        if v != origin:
            raise ValueError("support is not a GF(2) cycle")
    return vec


def compute_h1_persistence(thresh: FiltrationFrame, amb: AmbientChainSpace,
                           keep_zero_length: bool = False) -> PersistenceDiagram:
    """Standard column reduction over GF(2) for the Rips 2-skeleton.

    Simplices are ordered by (filtration value, dimension, lexicographic
    index).  Zero-length intervals are dropped unless ``keep_zero_length``.
    """
    et = thresh.edge_thresholds
    tt = thresh.triangle_thresholds
    edge_order = np.lexsort((np.arange(et.size), et))
    edge_pos = np.empty_like(edge_order)
    edge_pos[edge_order] = np.arange(edge_order.size)
    edges = amb.edges

    # boundary 1: rows are vertices, columns edges in filtration order
    pivot_owner: dict[int, tuple[int, int]] = {}
    birth_cycles: dict[int, int] = {}
    for e in edge_order:
        i, j = edges[e]
        r = (1 << i) | (1 << j)
        v = 1 << int(e)
        while r:
            piv = r.bit_length() - 1
            owner = pivot_owner.get(piv)
            if owner is None:
                pivot_owner[piv] = (r, v)
                break
            r ^= owner[0]
            v ^= owner[1]
        if not r:
            birth_cycles[int(e)] = v

    # boundary 2: rows are edge filtration positions, columns triangles in filtration order
    tri_order = np.lexsort((np.arange(tt.size), tt))
    faces_pos = edge_pos[amb.triangle_faces]
    cols_by_pivot: dict[int, int] = {}
    deaths: dict[int, float] = {}
    for tri in tri_order:
        a, b, c = faces_pos[tri]
        r = (1 << int(a)) | (1 << int(b)) | (1 << int(c))
        while r:
            piv = r.bit_length() - 1
            other = cols_by_pivot.get(piv)
            if other is None:
                cols_by_pivot[piv] = r
                deaths[int(edge_order[piv])] = float(tt[tri])
                break
            r ^= other

    pts = []
    for e, cyc in birth_cycles.items():
        b = float(et[e])
        dth = deaths.get(e, float("inf"))
        if dth <= b and not keep_zero_length:
            continue
        rep = signed_lift(list(_bits(cyc)), amb, lead=e)
        pts.append(PersistencePoint(b, dth, rep, e))
    pts.sort(key=_sort_key)
    return PersistenceDiagram(thresh.time_index, tuple(pts))


def alive_at(diagram: PersistenceDiagram, d: float):
    return [p for p in diagram.points if p.birth <= d < p.death]


def select_dominant_alive(diagram: PersistenceDiagram, d: float, k: int):
    if k < 1:
        raise ValueError("k must be at least 1")
    alive = sorted(alive_at(diagram, d), key=_sort_key)
    return alive[:k]


def top2_points(diagram: PersistenceDiagram) -> np.ndarray:
    """The two finite points of largest lifetime as a (2, 2) array of (birth, death)."""
    fin = sorted(diagram.finite_points(), key=_sort_key)
    if len(fin) < 2:
        raise ShortDiagramError(
            f"diagram at time index {diagram.time_index} has {len(fin)} finite points",
            diagram.time_index,
        )
    return np.array([[p.birth, p.death] for p in fin[:2]])
