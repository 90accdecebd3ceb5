"""Diagram-level baselines: successive matching, holonomy-guided relabelling, PD drift."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShortDiagramError, UnsupportedRankError
from .persistence import PersistenceDiagram, top2_points


@dataclass
class TrackState:
    labeled: np.ndarray       # (n_times, 2, 2): tracked (birth, death) of labels 1 and 2
    candidates: np.ndarray    # (n_times, 2, 2): top-2 points in lifetime order
    swap_flags: np.ndarray    # (n_times - 1,) step j -> j+1
    margins: np.ndarray       # (n_times - 1,)
    separations: np.ndarray   # (n_times,)
    cost_id: np.ndarray
    cost_swap: np.ndarray

    @property
    def swap_count(self) -> int:
        return int(self.swap_flags.sum())


def _top2_series(diagrams) -> np.ndarray:
    out = []
    for j, dg in enumerate(diagrams):
        try:
            top = top2_points(dg) if isinstance(dg, PersistenceDiagram) else np.asarray(dg, dtype=float)
        except ShortDiagramError as exc:
            raise ShortDiagramError(str(exc), j) from exc
        if top.shape != (2, 2):
            raise ShortDiagramError(f"time index {j} needs exactly two tracked points, got shape {top.shape}", j)
        out.append(top)
    return np.array(out, dtype=float).reshape(-1, 2, 2)


def successive_match(diagrams) -> TrackState:
    """Vineyard-style tracking of the top two points by identity-vs-swap matching.

    ``diagrams`` may be persistence diagrams or ready-made (2, 2) arrays of
    top-2 points.  A swap is flagged only when the swap cost is strictly lower.
    """
    cand = _top2_series(diagrams)
    n = cand.shape[0]
    lab = np.empty_like(cand)
    lab[0] = cand[0]
    flags = np.zeros(max(n - 1, 0), dtype=bool)
    c_id = np.zeros(max(n - 1, 0))
    c_sw = np.zeros(max(n - 1, 0))
    for j in range(n - 1):
        p, q = lab[j], cand[j + 1]
        c_id[j] = np.sum((p[0] - q[0]) ** 2) + np.sum((p[1] - q[1]) ** 2)
        c_sw[j] = np.sum((p[0] - q[1]) ** 2) + np.sum((p[1] - q[0]) ** 2)
        flags[j] = c_sw[j] < c_id[j]
        lab[j + 1] = q[::-1] if flags[j] else q
    sep = np.linalg.norm(cand[:, 0] - cand[:, 1], axis=1)
    return TrackState(lab, cand, flags, np.abs(c_id - c_sw), sep, c_id, c_sw)


def swap_likeness(Q: np.ndarray) -> float:
    if Q.shape != (2, 2):
        raise UnsupportedRankError(f"swap-likeness needs a 2 x 2 transport, got {Q.shape}")
    return float(abs(Q[0, 1]) + abs(Q[1, 0]) - abs(Q[0, 0]) - abs(Q[1, 1]))


@dataclass
class GuidedTrack:
    reordered: np.ndarray     # (n_times, 2, 2)
    swap_likeness: np.ndarray # (n_times - 1,)
    permuted: np.ndarray      # (n_times - 1,) True where pi_j = (12)
    track_error: float


def holonomy_guided_match(diagrams, steps, reference=None) -> GuidedTrack:
    """Reorder candidate points by the swap-likeness of each one-step transport.

    The points at time ``j + 1`` are exchanged when the transport ``Q_j`` is
    mostly off-diagonal.  ``TrackError`` compares the result with
    ``reference`` (by default the successive-matching labels).
    """
    cand = _top2_series(diagrams)
    n = cand.shape[0]
    steps = list(steps)
    if any(np.asarray(Q).shape != (2, 2) for Q in steps):
        raise UnsupportedRankError("holonomy-guided tracking is defined for rank-2 transports")
    if len(steps) < n - 1:
        raise ValueError(f"need {n - 1} transports, got {len(steps)}")
    sl = np.array([swap_likeness(np.asarray(Q)) for Q in steps[: n - 1]])
    perm = sl > 0
    out = np.empty_like(cand)
    out[0] = cand[0]
    for j in range(n - 1):
        out[j + 1] = cand[j + 1][::-1] if perm[j] else cand[j + 1]
    if reference is None:
        reference = successive_match(cand).labeled
    ref = np.asarray(reference, dtype=float)
    err = np.sqrt(np.sum((ref - out) ** 2, axis=(1, 2)))
    return GuidedTrack(out, sl, perm, float(err.mean()))


def pd_drift_pair(p: np.ndarray, q: np.ndarray) -> float:
    """Half the minimum summed distance over the two assignments of two point pairs."""
    ident = np.linalg.norm(p[0] - q[0]) + np.linalg.norm(p[1] - q[1])
    swap = np.linalg.norm(p[0] - q[1]) + np.linalg.norm(p[1] - q[0])
    return 0.5 * min(ident, swap)


def pd_drift(baseline, noisy) -> tuple[np.ndarray, float]:
    a = _top2_series(baseline)
    b = _top2_series(noisy)
    if a.shape != b.shape:
        raise ValueError("baseline and noisy series differ in length")
    drift = np.array([pd_drift_pair(p, q) for p, q in zip(a, b)])
    return drift, float(drift.mean()) if drift.size else 0.0
