"""Seeded synthetic point-cloud series and the vineyard-like frame family.

Every series is sampled at ``t_j = j T / n_times`` for ``j < n_times``; the
generating formulas are ``T``-periodic, so the frame that would follow the last
sample is the first one again.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .chains import PointCloudSeries
from .errors import InvalidInputError


class GeneratorName(str, Enum):
    DOUBLE_CIRCLES = "double_circles"
    SIZE_ONLY = "size_only"
    DUMBBELL_DEFORM = "dumbbell_deform"
    DUMBBELL_ROTATE = "dumbbell_rotate"
    VINEYARD_LIKE = "vineyard_like"


DEFAULT_SHAPE = {
    # double circles
    "radius": 1.0,
    "s_min": 2.05,
    "s_max": 3.5,
    "jitter": 0.02,
    # relative radius excess of the left circle away from closest approach
    "contrast": 0.1,
    # widening of the right circle's largest gap, as a fraction of the spacing
    "birth_offset": 0.1,
    # size-only control
    "amplitude": 0.2,
    # dumbbell
    "outer_radius": 1.0,
    # the right outer loop is smaller so the middle and left loops stay the top two
    "right_ratio": 0.85,
    "outer_center": 3.7,
    "middle_radius": 1.3,
    "middle_points": 16,
    # peak relative stretch of the middle loop's horizontal semi-axis
    "middle_stretch": 0.7,
    # relative amplitude of the vertical semi-axis, a quarter period out of phase
    "middle_squeeze": 0.2,
    # vineyard-like vines
    "vine_birth": 0.5,
    "vine_death": 1.6,
    "vine_spread_birth": 0.15,
    "vine_spread_death": 0.25,
    "crossing_width": 0.05,
}


@dataclass
class GeneratorConfig:
    name: GeneratorName = GeneratorName.DOUBLE_CIRCLES
    n_points_per_feature: int = 12
    n_times: int = 40
    period: float = 1.0
    seed: int = 0
    shape: dict = field(default_factory=dict)

    def __post_init__(self):
        self.name = GeneratorName(self.name)
        unknown = set(self.shape) - set(DEFAULT_SHAPE)
        if unknown:
            raise InvalidInputError(f"unknown shape parameters: {sorted(unknown)}")
        self.shape = {**DEFAULT_SHAPE, **{k: float(v) for k, v in self.shape.items()}}
        if self.n_times < 8:
            raise InvalidInputError("n_times must be at least 8")
        if self.n_points_per_feature < 3:
            raise InvalidInputError("need at least 3 points per feature")
        if not self.period > 0:
            raise InvalidInputError("period must be positive")
        for key in ("radius", "outer_radius", "middle_radius"):
            if not self.shape[key] > 0:
                raise InvalidInputError(f"{key} must be positive")

    def times(self) -> np.ndarray:
        return self.period * np.arange(self.n_times) / self.n_times

    def p(self, key: str) -> float:
        return self.shape[key]


def _angles(n: int, jitter: float, rng: np.random.Generator) -> np.ndarray:
    spacing = 2 * np.pi / n
    return spacing * np.arange(n) + jitter * spacing * rng.uniform(-1.0, 1.0, n)


def _phase(t, period):
    return 2 * np.pi * np.asarray(t, dtype=float) / period


def separation(cfg: GeneratorConfig, t) -> np.ndarray:
    s_min, s_max = cfg.p("s_min"), cfg.p("s_max")
    return s_min + (s_max - s_min) * (1 + np.cos(_phase(t, cfg.period))) / 2


def _ring_angles(cfg: GeneratorConfig):
    """Angles of the left ring and of its mirrored, gap-widened partner."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_points_per_feature
    theta = _angles(n, cfg.p("jitter"), rng)
    # the right ring mirrors the left one, with its widest gap opened a little
    # further so its diagram point sits beside the left ring's scaling ray
    gaps = np.diff(np.append(theta, theta[0] + 2 * np.pi))
    k = int(np.argmax(gaps))
    theta_b = theta.copy()
    theta_b[(k + 1) % n] += cfg.p("birth_offset") * 2 * np.pi / n
    return theta, theta_b


def _ring_point(theta: np.ndarray) -> np.ndarray:
    # imported lazily: persistence is only needed for calibration
    from .chains import build_ambient, compute_thresholds
    from .persistence import compute_h1_persistence

    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    amb = build_ambient(len(theta))
    dg = compute_h1_persistence(compute_thresholds(pts, amb), amb)
    top = dg.finite_points()[0]
    return np.array([top.birth, top.death])


@dataclass(frozen=True)
class ContrastProfile:
    """Radius factor of the left ring: ``tie * (1 + c(t))``.

    ``tie`` equalises the two lifetimes; ``c`` tends to ``far`` away from
    closest approach and dips to ``-depth`` at t = T/2 along a Lorentzian
    profile.  At the neighbouring samples it equals ``near``, which lies
    between the lifetime tie and the point where the left ring's diagram
    trajectory passes closest to the right ring's point.
    """

    tie: float
    far: float
    near: float
    depth: float
    sharpness: float


def contrast_profile(cfg: GeneratorConfig) -> ContrastProfile:
    theta_a, theta_b = _ring_angles(cfg)
    pa, pb = _ring_point(theta_a), _ring_point(theta_b)
    tie = (pb[1] - pb[0]) / (pa[1] - pa[0])
    closest = float(pa @ pb / (pa @ pa))
    room = closest / tie - 1
    if not room > 0:
        raise InvalidInputError("birth_offset must move the right ring's point off the left ring's ray")
    far = cfg.p("contrast")
    near, depth = 0.6 * room, 0.25 * room
    if far <= near:
        raise InvalidInputError(f"contrast must exceed {near:.3g}")
    sharpness = float((far + depth) / (far - near) - 1)
    return ContrastProfile(float(tie), far, float(near), float(depth), sharpness)


def radius_contrast(prof: ContrastProfile, cfg: GeneratorConfig, t) -> np.ndarray:
    # squared distance from t = T/2 in units of one sample, periodic in t
    off = np.cos(_phase(t, cfg.period) / 2) ** 2 / np.sin(np.pi / cfg.n_times) ** 2
    return prof.far - (prof.far + prof.depth) / (1 + prof.sharpness * off)


def _double_circle_frame(cfg, prof, theta_a, theta_b, t) -> np.ndarray:
    r = cfg.p("radius")
    s = float(separation(cfg, t))
    ra = r * prof.tie * (1 + float(radius_contrast(prof, cfg, t)))
    left = np.array([-s / 2, 0.0]) + ra * np.column_stack([np.cos(theta_a), np.sin(theta_a)])
    right = np.array([s / 2, 0.0]) + r * np.column_stack([-np.cos(theta_b), np.sin(theta_b)])
    return np.vstack([left, right])


def gen_double_circles(cfg: GeneratorConfig) -> PointCloudSeries:
    """Two jittered circles whose centres approach at t = T/2 and separate again.

    The left ring is slightly larger except at the sample of closest
    approach, where the lifetime order of the two loops flips.
    """
    if not cfg.p("s_min") > 0:
        raise InvalidInputError("s_min must be positive")
    if cfg.p("s_max") < cfg.p("s_min"):
        raise InvalidInputError("s_max must be at least s_min")
    if cfg.n_times % 2:
        raise InvalidInputError("the double-circle series needs an even n_times to sample t = T/2")
    prof = contrast_profile(cfg)
    theta_a, theta_b = _ring_angles(cfg)
    t = cfg.times()
    return PointCloudSeries(t, np.array([_double_circle_frame(cfg, prof, theta_a, theta_b, tj) for tj in t]))


def size_factor(cfg: GeneratorConfig, t) -> np.ndarray:
    return 1 + cfg.p("amplitude") * np.sin(_phase(t, cfg.period))


def gen_size_only(cfg: GeneratorConfig) -> PointCloudSeries:
    """The t = 0 double-circle frame, uniformly rescaled by c(t) = 1 + a sin(2 pi t / T)."""
    if not 0 <= cfg.p("amplitude") < 0.3:
        raise InvalidInputError("size amplitude must lie in [0, 0.3)")
    base = gen_double_circles(cfg).points[0]
    t = cfg.times()
    return PointCloudSeries(t, base[None, :, :] * size_factor(cfg, t)[:, None, None])


def _dumbbell_frame(cfg, theta_out, theta_mid, t, variant):
    ro, c = cfg.p("outer_radius"), cfg.p("outer_center")
    rr = ro * cfg.p("right_ratio")
    rm = cfg.p("middle_radius")
    ph = float(_phase(t, cfg.period))
    left = np.column_stack([-c + ro * np.cos(theta_out), ro * np.sin(theta_out)])
    right = np.column_stack([c - rr * np.cos(theta_out), rr * np.sin(theta_out)])
    if variant == "rotate":
        ang, ax, ay = theta_mid + ph, rm, rm
    else:
        # (ax, ay) runs round a closed curve, not back and forth along one arc
        ang = theta_mid
        ax = rm * (1 + cfg.p("middle_stretch") * (1 - np.cos(ph)) / 2)
        ay = rm * (1 + cfg.p("middle_squeeze") * np.sin(ph))
    mid = np.column_stack([ax * np.cos(ang), ay * np.sin(ang)])
    return np.vstack([left, mid, right])


def _dumbbell_check(cfg: GeneratorConfig):
    ro, c, rm = cfg.p("outer_radius"), cfg.p("outer_center"), cfg.p("middle_radius")
    stretch, squeeze = cfg.p("middle_stretch"), cfg.p("middle_squeeze")
    if not 0 < cfg.p("right_ratio") <= 1:
        raise InvalidInputError("right_ratio must lie in (0, 1]")
    if stretch < 0 or not 0 <= squeeze < 1:
        raise InvalidInputError("middle_stretch must be >= 0 and middle_squeeze in [0, 1)")
    if c <= ro + rm * (1 + stretch):
        raise InvalidInputError("outer loops overlap the middle loop")
    if int(cfg.p("middle_points")) < 3:
        raise InvalidInputError("the middle loop needs at least 3 points")


def gen_dumbbell(cfg: GeneratorConfig, variant: str = "deform") -> PointCloudSeries:
    """Two fixed outer circles and a middle loop that is deformed or rotated.

    Both variants start from the same frame, where the middle loop is a circle.
    """
    if variant not in ("deform", "rotate"):
        raise InvalidInputError(f"unknown dumbbell variant {variant!r}")
    _dumbbell_check(cfg)
    rng = np.random.default_rng(cfg.seed)
    theta_out = _angles(cfg.n_points_per_feature, cfg.p("jitter"), rng)
    theta_mid = _angles(int(cfg.p("middle_points")), cfg.p("jitter"), rng)
    t = cfg.times()
    return PointCloudSeries(t, np.array([_dumbbell_frame(cfg, theta_out, theta_mid, tj, variant) for tj in t]))


def frame_at(cfg: GeneratorConfig, t: float) -> np.ndarray:
    """Point cloud of a point-cloud generator at an arbitrary time ``t``."""
    name = cfg.name
    if name in (GeneratorName.DOUBLE_CIRCLES, GeneratorName.SIZE_ONLY):
        prof = contrast_profile(cfg)
        theta_a, theta_b = _ring_angles(cfg)
        if name is GeneratorName.DOUBLE_CIRCLES:
            return _double_circle_frame(cfg, prof, theta_a, theta_b, t)
        return _double_circle_frame(cfg, prof, theta_a, theta_b, 0.0) * float(size_factor(cfg, t))
    if name in (GeneratorName.DUMBBELL_DEFORM, GeneratorName.DUMBBELL_ROTATE):
        _dumbbell_check(cfg)
        rng = np.random.default_rng(cfg.seed)
        theta_out = _angles(cfg.n_points_per_feature, cfg.p("jitter"), rng)
        theta_mid = _angles(int(cfg.p("middle_points")), cfg.p("jitter"), rng)
        variant = "deform" if name is GeneratorName.DUMBBELL_DEFORM else "rotate"
        return _dumbbell_frame(cfg, theta_out, theta_mid, t, variant)
    raise InvalidInputError("the vineyard-like family has no point clouds")


def add_noise(series: PointCloudSeries, sigma: float, seed: int) -> PointCloudSeries:
    """I.i.d. Gaussian displacement with standard deviation ``sigma`` per coordinate."""
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    if sigma == 0:
        return PointCloudSeries(series.times.copy(), series.points.copy())
    rng = np.random.default_rng(seed)
    return PointCloudSeries(series.times.copy(), series.points + sigma * rng.standard_normal(series.points.shape))


# vineyard-like family

# coefficient basis of the quotient by the all-ones direction, completed by that direction
_QUOTIENT_FRAME = np.array([
    [1.0, -1.0, 0.0],
    [1.0, 1.0, -2.0],
    [1.0, 1.0, 1.0],
]) / np.array([[np.sqrt(2)], [np.sqrt(6)], [np.sqrt(3)]])


@dataclass
class VineyardFamily:
    times: np.ndarray
    vines: np.ndarray          # (3, n_times + 1, 2): (birth, death) of each non-elder vine, endpoint included
    elder: np.ndarray          # (n_times + 1, 2)
    frames: list               # n_times orthonormal (4, 3) frames
    crossing_windows: list     # [(t_start, t_end), ...]
    latitude: float            # cos of the polar angle of the normal's latitude circle


def _latitude_frames(c: float, phases: np.ndarray) -> list:
    """Periodic frames of the hyperplane family n(phi)^perp in R^4.

    n runs along the latitude circle cos(polar angle) = c of the unit sphere in
    the first three coordinates; the fourth coordinate axis is fixed.  The
    frame returns to itself after one turn, so the holonomy (a rotation by
    -2 pi c in the continuum) accumulates step by step.
    """
    s = np.sqrt(1 - c * c)
    out = []
    for ph in phases:
        e_pol = np.array([c * np.cos(ph), c * np.sin(ph), -s, 0.0])
        e_az = np.array([-np.sin(ph), np.cos(ph), 0.0, 0.0])
        E = np.column_stack([e_pol, e_az])
        base = np.column_stack([E, np.array([0.0, 0.0, 0.0, 1.0])])
        out.append(base @ _QUOTIENT_FRAME)
    return out


def _discrete_quotient_angle(frames) -> float:
    # imported lazily: transport depends on persistence, not the other way round
    from .transport import cycle_holonomy, quotient_rotation

    return quotient_rotation(cycle_holonomy(frames).cycle_holonomy)[1]


def _wrap(deg):
    return (deg + 180.0) % 360.0 - 180.0


def vineyard_frames(n_times: int, target_deg: float = -120.0) -> tuple[list, float]:
    """Frames whose discrete one-cycle holonomy rotates the quotient by ``target_deg``.

    The latitude is solved for so that the sampled, polar-transported loop hits
    the target angle exactly rather than only in the continuum limit.
    """
    phases = 2 * np.pi * np.arange(n_times) / n_times

    def miss(c):
        return _wrap(_discrete_quotient_angle(_latitude_frames(c, phases)) - target_deg)

    # continuum: the quotient turns by -360 c degrees (mod 360); bracket around that guess
    guess = (-target_deg % 360.0) / 360.0
    lo, hi = max(guess - 0.1, 1e-6), min(guess + 0.1, 1 - 1e-6)
    c = brentq(miss, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return _latitude_frames(c, phases), float(c)


def _vine_values(cfg, t):
    b0, d0 = cfg.p("vine_birth"), cfg.p("vine_death")
    rb, rd = cfg.p("vine_spread_birth"), cfg.p("vine_spread_death")
    u = np.asarray(t, dtype=float) / cfg.period
    out = []
    for a in range(3):
        ph = 2 * np.pi * (a + u) / 3
        out.append(np.stack([b0 + rb * np.cos(ph), d0 + rd * np.cos(ph + np.pi / 5)], axis=-1))
    return np.array(out)


def crossing_windows(cfg: GeneratorConfig, samples: int = 2000) -> list:
    """Time intervals in which two vine lifetimes differ by less than ``crossing_width``."""
    t = cfg.period * np.arange(samples + 1) / samples
    v = _vine_values(cfg, t)
    life = v[..., 1] - v[..., 0]
    gap = np.min([np.abs(life[a] - life[b]) for a, b in ((0, 1), (0, 2), (1, 2))], axis=0)
    inside = gap < cfg.p("crossing_width")
    windows, start = [], None
    for k, flag in enumerate(inside):
        if flag and start is None:
            start = t[k]
        if not flag and start is not None:
            windows.append((float(start), float(t[k - 1])))
            start = None
    if start is not None:
        windows.append((float(start), float(t[-1])))
    return windows


def gen_vineyard_like(cfg: GeneratorConfig) -> VineyardFamily:
    """Three cyclically relabelling vines, an elder vine and a matching frame family.

    Vine ``a`` ends the period at the starting value of vine ``a + 1 (mod 3)``.
    """
    t_all = cfg.period * np.arange(cfg.n_times + 1) / cfg.n_times
    vines = _vine_values(cfg, t_all)
    u = t_all / cfg.period
    elder = np.stack([0.05 + 0.01 * np.sin(2 * np.pi * u), cfg.p("vine_death") + 1.5 + 0.05 * np.cos(2 * np.pi * u)], axis=-1)
    frames, c = vineyard_frames(cfg.n_times)
    return VineyardFamily(t_all[:-1], vines, elder, frames, crossing_windows(cfg), c)


def generate(cfg: GeneratorConfig):
    name = cfg.name
    if name is GeneratorName.DOUBLE_CIRCLES:
        return gen_double_circles(cfg)
    if name is GeneratorName.SIZE_ONLY:
        return gen_size_only(cfg)
    if name is GeneratorName.DUMBBELL_DEFORM:
        return gen_dumbbell(cfg, "deform")
    if name is GeneratorName.DUMBBELL_ROTATE:
        return gen_dumbbell(cfg, "rotate")
    return gen_vineyard_like(cfg)
