"""Collision detection between constant-velocity disk motions.

Agents are open disks translating along straight segments (or standing
still). Everything here is closed-form except the unsafe-interval sweep
for move actions, which brackets the boundary with a coarse scan and
refines it by bisection. Tangency (center distance exactly equal to the
radius sum) is never a collision.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

log = logging.getLogger(__name__)

EPS = 1e-9
INF = math.inf

# resolution knobs; the sweep step is deliberately coarse because the
# bisection afterwards does the real work. The tolerance is far below any
# cost comparison epsilon so interval conservatism never shows up in costs.
DEFAULT_SWEEP_DELTA = 0.1
DEFAULT_BISECT_TOL = 1e-9

Coords = Union[Sequence[Tuple[float, float]], Callable[[int], Tuple[float, float]]]


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Interval:
    """Time interval; half-open [lo, hi) wherever it encodes a prohibition."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi + EPS:
            raise ValueError(f"interval lo {self.lo} > hi {self.hi}")

    @property
    def empty(self) -> bool:
        return self.hi - self.lo <= 0.0

    def contains(self, t: float) -> bool:
        """Membership under the half-open reading."""
        return self.lo <= t < self.hi


class MotionSegment(NamedTuple):
    """Position of one disk center over [t_start, t_end]:
    (ox, oy) + (vx, vy) * (t - t_start). Waits have zero velocity."""

    ox: float
    oy: float
    vx: float
    vy: float
    t_start: float
    t_end: float

    def position(self, t: float) -> Tuple[float, float]:
        dt = t - self.t_start
        return (self.ox + self.vx * dt, self.oy + self.vy * dt)

    def shifted(self, delay: float) -> "MotionSegment":
        return self._replace(t_start=self.t_start + delay, t_end=self.t_end + delay)


@dataclass(frozen=True)
class TimedAction:
    """One plan step: either a traversal of edge (u, v) or a wait (u == v).

    duration may be +inf for the terminal wait an agent performs at its
    goal once its plan is finished.
    """

    kind: str  # "move" | "wait"
    u: int
    v: int
    t_start: float
    duration: float

    def __post_init__(self):
        if self.kind not in ("move", "wait"):
            raise ValueError(f"bad action kind {self.kind!r}")
        if self.kind == "wait" and self.u != self.v:
            raise ValueError("wait actions must have u == v")
        if self.duration <= 0:
            raise ValueError("actions need positive duration")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    def retimed(self, t_start: float) -> "TimedAction":
        return TimedAction(self.kind, self.u, self.v, t_start, self.duration)


def _lookup(coords: Coords, vid: int) -> Tuple[float, float]:
    try:
        if callable(coords):
            return coords(vid)
        return coords[vid]
    except (KeyError, IndexError):
        raise ValueError(f"unknown vertex id {vid}")


def action_segment(action: TimedAction, t_start: float, coords: Coords) -> MotionSegment:
    """Motion segment of `action` executed at t_start (its own t_start is ignored)."""
    x0, y0 = _lookup(coords, action.u)
    if action.kind == "wait":
        return MotionSegment(x0, y0, 0.0, 0.0, t_start, t_start + action.duration)
    x1, y1 = _lookup(coords, action.v)
    if math.isinf(action.duration):
        raise ValueError("move actions cannot be infinite")
    vx = (x1 - x0) / action.duration
    vy = (y1 - y0) / action.duration
    return MotionSegment(x0, y0, vx, vy, t_start, t_start + action.duration)


def first_collision_time(
    seg_i: MotionSegment, seg_j: MotionSegment, radius_sum: float
) -> Optional[float]:
    """Earliest t in the common time window with center distance < radius_sum.

    Returns the entry moment of the collision window (the infimum of
    colliding times); None when the disks never strictly overlap for a
    positive amount of time. Zero-duration contact (either tangency or an
    overlap confined to the single instant where the time windows touch)
    does not count: whenever it is real it persists into the neighboring
    action, which is checked as its own pair. Solved from the quadratic
    |dp + dv*tau|^2 = radius_sum^2 on the window.
    """
    t0 = max(seg_i.t_start, seg_j.t_start)
    t1 = min(seg_i.t_end, seg_j.t_end)
    if t1 <= t0:
        return None
    xi, yi = seg_i.position(t0)
    xj, yj = seg_j.position(t0)
    dx = xi - xj
    dy = yi - yj
    c = dx * dx + dy * dy - radius_sum * radius_sum
    if c < 0.0:
        return t0
    dvx = seg_i.vx - seg_j.vx
    dvy = seg_i.vy - seg_j.vy
    a = dvx * dvx + dvy * dvy
    if a <= 0.0:
        return None  # constant separation >= radius_sum
    b = 2.0 * (dx * dvx + dy * dvy)
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None  # closest approach is tangent or farther: open disks
    sq = math.sqrt(disc)
    tau_in = (-b - sq) / (2.0 * a)
    tau_out = (-b + sq) / (2.0 * a)
    if tau_out <= 0.0:
        return None
    # c >= 0 means both roots share a sign; here tau_in >= 0
    if math.isinf(t1):
        return t0 + tau_in
    if tau_in >= t1 - t0:
        return None
    return t0 + tau_in


def actions_conflict(
    a_i: TimedAction,
    t_i: float,
    a_j: TimedAction,
    t_j: float,
    coords: Coords,
    radius_sum: float,
) -> bool:
    """True iff executing a_i at t_i and a_j at t_j makes the disks overlap."""
    si = action_segment(a_i, t_i, coords)
    sj = action_segment(a_j, t_j, coords)
    return first_collision_time(si, sj, radius_sum) is not None


def unsafe_interval(
    a_i: TimedAction,
    t_i: float,
    a_j: TimedAction,
    t_j: float,
    coords: Coords,
    radius_sum: float,
    delta: float = DEFAULT_SWEEP_DELTA,
    tol: float = DEFAULT_BISECT_TOL,
) -> Interval:
    """[t_i, t_u) such that performing a_i anywhere in it collides with a_j at t_j.

    Requires an actual conflict at t_i. For move actions t_u is found by
    delaying a_i in steps of `delta` until the collision disappears, then
    bisecting; the result is conservative (t_u is a delay that was tested
    collision-free, never below the true boundary). For wait actions the
    blocked window is closed-form: the times at which standing at the
    vertex intersects a_j's swept disk, clipped to a_j's span.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not actions_conflict(a_i, t_i, a_j, t_j, coords, radius_sum):
        raise ValueError("unsafe_interval requires a conflict at zero delay")
    if a_i.kind == "wait":
        return _wait_unsafe(a_i, t_i, a_j, t_j, coords, radius_sum)
    return _move_unsafe(a_i, t_i, a_j, t_j, coords, radius_sum, delta, tol)


def _move_unsafe(a_i, t_i, a_j, t_j, coords, radius_sum, delta, tol) -> Interval:
    sj = action_segment(a_j, t_j, coords)
    si0 = action_segment(a_i, t_i, coords)

    def collides(d: float) -> bool:
        return first_collision_time(si0.shifted(d), sj, radius_sum) is not None

    # beyond this delay the collision status can no longer change:
    # finite a_j -> the time windows stop overlapping; infinite a_j (a
    # parked agent) -> a_i runs fully inside a_j's window, so the relative
    # geometry is delay-independent
    if math.isinf(sj.t_end):
        stable = max(0.0, t_j - t_i)
    else:
        stable = max(0.0, sj.t_end - t_i)

    lo = 0.0
    k = 1
    while True:
        d = k * delta
        if not collides(d):
            hi = d
            break
        lo = d
        if d > stable:
            if math.isinf(sj.t_end):
                return Interval(t_i, INF)
            # finite windows stopped overlapping; next step must clear
        k += 1

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if collides(mid):
            lo = mid
        else:
            hi = mid

    # Lemma-style soundness presumes one contiguous unsafe window; check a
    # stretch beyond the bracket and log (not fail) if a second one exists.
    if not math.isinf(a_i.duration):
        probe = hi + delta
        horizon = hi + a_i.duration + delta
        while probe <= horizon:
            if collides(probe):
                log.warning(
                    "non-contiguous unsafe interval for %s@%s vs %s@%s "
                    "(second window near delay %.4f)",
                    a_i, t_i, a_j, t_j, probe,
                )
                break
            probe += delta
    return Interval(t_i, t_i + hi)


def _wait_unsafe(a_i, t_i, a_j, t_j, coords, radius_sum) -> Interval:
    qx, qy = _lookup(coords, a_i.u)
    sj = action_segment(a_j, t_j, coords)
    dx = sj.ox - qx
    dy = sj.oy - qy
    a = sj.vx * sj.vx + sj.vy * sj.vy
    c = dx * dx + dy * dy - radius_sum * radius_sum
    if a <= 0.0:
        # a_j stands still too: overlap is time-independent
        if c >= 0.0:
            raise ValueError("wait/wait pair does not overlap")
        return Interval(t_i, sj.t_end)
    b = 2.0 * (dx * sj.vx + dy * sj.vy)
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        raise ValueError("wait window does not exist (tangent or separated)")
    sq = math.sqrt(disc)
    enter = sj.t_start + (-b - sq) / (2.0 * a)
    leave = sj.t_start + (-b + sq) / (2.0 * a)
    hi = min(leave, sj.t_end)
    if hi <= t_i:
        raise ValueError("wait window ends before t_i")
    return Interval(t_i, hi)
