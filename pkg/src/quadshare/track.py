"""Closed runway circuit: two straights joined by two semicircular arcs.

Layout (counter-clockwise, constant altitude): start at the origin heading
+x, straight to (L, 0), left semicircle up to (L, 2R), straight back to
(0, 2R), left semicircle home. R = arc_len / pi so the circuit closes.

Signed cross-track error is positive to the *right* of the direction of
travel (right normal of heading psi is (sin psi, -cos psi)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .control import wrap_angle


@dataclass(frozen=True)
class Straight:
    start: tuple[float, float]
    heading: float
    length: float


@dataclass(frozen=True)
class Arc:
    """Counter-clockwise (left-turn) arc; heading grows with arc length."""

    center: tuple[float, float]
    radius: float
    entry_heading: float
    length: float

    @property
    def sweep(self) -> float:
        return self.length / self.radius


Segment = Union[Straight, Arc]


class TrackPoint(NamedTuple):
    position: np.ndarray  # (2,)
    heading: float
    altitude: float


class NearestPoint(NamedTuple):
    s: float  # arc length of the nearest circuit point
    cross_track: float  # signed, positive = right of travel direction
    heading: float  # tangent heading at the nearest point


@dataclass(frozen=True)
class Trajectory:
    segments: tuple[Segment, ...]
    altitude: float
    total_length: float

    def reference_at(self, s: float) -> TrackPoint:
        return reference_at(self, s)

    def nearest(self, position: np.ndarray) -> NearestPoint:
        return nearest(self, position)


def build_runway(
    straight_len: float = 200.0, arc_len: float = 157.0, altitude: float = 5.0
) -> Trajectory:
    if straight_len <= 0.0 or arc_len <= 0.0:
        raise ValueError("straight_len and arc_len must be positive")
    radius = arc_len / math.pi
    segments: tuple[Segment, ...] = (
        Straight(start=(0.0, 0.0), heading=0.0, length=straight_len),
        Arc(
            center=(straight_len, radius),
            radius=radius,
            entry_heading=0.0,
            length=arc_len,
        ),
        Straight(start=(straight_len, 2.0 * radius), heading=math.pi, length=straight_len),
        Arc(center=(0.0, radius), radius=radius, entry_heading=math.pi, length=arc_len),
    )
    return Trajectory(
        segments=segments,
        altitude=altitude,
        total_length=2.0 * straight_len + 2.0 * arc_len,
    )


def _arc_point(seg: Arc, u: float) -> tuple[float, float, float]:
    """Position and heading after arc length u along a CCW arc."""
    h = seg.entry_heading + u / seg.radius
    px = seg.center[0] + seg.radius * math.sin(h)
    py = seg.center[1] - seg.radius * math.cos(h)
    return px, py, h


def reference_at(track: Trajectory, s: float) -> TrackPoint:
    """Point, tangent heading and altitude at arc length s (wraps around)."""
    s = float(s) % track.total_length
    for seg in track.segments:
        if s < seg.length or seg is track.segments[-1]:
            if isinstance(seg, Straight):
                px = seg.start[0] + s * math.cos(seg.heading)
                py = seg.start[1] + s * math.sin(seg.heading)
                return TrackPoint(np.array([px, py]), wrap_angle(seg.heading), track.altitude)
            px, py, h = _arc_point(seg, s)
            return TrackPoint(np.array([px, py]), wrap_angle(h), track.altitude)
        s -= seg.length
    raise AssertionError("unreachable: s wraps inside the circuit")


def _nearest_on_straight(seg: Straight, x: float, y: float) -> tuple[float, float, float]:
    """(distance^2, arc length within segment, signed offset)."""
    c, sn = math.cos(seg.heading), math.sin(seg.heading)
    dx, dy = x - seg.start[0], y - seg.start[1]
    u = min(max(dx * c + dy * sn, 0.0), seg.length)
    nx, ny = seg.start[0] + u * c, seg.start[1] + u * sn
    ex, ey = x - nx, y - ny
    # right normal is (sin h, -cos h)
    signed = ex * sn - ey * c
    return ex * ex + ey * ey, u, signed


def _nearest_on_arc(seg: Arc, x: float, y: float) -> tuple[float, float, float]:
    vx, vy = x - seg.center[0], y - seg.center[1]
    dist_c = math.hypot(vx, vy)
    if dist_c == 0.0:
        # degenerate: the exact center; every arc point is equidistant
        return seg.radius * seg.radius, 0.0, -seg.radius
    # position angle beta relates to tangent heading h via h = beta + pi/2
    h = math.atan2(vy, vx) + 0.5 * math.pi
    u = (h - seg.entry_heading) % (2.0 * math.pi) * seg.radius
    if u <= seg.length:
        d = dist_c - seg.radius  # center sits on the left => right is outward
        return d * d, u, d
    # off the angular span: clamp to whichever endpoint is closer
    best = None
    for u_end in (0.0, seg.length):
        px, py, hh = _arc_point(seg, u_end)
        ex, ey = x - px, y - py
        d2 = ex * ex + ey * ey
        signed = ex * math.sin(hh) - ey * math.cos(hh)
        if best is None or d2 < best[0]:
            best = (d2, u_end, signed)
    return best


def nearest(track: Trajectory, position: np.ndarray) -> NearestPoint:
    """Globally nearest circuit point by per-segment projection."""
    x, y = float(position[0]), float(position[1])
    best_d2 = math.inf
    best_s = 0.0
    best_signed = 0.0
    s0 = 0.0
    for seg in track.segments:
        if isinstance(seg, Straight):
            d2, u, signed = _nearest_on_straight(seg, x, y)
        else:
            d2, u, signed = _nearest_on_arc(seg, x, y)
        if d2 < best_d2:
            best_d2 = d2
            best_s = s0 + u
            best_signed = signed
        s0 += seg.length
    best_s = best_s % track.total_length
    return NearestPoint(
        s=best_s, cross_track=best_signed, heading=reference_at(track, best_s).heading
    )


def cross_track_error(position: np.ndarray, track: Trajectory) -> float:
    """Signed lateral distance to the circuit; positive = right of travel."""
    return nearest(track, position).cross_track
