"""Geodesic segments on the pre-shape sphere: fitting and uniform sampling.

A segment is the shorter great-circle arc between two pre-shape points.
Fitting searches endpoint pairs exhaustively over the input points, which is
exact and cheap in the small-sample regime this package targets (a few dozen
samples at most).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllDegenerate,
    DegenerateShape,
    DimensionMismatch,
    InsufficientPoints,
    ParamOutOfRange,
)
from .preshape import PreShapePoint, geodesic_distance

# Pairs closer than this (or closer than this to antipodal) are unusable as
# endpoints: sin(theta) underflows and the arc is numerically meaningless.
MIN_ARC_ANGLE = 1e-9


@dataclass(frozen=True, eq=False)
class GeodesicSegment:
    """Two endpoint pre-shape points and their arc angle."""

    z1: PreShapePoint
    z2: PreShapePoint
    theta: float

    def __post_init__(self):
        angle = geodesic_distance(self.z1, self.z2)
        if not (MIN_ARC_ANGLE < angle < np.pi - MIN_ARC_ANGLE):
            raise DegenerateShape(
                f"endpoints are identical or antipodal (arc angle {angle!r})"
            )
        if abs(angle - self.theta) > 1e-9:
            raise ValueError(
                f"declared arc angle {self.theta!r} does not match endpoints ({angle!r})"
            )

    @classmethod
    def from_endpoints(cls, z1: PreShapePoint, z2: PreShapePoint) -> "GeodesicSegment":
        return cls(z1, z2, geodesic_distance(z1, z2))


def point_at(seg: GeodesicSegment, t: float) -> PreShapePoint:
    """Constant-speed point on the arc: t=0 is z1, t=1 is z2.

    Uses g(t) = (sin((1-t)*theta) z1 + sin(t*theta) z2) / sin(theta), which
    stays on the sphere and keeps landmark centering, since any linear
    combination of centered configurations is centered.
    """
    if not 0.0 <= t <= 1.0:
        raise ParamOutOfRange(f"arc parameter must lie in [0, 1], got {t!r}")
    theta = seg.theta
    s = np.sin(theta)
    coords = (np.sin((1.0 - t) * theta) * seg.z1.coords
              + np.sin(t * theta) * seg.z2.coords) / s
    return PreShapePoint(coords)


def point_to_segment_distance(p: PreShapePoint, seg: GeodesicSegment) -> float:
    """Shortest great-circle angle from a point to the segment.

    Projects p onto the plane spanned by the endpoints; if the projection's
    arc parameter falls inside the segment, the distance is the angle to that
    projection, otherwise to the nearer endpoint.
    """
    if p.coords.size != seg.z1.coords.size:
        raise DimensionMismatch(
            f"point has length {p.coords.size}, segment has {seg.z1.coords.size}"
        )
    z1, z2 = seg.z1.coords, seg.z2.coords
    # Orthonormal basis of span{z1, z2}: e1 along z1, e2 the residual of z2.
    e1 = z1
    residual = z2 - np.dot(z2, z1) * z1
    res_norm = float(np.linalg.norm(residual))  # = sin(theta) > 0 for a valid segment
    e2 = residual / res_norm

    a = float(np.dot(p.coords, e1))
    b = float(np.dot(p.coords, e2))
    in_plane = float(np.hypot(a, b))  # equals <p, q> for q the normalized projection
    if in_plane < MIN_ARC_ANGLE:
        # p is orthogonal to the whole plane; every arc point is at pi/2.
        return min(geodesic_distance(p, seg.z1), geodesic_distance(p, seg.z2))

    alpha = float(np.arctan2(b, a))  # arc parameter of the projection, z1 at 0
    if 0.0 <= alpha <= seg.theta:
        # arccos(<p, q>) evaluated as atan2(|p - proj|, <p, q>), which stays
        # accurate when p lies (numerically) on the segment.
        perp = p.coords - a * e1 - b * e2
        return float(np.arctan2(np.linalg.norm(perp), in_plane))
    return min(geodesic_distance(p, seg.z1), geodesic_distance(p, seg.z2))


def fit_geodesic(points: list[PreShapePoint]) -> GeodesicSegment:
    """Fit a segment to a point cloud by exhaustive endpoint-pair search.

    Every pair of input points is a candidate endpoint pair; the winner
    minimizes the sum of squared point-to-segment distances over the whole
    cloud. Ties prefer the larger arc angle, then the lexicographically
    smallest index pair. Identical or antipodal pairs are skipped.
    """
    m = len(points)
    if m < 2:
        raise InsufficientPoints(f"need at least 2 points to fit a geodesic, got {m}")
    size = points[0].coords.size
    for p in points[1:]:
        if p.coords.size != size:
            raise DimensionMismatch("input points have inconsistent lengths")

    best_seg = None
    best_cost = np.inf
    best_theta = -1.0
    for i in range(m):
        for j in range(i + 1, m):
            theta = geodesic_distance(points[i], points[j])
            if not (MIN_ARC_ANGLE < theta < np.pi - MIN_ARC_ANGLE):
                continue
            seg = GeodesicSegment(points[i], points[j], theta)
            cost = sum(point_to_segment_distance(p, seg) ** 2 for p in points)
            if cost < best_cost or (cost == best_cost and theta > best_theta):
                best_seg, best_cost, best_theta = seg, cost, theta
    if best_seg is None:
        raise AllDegenerate("every candidate endpoint pair is identical or antipodal")
    return best_seg


def sample_uniform(seg: GeodesicSegment, k: int) -> list[PreShapePoint]:
    """K points evenly spaced in arc length, endpoints included for K >= 2.

    K = 1 returns the midpoint.
    """
    if k < 1:
        raise ParamOutOfRange(f"sample count must be >= 1, got {k}")
    if k == 1:
        return [point_at(seg, 0.5)]
    return [point_at(seg, i / (k - 1)) for i in range(k)]
