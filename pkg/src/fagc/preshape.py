"""Projection of raw feature vectors onto the pre-shape sphere.

A D-dimensional feature vector is lifted to D planar landmarks by duplicating
every coordinate into an (x_i, y_i) pair, centered per landmark axis, and
scaled to unit norm. The result lives on the unit hypersphere of centered
landmark configurations, where similarity between two configurations is the
great-circle (geodesic) angle between them. Rotation is deliberately not
quotiented out: everything here stays on the pre-shape sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShape, DimensionMismatch, NonFinite

# Centered vectors with a norm below this are treated as a single point.
ZERO_NORM_THRESHOLD = 1e-12

# Tolerance for the centering / unit-norm invariants of PreShapePoint.
INVARIANT_TOL = 1e-9


def _as_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{what} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """A raw feature vector tagged with its sample identifier."""

    id: str
    values: np.ndarray

    def __post_init__(self):
        values = _as_vector(self.values, "values")
        if values.size < 2:
            raise DimensionMismatch(
                f"feature vector {self.id!r} needs at least 2 dimensions, got {values.size}"
            )
        if not np.isfinite(values).all():
            raise NonFinite(f"feature vector {self.id!r} contains NaN or Inf")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class PreShapePoint:
    """A centered, unit-norm landmark configuration.

    ``coords`` interleaves the landmarks as (x_1, y_1, x_2, y_2, ...); points
    produced by :func:`project` additionally satisfy x_i == y_i bitwise,
    because both halves of each pair go through identical arithmetic.
    """

    coords: np.ndarray
    source_id: str | None = None

    def __post_init__(self):
        coords = _as_vector(self.coords, "coords")
        if coords.size % 2 != 0 or coords.size < 4:
            raise DimensionMismatch(
                f"coords must have even length >= 4, got {coords.size}"
            )
        if not np.isfinite(coords).all():
            raise NonFinite("pre-shape coordinates contain NaN or Inf")
        x_mean = coords[0::2].mean()
        y_mean = coords[1::2].mean()
        if abs(x_mean) > INVARIANT_TOL or abs(y_mean) > INVARIANT_TOL:
            raise ValueError(
                f"landmarks are not centered (means {x_mean:.3e}, {y_mean:.3e})"
            )
        norm = float(np.linalg.norm(coords))
        if abs(norm - 1.0) > INVARIANT_TOL:
            raise ValueError(f"coordinates are not unit-norm (norm {norm!r})")
        coords = coords.copy()
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n_landmarks(self) -> int:
        return self.coords.size // 2

    @property
    def x_coords(self) -> np.ndarray:
        return self.coords[0::2]

    @property
    def y_coords(self) -> np.ndarray:
        return self.coords[1::2]


def project(v: FeatureVector) -> PreShapePoint:
    """Project a feature vector onto the pre-shape sphere.

    Every coordinate is duplicated into a planar landmark, the mean of the
    x-coordinates is subtracted from every x (likewise for y), and the
    centered configuration is scaled to unit norm.

    Raises:
        DegenerateShape: the input is constant, so centering leaves nothing.
    """
    paired = np.repeat(v.values, 2)  # (x1, y1, x2, y2, ...) with y_i = x_i
    centered = paired.copy()
    centered[0::2] -= paired[0::2].mean()
    centered[1::2] -= paired[1::2].mean()
    norm = float(np.linalg.norm(centered))
    if norm < ZERO_NORM_THRESHOLD:
        raise DegenerateShape(
            f"feature vector {v.id!r} is constant; centered norm {norm!r} is zero"
        )
    return PreShapePoint(centered / norm, source_id=v.id)


def unproject(z: PreShapePoint) -> FeatureVector:
    """Read the landmark x-coordinates back out as a feature vector.

    Scale and translation of the original input are not recoverable;
    ``unproject(project(v))`` equals the centered, unit-pair-norm version
    of ``v``.
    """
    return FeatureVector(id=z.source_id or "", values=z.x_coords.copy())


def geodesic_distance(a: PreShapePoint, b: PreShapePoint) -> float:
    """Great-circle angle between two pre-shape points, in [0, pi]."""
    if a.coords.size != b.coords.size:
        raise DimensionMismatch(
            f"points have different lengths ({a.coords.size} vs {b.coords.size})"
        )
    dot = float(np.clip(np.dot(a.coords, b.coords), -1.0, 1.0))
    return float(np.arccos(dot))


def preshape_normalize(X: np.ndarray) -> np.ndarray:
    """Pass every row of a feature matrix through project -> unproject.

    This is the domain bridge used throughout the augmentation pipeline:
    regressors that must score generated (on-sphere) features are trained and
    queried on features normalized this way, so both sides live on the same
    scale.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D feature matrix, got shape {X.shape}")
    rows = [unproject(project(FeatureVector(id=str(i), values=row))).values
            for i, row in enumerate(X)]
    return np.vstack(rows)
