"""Post-hoc analyses: patch contribution heatmaps and 2-D embedding export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datastore import PROPERTY_KINDS, atomic_write_text
from .errors import CountMismatch, DimensionMismatch, InsufficientPoints, ParamOutOfRange
from .preshape import FeatureVector, PreShapePoint
from .regressors import Regressor


@dataclass(frozen=True, eq=False)
class PatchGrid:
    """Per-patch property predictions laid out in image order."""

    rows: int
    cols: int
    values: np.ndarray  # (rows, cols)
    property_kind: str

    def __post_init__(self):
        if self.property_kind not in PROPERTY_KINDS:
            raise ParamOutOfRange(
                f"property must be one of {PROPERTY_KINDS}, got {self.property_kind!r}"
            )
        if self.values.shape != (self.rows, self.cols):
            raise CountMismatch(
                f"grid values have shape {self.values.shape}, "
                f"expected ({self.rows}, {self.cols})"
            )
        if not np.isfinite(self.values).all():
            raise ParamOutOfRange("grid values contain NaN or Inf")


def patch_contribution_map(patch_features, model: Regressor, rows: int, cols: int,
                           property_kind: str = "conductivity_iacs") -> PatchGrid:
    """Predict the property for each patch; cell (i, j) is patch i*cols + j.

    Patch rows must arrive in the tiler's row-major order; predictions are
    written into the grid untouched (no smoothing, no normalization).
    """
    patch_features = np.asarray(patch_features, dtype=float)
    if patch_features.ndim != 2:
        raise DimensionMismatch(
            f"patch features must be a 2-D matrix, got shape {patch_features.shape}"
        )
    if rows < 1 or cols < 1:
        raise ParamOutOfRange(f"grid must be at least 1x1, got {rows}x{cols}")
    if patch_features.shape[0] != rows * cols:
        raise CountMismatch(
            f"got {patch_features.shape[0]} patch rows for a {rows}x{cols} grid"
        )
    predictions = model.predict(patch_features)
    return PatchGrid(rows=rows, cols=cols,
                     values=predictions.reshape(rows, cols),
                     property_kind=property_kind)


def embed_2d(points) -> np.ndarray:
    """Project a point cloud onto its top-2 principal components.

    Accepts pre-shape points, feature vectors, or a plain (n, d) matrix.
    Deterministic: each component's largest-magnitude loading is made
    positive. The first output column always has at least as much variance
    as the second.
    """
    rows = []
    for p in points:
        if isinstance(p, PreShapePoint):
            rows.append(p.coords)
        elif isinstance(p, FeatureVector):
            rows.append(p.values)
        else:
            rows.append(np.asarray(p, dtype=float))
    if len(rows) < 2:
        raise InsufficientPoints(f"need at least 2 points to embed, got {len(rows)}")
    X = np.vstack(rows)
    if X.shape[1] < 2:
        raise DimensionMismatch("points must have at least 2 dimensions")
    centered = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    for c in components:
        if c[np.argmax(np.abs(c))] < 0:
            c *= -1.0
    return centered @ components.T


def write_heatmap_csv(grid: PatchGrid, path) -> None:
    """Raw numeric grid, one CSV line per row, no header."""
    lines = [",".join(repr(float(v)) for v in row) for row in grid.values]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_heatmap_pgm(grid: PatchGrid, path) -> None:
    """8-bit grayscale PGM (P2), min-max normalized, lighter = higher."""
    lo = float(grid.values.min())
    hi = float(grid.values.max())
    if hi > lo:
        levels = np.rint((grid.values - lo) / (hi - lo) * 255).astype(int)
    else:
        levels = np.zeros_like(grid.values, dtype=int)
    lines = ["P2", f"{grid.cols} {grid.rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in levels]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_embedding_csv(path, ids, xy, sources) -> None:
    """Scatter-ready export: id,x,y,source per point."""
    xy = np.asarray(xy, dtype=float)
    if not (len(ids) == xy.shape[0] == len(sources)):
        raise CountMismatch("ids, coordinates and sources disagree in count")
    lines = ["id,x,y,source"]
    for sid, (x, y), src in zip(ids, xy, sources):
        lines.append(f"{sid},{repr(float(x))},{repr(float(y))},{src}")
    atomic_write_text(path, "\n".join(lines) + "\n")
