"""The augmentation pipeline: project, fit a geodesic, sample, pseudo-label.

Training features are projected onto the pre-shape sphere, a geodesic
segment is fitted through the projected cloud, new points are sampled
uniformly along it, and a teacher regressor assigns each one a pseudo-label.
The teacher is always trained on the pre-shape-normalized versions of the
training features so that it scores generated features on its own input
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InsufficientPoints, NonFinite, ParamOutOfRange
from .geodesic import GeodesicSegment, fit_geodesic, sample_uniform
from .preshape import FeatureVector, PreShapePoint, project, unproject
from .regressors import Regressor

TEACHER_PROTOCOLS = ("in-fold", "out-of-fold")


@dataclass(frozen=True, eq=False)
class AugmentedDataset:
    """Original labeled samples plus generated, pseudo-labeled ones.

    ``features`` holds the pre-shape-normalized originals, which is the
    representation students consume alongside the generated rows. True labels
    are carried through untouched.
    """

    ids: tuple[str, ...]
    features: np.ndarray            # (M, D) normalized originals
    labels: np.ndarray              # (M,)
    generated_ids: tuple[str, ...]
    generated_features: np.ndarray  # (K, D)
    pseudo_labels: np.ndarray       # (K,)
    teacher_kind: str
    teacher_quality_rmse: float | None
    segment: GeodesicSegment

    def __post_init__(self):
        if len(self.ids) != self.features.shape[0] or self.labels.size != len(self.ids):
            raise ParamOutOfRange("original ids, features and labels disagree in count")
        if (len(self.generated_ids) != self.generated_features.shape[0]
                or self.pseudo_labels.size != len(self.generated_ids)):
            raise ParamOutOfRange("generated ids, features and labels disagree in count")
        if not (np.isfinite(self.labels).all() and np.isfinite(self.pseudo_labels).all()):
            raise NonFinite("labels or pseudo-labels contain NaN or Inf")

    @property
    def m(self) -> int:
        return len(self.ids)

    @property
    def k(self) -> int:
        return len(self.generated_ids)

    @property
    def size(self) -> int:
        return self.m + self.k

    def combined_features(self) -> np.ndarray:
        return np.vstack([self.features, self.generated_features])

    def combined_labels(self) -> np.ndarray:
        return np.concatenate([self.labels, self.pseudo_labels])


def pseudo_label(teacher: Regressor, generated: list[PreShapePoint]) -> np.ndarray:
    """One teacher prediction per generated point, on its unprojected form."""
    X = np.vstack([unproject(g).values for g in generated])
    return teacher.predict(X)


def _teacher_oof_rmse(teacher: Regressor, X: np.ndarray, y: np.ndarray,
                      seed: int, inner_folds: int) -> float | None:
    """Out-of-fold RMSE of the teacher within the training split."""
    from .evalharness import kfold_split  # local import to avoid a cycle

    k = min(inner_folds, y.size)
    if k < 2:
        return None
    errors = np.empty(y.size)
    for train_idx, test_idx in kfold_split(y.size, k, seed):
        fitted = teacher.fit(X[train_idx], y[train_idx])
        errors[test_idx] = fitted.predict(X[test_idx]) - y[test_idx]
    return float(np.sqrt(np.mean(errors ** 2)))


def build_augmented(features: np.ndarray, labels, k: int, teacher: Regressor,
                    *, ids: list[str] | None = None,
                    teacher_protocol: str = "out-of-fold",
                    seed: int = 0, inner_folds: int = 5) -> AugmentedDataset:
    """Run the full augmentation pipeline on a training split.

    The caller is responsible for passing only training data; when the
    protocol is "out-of-fold" the teacher's own quality is additionally
    assessed by out-of-fold prediction inside this split and recorded on the
    result. Either way the teacher used for pseudo-labeling is fitted on the
    whole split, never on anything else.

    Args:
        features: (M, D) raw feature matrix, M >= 2.
        labels: M true property values.
        k: number of generated samples, >= 1.
        teacher: unfitted regressor used to pseudo-label generated features.
        ids: sample identifiers; defaults to positional names.
        teacher_protocol: "out-of-fold" or "in-fold".
        seed: drives the inner quality-assessment folds only.
        inner_folds: fold count for the quality assessment.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if k < 1:
        raise ParamOutOfRange(f"generated-sample count must be >= 1, got {k}")
    if features.ndim != 2 or features.shape[0] < 2:
        raise InsufficientPoints(
            f"need at least 2 training samples, got {features.shape}"
        )
    if labels.size != features.shape[0]:
        raise ParamOutOfRange("labels and features disagree in count")
    if not np.isfinite(labels).all():
        raise NonFinite("labels contain NaN or Inf")
    if teacher_protocol not in TEACHER_PROTOCOLS:
        raise ParamOutOfRange(
            f"teacher_protocol must be one of {TEACHER_PROTOCOLS}, got {teacher_protocol!r}"
        )
    if ids is None:
        ids = [f"sample_{i:04d}" for i in range(features.shape[0])]

    points = [project(FeatureVector(id=i, values=row))
              for i, row in zip(ids, features)]
    normalized = np.vstack([unproject(p).values for p in points])

    segment = fit_geodesic(points)
    generated_points = [replace(p, source_id=f"gen_{i:04d}")
                        for i, p in enumerate(sample_uniform(segment, k))]

    teacher_fitted = teacher.fit(normalized, labels)
    pseudo = pseudo_label(teacher_fitted, generated_points)

    quality = None
    if teacher_protocol == "out-of-fold":
        quality = _teacher_oof_rmse(teacher, normalized, labels, seed, inner_folds)

    return AugmentedDataset(
        ids=tuple(ids),
        features=normalized,
        labels=labels.copy(),
        generated_ids=tuple(p.source_id for p in generated_points),
        generated_features=np.vstack([unproject(p).values for p in generated_points]),
        pseudo_labels=np.asarray(pseudo, dtype=float),
        teacher_kind=teacher.kind,
        teacher_quality_rmse=quality,
        segment=segment,
    )
