"""Metrics, cross-validation, and the three experiment grids.

The harness never lets augmentation or teacher fitting see a fold's test
split: every run records, per fold, exactly which sample ids fed the teacher
and the augmentation, so leakage is auditable after the fact as well as
asserted during the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .augment import build_augmented
from .datastore import LabeledDataset, atomic_write_text
from .errors import DimensionMismatch, NonFinite, ParamOutOfRange, ZeroVariance
from .preshape import preshape_normalize
from .regressors import Regressor

REPORT_CSV_HEADER = "experiment_id,model,teacher,k_generated,fold,r2,mae,mse,rmse"

# Generated-feature counts swept by default.
DEFAULT_K_SWEEP = (10, 20, 40, 100, 200, 400, 1000)


@dataclass(frozen=True)
class MetricSet:
    """R^2, MAE, MSE and RMSE for one prediction vector.

    ``r2`` is None when the observed values are constant, in which case the
    coefficient of determination is undefined; the error metrics are still
    reported.
    """

    r2: float | None
    mae: float
    mse: float
    rmse: float


def _validate_pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 1 or y_pred.ndim != 1:
        raise DimensionMismatch("metric inputs must be 1-D")
    if y_true.size != y_pred.size:
        raise DimensionMismatch(
            f"length mismatch: {y_true.size} observations vs {y_pred.size} predictions"
        )
    if y_true.size == 0:
        raise DimensionMismatch("metric inputs must be non-empty")
    if not (np.isfinite(y_true).all() and np.isfinite(y_pred).all()):
        raise NonFinite("metric inputs contain NaN or Inf")
    return y_true, y_pred


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot. Range (-inf, 1]."""
    y_true, y_pred = _validate_pair(y_true, y_pred)
    ss_tot = float(((y_true - y_true.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ZeroVariance("observed values are constant; R^2 is undefined")
    ss_res = float(((y_true - y_pred) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def metrics(y_true, y_pred) -> MetricSet:
    """All four metrics at once; R^2 degrades to None on constant truth."""
    y_true, y_pred = _validate_pair(y_true, y_pred)
    err = y_true - y_pred
    mae = float(np.abs(err).mean())
    mse = float((err ** 2).mean())
    try:
        r2 = r_squared(y_true, y_pred)
    except ZeroVariance:
        r2 = None
    return MetricSet(r2=r2, mae=mae, mse=mse, rmse=float(np.sqrt(mse)))


def kfold_split(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint, covering test folds whose sizes differ by at most one.

    Indices are shuffled by the seed and sliced contiguously; both halves of
    every split come back sorted.
    """
    if not 2 <= k <= n:
        raise ParamOutOfRange(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    splits = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = perm[start:start + size]
        train = np.concatenate([perm[:start], perm[start + size:]])
        splits.append((np.sort(train), np.sort(test)))
        start += size
    return splits


@dataclass(frozen=True)
class ReportRow:
    model: str
    teacher: str | None
    k_generated: int
    fold: int
    r2: float | None
    mae: float
    mse: float
    rmse: float


@dataclass(frozen=True)
class AggregateRow:
    model: str
    teacher: str | None
    k_generated: int
    n_folds: int
    r2: float | None
    mae: float
    mse: float
    rmse: float


@dataclass
class EvaluationReport:
    """Per-fold metric records plus run metadata and the leakage audit."""

    experiment_id: str
    rows: list[ReportRow] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def aggregates(self) -> list[AggregateRow]:
        """Mean of per-fold metrics per (model, teacher, K) configuration.

        Folds with undefined R^2 are excluded from the R^2 mean but still
        count toward the error-metric means.
        """
        order: list[tuple] = []
        groups: dict[tuple, list[ReportRow]] = {}
        for row in self.rows:
            key = (row.model, row.teacher, row.k_generated)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(row)
        out = []
        for key in order:
            rows = groups[key]
            r2s = [r.r2 for r in rows if r.r2 is not None]
            out.append(AggregateRow(
                model=key[0], teacher=key[1], k_generated=key[2],
                n_folds=len(rows),
                r2=float(np.mean(r2s)) if r2s else None,
                mae=float(np.mean([r.mae for r in rows])),
                mse=float(np.mean([r.mse for r in rows])),
                rmse=float(np.mean([r.rmse for r in rows])),
            ))
        return out

    def to_csv(self, path) -> None:
        """One line per per-fold record under the fixed header."""
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        lines = [REPORT_CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                self.experiment_id, r.model, cell(r.teacher), str(r.k_generated),
                str(r.fold), cell(r.r2), cell(r.mae), cell(r.mse), cell(r.rmse),
            ]))
        atomic_write_text(path, "\n".join(lines) + "\n")

    def to_json(self, path) -> None:
        doc = {
            "experiment_id": self.experiment_id,
            "rows": [vars(r) for r in self.rows],
            "aggregates": [vars(a) for a in self.aggregates()],
            **self.extras,
        }
        atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _check_no_leakage(test_ids: set, used_ids: set) -> None:
    leaked = test_ids & used_ids
    if leaked:  # unreachable by construction; guards future edits
        raise AssertionError(f"test samples leaked into training: {sorted(leaked)}")


def run_comparison(data: LabeledDataset, models: list[Regressor], *,
                   use_fagc: bool, k_generated: int = 0,
                   teacher: Regressor | None = None, folds: int = 6,
                   seed: int = 0, experiment_id: str = "comparison") -> EvaluationReport:
    """Cross-validated evaluation of students, with or without augmentation.

    With augmentation, each fold's training split is expanded by
    ``k_generated`` pseudo-labeled samples (teacher fitted on that split
    only) and both the student's training and test features go through
    pre-shape normalization so all inputs share one domain. Without it,
    students see the raw features.
    """
    if len(models) == 0:
        raise ParamOutOfRange("need at least one model to evaluate")
    if use_fagc:
        if k_generated < 1:
            raise ParamOutOfRange(
                f"augmented runs need k_generated >= 1, got {k_generated}"
            )
        if teacher is None:
            raise ParamOutOfRange("augmented runs need a teacher regressor")

    n = data.n
    ids = np.asarray(data.ids)
    splits = kfold_split(n, folds, seed)
    audit = []
    fold_train_sets = []  # (X_train, y_train, X_test) per fold, post-pipeline
    for fold_i, (train_idx, test_idx) in enumerate(splits):
        test_ids = set(ids[test_idx])
        entry = {
            "fold": fold_i,
            "train_ids": sorted(ids[train_idx]),
            "test_ids": sorted(test_ids),
            "teacher_train_ids": [],
            "augment_input_ids": [],
            "teacher_oof_rmse": None,
        }
        if use_fagc:
            aug = build_augmented(
                data.features[train_idx], data.labels[train_idx], k_generated,
                teacher, ids=list(ids[train_idx]),
                teacher_protocol="out-of-fold", seed=seed * 1000 + fold_i,
            )
            entry["teacher_train_ids"] = sorted(aug.ids)
            entry["augment_input_ids"] = sorted(aug.ids)
            entry["teacher_oof_rmse"] = aug.teacher_quality_rmse
            _check_no_leakage(test_ids, set(aug.ids))
            fold_train_sets.append((aug.combined_features(), aug.combined_labels(),
                                    preshape_normalize(data.features[test_idx])))
        else:
            fold_train_sets.append((data.features[train_idx], data.labels[train_idx],
                                    data.features[test_idx]))
        audit.append(entry)

    teacher_kind = teacher.kind if use_fagc and teacher is not None else None
    rows = []
    for model in models:
        for fold_i, (train_idx, test_idx) in enumerate(splits):
            x_train, y_train, x_test = fold_train_sets[fold_i]
            fitted = model.fit(x_train, y_train)
            m = metrics(data.labels[test_idx], fitted.predict(x_test))
            rows.append(ReportRow(
                model=model.kind, teacher=teacher_kind,
                k_generated=k_generated if use_fagc else 0, fold=fold_i,
                r2=m.r2, mae=m.mae, mse=m.mse, rmse=m.rmse,
            ))

    extras = {"seed": seed, "folds": folds, "use_fagc": use_fagc, "audit": audit}
    if data.property_kind:
        extras["property"] = data.property_kind
    return EvaluationReport(experiment_id=experiment_id, rows=rows, extras=extras)


def run_k_sweep(data: LabeledDataset, models: list[Regressor],
                teacher: Regressor, *, k_values=DEFAULT_K_SWEEP,
                folds: int = 6, seed: int = 0,
                experiment_id: str = "k_sweep") -> EvaluationReport:
    """One augmented comparison per generated-feature count."""
    if len(k_values) == 0:
        raise ParamOutOfRange("k_values must be non-empty")
    for k in k_values:
        if k < 1:
            raise ParamOutOfRange(f"every swept K must be >= 1, got {k}")
    report = EvaluationReport(experiment_id=experiment_id)
    audits = {}
    for k in k_values:
        sub = run_comparison(data, models, use_fagc=True, k_generated=k,
                             teacher=teacher, folds=folds, seed=seed,
                             experiment_id=experiment_id)
        report.rows.extend(sub.rows)
        audits[str(k)] = sub.extras["audit"]
    report.extras = {"seed": seed, "folds": folds, "k_values": list(k_values),
                     "teacher": teacher.kind, "audit_per_k": audits}
    if data.property_kind:
        report.extras["property"] = data.property_kind
    return report


def run_teacher_grid(data: LabeledDataset, teachers: list[Regressor],
                     students: list[Regressor], *, k_generated: int = 100,
                     folds: int = 6, seed: int = 0,
                     experiment_id: str = "teacher_grid") -> EvaluationReport:
    """Full teacher-by-student cross product plus a no-augmentation baseline.

    Baseline rows carry teacher None and K 0. Mean out-of-fold RMSE per
    teacher lands in the report extras under ``teacher_quality``.
    """
    if len(teachers) == 0 or len(students) == 0:
        raise ParamOutOfRange("need at least one teacher and one student")
    report = EvaluationReport(experiment_id=experiment_id)
    baseline = run_comparison(data, students, use_fagc=False, folds=folds,
                              seed=seed, experiment_id=experiment_id)
    report.rows.extend(baseline.rows)
    audits = {"baseline": baseline.extras["audit"]}
    teacher_quality = {}
    for t in teachers:
        sub = run_comparison(data, students, use_fagc=True,
                             k_generated=k_generated, teacher=t, folds=folds,
                             seed=seed, experiment_id=experiment_id)
        report.rows.extend(sub.rows)
        audits[t.kind] = sub.extras["audit"]
        oof = [e["teacher_oof_rmse"] for e in sub.extras["audit"]
               if e["teacher_oof_rmse"] is not None]
        teacher_quality[t.kind] = float(np.mean(oof)) if oof else None
    report.extras = {"seed": seed, "folds": folds, "k_generated": k_generated,
                     "audit_per_teacher": audits,
                     "teacher_quality": teacher_quality}
    if data.property_kind:
        report.extras["property"] = data.property_kind
    return report
