"""Dataset files, label files, and model persistence.

All formats are tiny, human-inspectable CSV/JSON. Floats are written with
``repr``, whose shortest-round-trip guarantee makes every load/save cycle
exact. Writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateId,
    InsufficientPoints,
    KindMismatch,
    NonFinite,
    NotFitted,
    ParamOutOfRange,
    ParseError,
    RaggedRow,
    UnmatchedId,
    VersionMismatch,
)
from .regressors import REGRESSOR_KINDS, LinearRegressor, Regressor

MODEL_FORMAT_VERSION = 1

PROPERTY_KINDS = ("conductivity_iacs", "hardness_hv")

LABELS_HEADER = ["id", "conductivity_iacs", "hardness_hv"]


def atomic_write_text(path, text: str) -> None:
    """Write a file via temp-then-rename so readers never see partial data."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Features joined with one chosen property column, ready for a harness run."""

    ids: tuple[str, ...]
    features: np.ndarray  # (n, D)
    labels: np.ndarray    # (n,)
    property_kind: str = ""

    def __post_init__(self):
        if self.features.ndim != 2 or len(self.ids) != self.features.shape[0]:
            raise ParamOutOfRange("ids and feature rows disagree in count")
        if self.labels.shape != (self.features.shape[0],):
            raise ParamOutOfRange("labels and feature rows disagree in count")
        if not np.isfinite(self.labels).all():
            raise NonFinite("labels contain NaN or Inf")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature table with optional property columns (NaN marks missing)."""

    ids: tuple[str, ...]
    features: np.ndarray           # (n, D)
    conductivity_iacs: np.ndarray  # (n,), NaN where unmeasured
    hardness_hv: np.ndarray        # (n,), NaN where unmeasured

    def __post_init__(self):
        n = len(self.ids)
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise ParamOutOfRange("ids and feature rows disagree in count")
        if self.conductivity_iacs.shape != (n,) or self.hardness_hv.shape != (n,):
            raise ParamOutOfRange("property columns and feature rows disagree in count")
        if len(set(self.ids)) != n:
            raise DuplicateId("sample ids must be unique")
        if not np.isfinite(self.features).all():
            raise NonFinite("features contain NaN or Inf")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def select(self, property_kind: str) -> LabeledDataset:
        """Rows that carry the requested property, as a labeled dataset."""
        if property_kind not in PROPERTY_KINDS:
            raise ParamOutOfRange(
                f"property must be one of {PROPERTY_KINDS}, got {property_kind!r}"
            )
        column = getattr(self, property_kind)
        keep = np.isfinite(column)
        if not keep.any():
            raise InsufficientPoints(f"no sample carries a {property_kind} label")
        return LabeledDataset(
            ids=tuple(np.asarray(self.ids)[keep]),
            features=self.features[keep],
            labels=column[keep],
            property_kind=property_kind,
        )


def _read_rows(path) -> list[tuple[int, list[str]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return [(line_no, row) for line_no, row in
                    enumerate(csv.reader(fh), start=1) if row]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _parse_float_cell(cell: str, path, line_no: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"{path}, line {line_no}: column {column!r} has non-numeric value {cell!r}"
        ) from None


def load_features(path) -> Dataset:
    """Read a feature table: header ``id,f0,...,f{D-1}``, one row per sample."""
    rows = _read_rows(path)
    if not rows:
        raise ParseError(f"{path}: file is empty")
    header_line, header = rows[0]
    dim = len(header) - 1
    if header[0] != "id" or dim < 1 or header[1:] != [f"f{i}" for i in range(dim)]:
        raise ParseError(
            f"{path}, line {header_line}: header must be id,f0,...,f{{D-1}}"
        )
    ids: list[str] = []
    seen: set[str] = set()
    values = []
    for line_no, row in rows[1:]:
        if len(row) != dim + 1:
            raise RaggedRow(
                f"{path}, line {line_no}: expected {dim + 1} cells, got {len(row)}"
            )
        sid = row[0]
        if sid in seen:
            raise DuplicateId(f"{path}, line {line_no}: duplicate id {sid!r}")
        seen.add(sid)
        ids.append(sid)
        values.append([_parse_float_cell(c, path, line_no, f"f{i}")
                       for i, c in enumerate(row[1:])])
    features = np.asarray(values, dtype=float).reshape(len(ids), dim)
    nan = np.full(len(ids), np.nan)
    return Dataset(ids=tuple(ids), features=features,
                   conductivity_iacs=nan.copy(), hardness_hv=nan.copy())


def load_labels(path) -> dict[str, tuple[float, float]]:
    """Read a label table keyed by id; empty cells become NaN."""
    rows = _read_rows(path)
    if not rows:
        raise ParseError(f"{path}: file is empty")
    header_line, header = rows[0]
    if header != LABELS_HEADER:
        raise ParseError(
            f"{path}, line {header_line}: header must be {','.join(LABELS_HEADER)}"
        )
    table: dict[str, tuple[float, float]] = {}
    for line_no, row in rows[1:]:
        if len(row) != 3:
            raise RaggedRow(f"{path}, line {line_no}: expected 3 cells, got {len(row)}")
        sid = row[0]
        if sid in table:
            raise DuplicateId(f"{path}, line {line_no}: duplicate id {sid!r}")
        cond = (np.nan if row[1] == ""
                else _parse_float_cell(row[1], path, line_no, "conductivity_iacs"))
        hard = (np.nan if row[2] == ""
                else _parse_float_cell(row[2], path, line_no, "hardness_hv"))
        table[sid] = (cond, hard)
    return table


def join_labels(dataset: Dataset, labels: dict[str, tuple[float, float]]) -> Dataset:
    """Attach label rows to a feature table by id.

    Label rows whose id is absent from the features are an error; feature
    rows without a label row simply stay unlabeled.
    """
    known = set(dataset.ids)
    unknown = sorted(set(labels) - known)
    if unknown:
        raise UnmatchedId(f"label rows reference unknown ids: {unknown}")
    cond = dataset.conductivity_iacs.copy()
    hard = dataset.hardness_hv.copy()
    for i, sid in enumerate(dataset.ids):
        if sid in labels:
            cond[i], hard[i] = labels[sid]
    return Dataset(ids=dataset.ids, features=dataset.features,
                   conductivity_iacs=cond, hardness_hv=hard)


def load_dataset(features_path, labels_path=None) -> Dataset:
    dataset = load_features(features_path)
    if labels_path is not None:
        dataset = join_labels(dataset, load_labels(labels_path))
    return dataset


def save_features(path, ids, features) -> None:
    """Write a feature table in the loader's schema."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[0] != len(ids):
        raise ParamOutOfRange("ids and feature rows disagree in count")
    lines = ["id," + ",".join(f"f{i}" for i in range(features.shape[1]))]
    for sid, row in zip(ids, features):
        lines.append(str(sid) + "," + ",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def save_labels(path, ids, conductivity_iacs=None, hardness_hv=None) -> None:
    """Write a label table; omitted or NaN values become empty cells."""
    def cell(column, i):
        if column is None:
            return ""
        v = column[i]
        return "" if not np.isfinite(v) else _fmt(v)

    lines = [",".join(LABELS_HEADER)]
    for i, sid in enumerate(ids):
        lines.append(f"{sid},{cell(conductivity_iacs, i)},{cell(hardness_hv, i)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def save_model(model: Regressor, path) -> None:
    """Persist a fitted model as a self-describing JSON document."""
    if not model.is_fitted:
        raise NotFitted("only fitted models can be saved")
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": model.get_params(),
        "feature_dim": model.feature_dim,
        "state": model.state,
    }
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path, expected_kind: str | None = None) -> Regressor:
    """Load a model saved by :func:`save_model`.

    Round-tripped models predict bitwise identically: the state is plain
    floats and JSON preserves them exactly.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ParseError(f"{path}: not a model file")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {doc['format_version']!r} is not supported"
        )
    kind = doc.get("kind")
    if kind not in REGRESSOR_KINDS:
        raise ParseError(f"{path}: unknown model kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise KindMismatch(f"{path}: expected a {expected_kind} model, found {kind}")
    cls = REGRESSOR_KINDS[kind]
    try:
        return cls._restore(doc["hyperparameters"], doc["state"], doc["feature_dim"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed model document ({exc})") from exc


def load_linear_head(path, expected_dim: int | None = None) -> LinearRegressor:
    """Load an exported regression head ``{"weights": [...], "bias": b}``
    as a fitted linear model."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "weights" not in doc or "bias" not in doc:
        raise ParseError(f"{path}: head file must contain 'weights' and 'bias'")
    weights = np.asarray(doc["weights"], dtype=float)
    if expected_dim is not None and weights.size != expected_dim:
        raise DimensionMismatch(
            f"{path}: head has width {weights.size}, expected {expected_dim}"
        )
    return LinearRegressor.from_weights(weights, float(doc["bias"]))
