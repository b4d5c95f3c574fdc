"""Command-line entry point wiring the library into the full workflows.

Every command is deterministic under a fixed seed and configuration. Log
lines go to standard error; machine-readable outputs only land in files
under the output directory. A command exits 0 only if every declared output
was written; on failure, outputs written earlier in the same run are removed
so no partial result set survives.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis, datastore
from .augment import build_augmented
from .errors import FagcError, ParamOutOfRange
from .evalharness import DEFAULT_K_SWEEP, EvaluationReport, run_comparison, run_k_sweep, run_teacher_grid
from .geodesic import fit_geodesic, sample_uniform
from .preshape import FeatureVector, preshape_normalize, project
from .regressors import REGRESSOR_KINDS, make_regressor

ALL_MODEL_KINDS = ("linear", "knn", "adaboost", "extra_tree", "decision_tree", "bagging")
DEFAULT_TEACHER_KINDS = ("decision_tree", "adaboost", "extra_tree", "bagging")

_PROPERTY_COLUMN = {"conductivity": "conductivity_iacs", "hardness": "hardness_hv"}


@dataclass
class RunConfig:
    """Merged per-command parameters (flags win over the config file)."""

    command: str
    features: str | None = None
    labels: str | None = None
    property: str = "conductivity"
    model: list[str] = field(default_factory=lambda: list(ALL_MODEL_KINDS))
    teacher: str = "decision_tree"
    teachers: list[str] = field(default_factory=lambda: list(DEFAULT_TEACHER_KINDS))
    k_generated: int = 100
    k_grid: list[int] = field(default_factory=lambda: list(DEFAULT_K_SWEEP))
    folds: int = 6
    fold: int = 0
    seed: int = 0
    out: str = "."
    patches: str | None = None
    grid_rows: int = 4
    grid_cols: int = 4


def _model_seed(kind: str, seed: int):
    try:
        return make_regressor(kind, seed=seed)
    except TypeError:
        return make_regressor(kind)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_labeled(cfg: RunConfig) -> datastore.LabeledDataset:
    if cfg.features is None:
        raise ParamOutOfRange("--features is required")
    if cfg.labels is None:
        raise ParamOutOfRange("--labels is required for this command")
    dataset = datastore.load_dataset(cfg.features, cfg.labels)
    return dataset.select(_PROPERTY_COLUMN[cfg.property])


def _write_outputs(writers) -> list[str]:
    """Run (path, writer) pairs; on failure remove everything written so far."""
    written: list[str] = []
    try:
        for path, writer in writers:
            writer(path)
            written.append(path)
    except BaseException:
        for p in written:
            try:
                os.unlink(p)
            except OSError:
                pass
        raise
    return written


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def cmd_augment(cfg: RunConfig) -> list[str]:
    data = _load_labeled(cfg)
    teacher = _model_seed(cfg.teacher, cfg.seed)
    aug = build_augmented(data.features, data.labels, cfg.k_generated, teacher,
                          ids=list(data.ids), teacher_protocol="out-of-fold",
                          seed=cfg.seed)
    _log(f"augment: {aug.m} originals + {aug.k} generated "
         f"(teacher {aug.teacher_kind}, oof rmse {aug.teacher_quality_rmse})")
    column = _PROPERTY_COLUMN[cfg.property]
    label_kw = {column: aug.pseudo_labels}
    return _write_outputs([
        (_out_path(cfg, "generated_features.csv"),
         lambda p: datastore.save_features(p, aug.generated_ids, aug.generated_features)),
        (_out_path(cfg, "generated_labels.csv"),
         lambda p: datastore.save_labels(p, aug.generated_ids, **label_kw)),
    ])


def cmd_evaluate(cfg: RunConfig) -> list[str]:
    data = _load_labeled(cfg)
    models = [_model_seed(kind, cfg.seed) for kind in cfg.model]
    teacher = _model_seed(cfg.teacher, cfg.seed)
    experiment_id = f"evaluate_{cfg.property}"
    baseline = run_comparison(data, models, use_fagc=False, folds=cfg.folds,
                              seed=cfg.seed, experiment_id=experiment_id)
    augmented = run_comparison(data, models, use_fagc=True,
                               k_generated=cfg.k_generated, teacher=teacher,
                               folds=cfg.folds, seed=cfg.seed,
                               experiment_id=experiment_id)
    report = EvaluationReport(experiment_id=experiment_id,
                              rows=baseline.rows + augmented.rows,
                              extras={"seed": cfg.seed, "folds": cfg.folds,
                                      "property": cfg.property,
                                      "k_generated": cfg.k_generated,
                                      "teacher": cfg.teacher,
                                      "audit": {"baseline": baseline.extras["audit"],
                                                "augmented": augmented.extras["audit"]}})
    for agg in report.aggregates():
        tag = f"+fagc(K={agg.k_generated})" if agg.teacher else "baseline"
        _log(f"evaluate: {agg.model:<13} {tag:<16} r2={agg.r2} rmse={agg.rmse}")
    return _write_outputs([
        (_out_path(cfg, "report.csv"), report.to_csv),
        (_out_path(cfg, "report.json"), report.to_json),
    ])


def cmd_sweep(cfg: RunConfig) -> list[str]:
    data = _load_labeled(cfg)
    models = [_model_seed(kind, cfg.seed) for kind in cfg.model]
    teacher = _model_seed(cfg.teacher, cfg.seed)
    report = run_k_sweep(data, models, teacher, k_values=cfg.k_grid,
                         folds=cfg.folds, seed=cfg.seed,
                         experiment_id=f"sweep_{cfg.property}")
    report.extras["property"] = cfg.property
    _log(f"sweep: {len(cfg.k_grid)} K values x {len(models)} models x {cfg.folds} folds")
    return _write_outputs([
        (_out_path(cfg, "sweep.csv"), report.to_csv),
        (_out_path(cfg, "sweep.json"), report.to_json),
    ])


def cmd_teacher_grid(cfg: RunConfig) -> list[str]:
    data = _load_labeled(cfg)
    students = [_model_seed(kind, cfg.seed) for kind in cfg.model]
    teachers = [_model_seed(kind, cfg.seed) for kind in cfg.teachers]
    report = run_teacher_grid(data, teachers, students, k_generated=cfg.k_generated,
                              folds=cfg.folds, seed=cfg.seed,
                              experiment_id=f"teacher_grid_{cfg.property}")
    report.extras["property"] = cfg.property
    _log(f"teacher-grid: {len(teachers)} teachers x {len(students)} students "
         f"(+ no-augmentation baseline)")
    return _write_outputs([
        (_out_path(cfg, "teacher_grid.csv"), report.to_csv),
        (_out_path(cfg, "teacher_grid.json"), report.to_json),
    ])


def cmd_heatmap(cfg: RunConfig) -> list[str]:
    data = _load_labeled(cfg)
    if cfg.patches is None:
        raise ParamOutOfRange("--patches is required for heatmap")
    patches = datastore.load_features(cfg.patches)
    column = _PROPERTY_COLUMN[cfg.property]
    model = _model_seed(cfg.model[0] if cfg.model else "decision_tree", cfg.seed)
    if cfg.k_generated > 0:
        teacher = _model_seed(cfg.teacher, cfg.seed)
        aug = build_augmented(data.features, data.labels, cfg.k_generated, teacher,
                              ids=list(data.ids), seed=cfg.seed)
        fitted = model.fit(aug.combined_features(), aug.combined_labels())
        patch_x = preshape_normalize(patches.features)
    else:
        fitted = model.fit(data.features, data.labels)
        patch_x = patches.features
    grid = analysis.patch_contribution_map(patch_x, fitted, cfg.grid_rows,
                                           cfg.grid_cols, property_kind=column)
    _log(f"heatmap: {grid.rows}x{grid.cols} grid from {patches.n} patches "
         f"({model.kind}, K={cfg.k_generated})")
    return _write_outputs([
        (_out_path(cfg, "heatmap.csv"), lambda p: analysis.write_heatmap_csv(grid, p)),
        (_out_path(cfg, "heatmap.pgm"), lambda p: analysis.write_heatmap_pgm(grid, p)),
    ])


def cmd_embed(cfg: RunConfig) -> list[str]:
    from .evalharness import kfold_split  # placed here with its one caller

    data = _load_labeled(cfg)
    splits = kfold_split(data.n, cfg.folds, cfg.seed)
    if not 0 <= cfg.fold < len(splits):
        raise ParamOutOfRange(f"--fold must lie in [0, {len(splits) - 1}]")
    train_idx, test_idx = splits[cfg.fold]
    ids = np.asarray(data.ids)

    train_pts = [project(FeatureVector(id=i, values=row))
                 for i, row in zip(ids[train_idx], data.features[train_idx])]
    test_pts = [project(FeatureVector(id=i, values=row))
                for i, row in zip(ids[test_idx], data.features[test_idx])]
    segment = fit_geodesic(train_pts)
    generated = sample_uniform(segment, cfg.k_generated)

    points = train_pts + test_pts + generated + [segment.z1, segment.z2]
    xy = analysis.embed_2d(points)
    out_ids = (list(ids[train_idx]) + list(ids[test_idx])
               + [f"gen_{i:04d}" for i in range(len(generated))]
               + ["endpoint_0", "endpoint_1"])
    sources = (["train"] * len(train_pts) + ["test"] * len(test_pts)
               + ["generated"] * len(generated) + ["endpoint", "endpoint"])
    _log(f"embed: fold {cfg.fold}, {len(train_pts)} train / {len(test_pts)} test "
         f"/ {len(generated)} generated points")
    return _write_outputs([
        (_out_path(cfg, "embedding.csv"),
         lambda p: analysis.write_embedding_csv(p, out_ids, xy, sources)),
    ])


_COMMANDS = {
    "augment": cmd_augment,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "teacher-grid": cmd_teacher_grid,
    "heatmap": cmd_heatmap,
    "embed": cmd_embed,
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fagc",
        description="Feature augmentation on geodesic curves for property regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--features", help="feature CSV (id,f0,...)")
        p.add_argument("--labels", help="label CSV (id,conductivity_iacs,hardness_hv)")
        p.add_argument("--property", choices=("conductivity", "hardness"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--config", help="JSON file supplying any of the flags; flags win")

    p = sub.add_parser("augment", help="generate pseudo-labeled features")
    common(p)
    p.add_argument("--teacher", choices=ALL_MODEL_KINDS)
    p.add_argument("--k-generated", type=int, dest="k_generated")

    p = sub.add_parser("evaluate", help="cross-validated comparison with/without augmentation")
    common(p)
    p.add_argument("--model", action="append", choices=ALL_MODEL_KINDS)
    p.add_argument("--teacher", choices=ALL_MODEL_KINDS)
    p.add_argument("--k-generated", type=int, dest="k_generated")
    p.add_argument("--folds", type=int)

    p = sub.add_parser("sweep", help="sweep the generated-feature count")
    common(p)
    p.add_argument("--model", action="append", choices=ALL_MODEL_KINDS)
    p.add_argument("--teacher", choices=ALL_MODEL_KINDS)
    p.add_argument("--k-grid", type=_int_list, dest="k_grid",
                   help="comma-separated K values")
    p.add_argument("--folds", type=int)

    p = sub.add_parser("teacher-grid", help="teacher-by-student quality grid")
    common(p)
    p.add_argument("--model", action="append", choices=ALL_MODEL_KINDS,
                   help="student model (repeatable)")
    p.add_argument("--teachers", type=lambda s: s.split(","),
                   help="comma-separated teacher kinds")
    p.add_argument("--k-generated", type=int, dest="k_generated")
    p.add_argument("--folds", type=int)

    p = sub.add_parser("heatmap", help="patch-grid property contribution map")
    common(p)
    p.add_argument("--patches", help="patch feature CSV in tiling order")
    p.add_argument("--model", action="append", choices=ALL_MODEL_KINDS)
    p.add_argument("--teacher", choices=ALL_MODEL_KINDS)
    p.add_argument("--k-generated", type=int, dest="k_generated",
                   help="0 trains on raw features without augmentation")
    p.add_argument("--grid-rows", type=int, dest="grid_rows")
    p.add_argument("--grid-cols", type=int, dest="grid_cols")

    p = sub.add_parser("embed", help="2-D embedding of real and generated features")
    common(p)
    p.add_argument("--k-generated", type=int, dest="k_generated")
    p.add_argument("--folds", type=int)
    p.add_argument("--fold", type=int, help="which fold's split to visualize")

    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ParamOutOfRange(f"{args.config}: config must be a JSON object")
    cfg = RunConfig(command=args.command)
    for key in vars(cfg):
        if key == "command":
            continue
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            setattr(cfg, key, flag_value)
        elif key in file_cfg:
            setattr(cfg, key, file_cfg[key])
    if isinstance(cfg.model, str):
        cfg.model = cfg.model.split(",")
    if isinstance(cfg.teachers, str):
        cfg.teachers = cfg.teachers.split(",")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        if cfg.command != "heatmap" and cfg.k_generated < 1:
            parser.error(f"--k-generated must be >= 1, got {cfg.k_generated}")
        for kind in list(cfg.model) + [cfg.teacher] + list(cfg.teachers):
            if kind not in REGRESSOR_KINDS:
                parser.error(f"unknown model kind {kind!r}")
        written = _COMMANDS[cfg.command](cfg)
    except FagcError as exc:
        _log(f"error: {exc}")
        return 1
    for path in written:
        _log(f"wrote {path}")
    return 0


def entry() -> None:
    sys.exit(main())
