"""Feature augmentation on geodesic curves for small-sample regression.

Feature vectors are projected onto the pre-shape sphere, a geodesic segment
is fitted through the projected cloud, synthetic features are sampled
uniformly along it and pseudo-labeled by a teacher regressor, and student
regressors train on the expanded set.
"""

from .augment import AugmentedDataset, build_augmented, pseudo_label
from .datastore import (
    Dataset,
    LabeledDataset,
    load_dataset,
    load_features,
    load_labels,
    load_linear_head,
    load_model,
    save_features,
    save_labels,
    save_model,
)
from .errors import FagcError
from .evalharness import (
    DEFAULT_K_SWEEP,
    EvaluationReport,
    MetricSet,
    kfold_split,
    metrics,
    r_squared,
    run_comparison,
    run_k_sweep,
    run_teacher_grid,
)
from .geodesic import (
    GeodesicSegment,
    fit_geodesic,
    point_at,
    point_to_segment_distance,
    sample_uniform,
)
from .analysis import PatchGrid, embed_2d, patch_contribution_map
from .preshape import (
    FeatureVector,
    PreShapePoint,
    geodesic_distance,
    preshape_normalize,
    project,
    unproject,
)
from .regressors import (
    REGRESSOR_KINDS,
    AdaBoostR2Regressor,
    BaggingRegressor,
    DecisionTreeRegressor,
    ExtraTreeRegressor,
    KNNRegressor,
    LinearRegressor,
    make_regressor,
)
from .synthetic import make_arc_dataset

__version__ = "0.1.0"

__all__ = [
    "AdaBoostR2Regressor",
    "AugmentedDataset",
    "BaggingRegressor",
    "DEFAULT_K_SWEEP",
    "Dataset",
    "DecisionTreeRegressor",
    "EvaluationReport",
    "ExtraTreeRegressor",
    "FagcError",
    "FeatureVector",
    "GeodesicSegment",
    "KNNRegressor",
    "LabeledDataset",
    "LinearRegressor",
    "MetricSet",
    "PatchGrid",
    "PreShapePoint",
    "REGRESSOR_KINDS",
    "build_augmented",
    "embed_2d",
    "fit_geodesic",
    "geodesic_distance",
    "kfold_split",
    "load_dataset",
    "load_features",
    "load_labels",
    "load_linear_head",
    "load_model",
    "make_arc_dataset",
    "make_regressor",
    "metrics",
    "patch_contribution_map",
    "point_at",
    "point_to_segment_distance",
    "preshape_normalize",
    "project",
    "pseudo_label",
    "r_squared",
    "run_comparison",
    "run_k_sweep",
    "run_teacher_grid",
    "sample_uniform",
    "save_features",
    "save_labels",
    "save_model",
    "unproject",
]
