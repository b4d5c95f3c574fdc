"""Pretrained-CNN feature export into the fagc CSV/JSON formats."""

from .adapter import (
    BACKBONES,
    ExtractionManifest,
    ExtractorError,
    HeadShapeMismatch,
    ImageEntry,
    ManifestError,
    ModelLoadError,
    build_model,
    export_head,
    extract,
    finetune,
    load_manifest,
    tile_4x4,
)

__version__ = "0.1.0"

__all__ = [
    "BACKBONES",
    "ExtractionManifest",
    "ExtractorError",
    "HeadShapeMismatch",
    "ImageEntry",
    "ManifestError",
    "ModelLoadError",
    "build_model",
    "export_head",
    "extract",
    "finetune",
    "load_manifest",
    "tile_4x4",
]
