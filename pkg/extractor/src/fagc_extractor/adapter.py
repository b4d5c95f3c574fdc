"""Export pretrained-CNN image features into the fagc CSV/JSON formats.

A manifest JSON names the backbone, the expected feature width, the
preprocessing choices, and the images to process (whole or as a 4x4 patch
tiling). Extraction emits feature tables in the exact schema the downstream
package ingests (header ``id,f0,...,f{D-1}``); the network's regression head
exports as ``head.json`` with plain weights and bias.

The backbone's penultimate activations (global-average-pooled) are the
features. Inference always runs in eval mode, so repeated extraction of the
same image is bitwise reproducible.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image
from torchvision import models

# ImageNet statistics; recorded in every manifest round-trip so downstream
# users can see exactly what preprocessing produced a feature file.
DEFAULT_MEAN = (0.485, 0.456, 0.406)
DEFAULT_STD = (0.229, 0.224, 0.225)
DEFAULT_INPUT_SIZE = 528  # the B6 train resolution; tests shrink it for speed

BACKBONES = {
    "efficientnet_b0": models.efficientnet_b0,
    "efficientnet_b1": models.efficientnet_b1,
    "efficientnet_b2": models.efficientnet_b2,
    "efficientnet_b3": models.efficientnet_b3,
    "efficientnet_b4": models.efficientnet_b4,
    "efficientnet_b5": models.efficientnet_b5,
    "efficientnet_b6": models.efficientnet_b6,
    "efficientnet_b7": models.efficientnet_b7,
}

TILINGS = ("none", "4x4")


class ExtractorError(Exception):
    """Base class for adapter failures."""


class ManifestError(ExtractorError):
    """The manifest is malformed or inconsistent with the backbone."""


class ModelLoadError(ExtractorError):
    """The backbone or its weights could not be loaded."""


class HeadShapeMismatch(ExtractorError):
    """The regression head does not have the expected single-output shape."""


@dataclass(frozen=True)
class ImageEntry:
    id: str
    path: str
    tiling: str = "none"
    label: float | None = None


@dataclass(frozen=True)
class ExtractionManifest:
    model_name: str
    feature_dim: int
    images: tuple[ImageEntry, ...]
    input_size: int = DEFAULT_INPUT_SIZE
    weights: str | None = None  # path to a state dict; None = seeded random init
    seed: int = 0
    mean: tuple[float, ...] = DEFAULT_MEAN
    std: tuple[float, ...] = DEFAULT_STD


def load_manifest(path) -> ExtractionManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    try:
        entries = []
        for item in doc["images"]:
            tiling = item.get("tiling", "none")
            if tiling not in TILINGS:
                raise ManifestError(f"unknown tiling {tiling!r}; choose from {TILINGS}")
            entries.append(ImageEntry(id=str(item["id"]), path=item["path"],
                                      tiling=tiling, label=item.get("label")))
        return ExtractionManifest(
            model_name=doc["model_name"],
            feature_dim=int(doc["feature_dim"]),
            images=tuple(entries),
            input_size=int(doc.get("input_size", DEFAULT_INPUT_SIZE)),
            weights=doc.get("weights"),
            seed=int(doc.get("seed", 0)),
            mean=tuple(doc.get("mean", DEFAULT_MEAN)),
            std=tuple(doc.get("std", DEFAULT_STD)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: malformed manifest ({exc})") from exc


def build_model(manifest: ExtractionManifest) -> torch.nn.Module:
    """Backbone with its classifier replaced by a 1-output regression head.

    Without a weights file the network is randomly initialized from the
    manifest seed, which keeps extraction reproducible in environments where
    pretrained checkpoints are unavailable.
    """
    if manifest.model_name not in BACKBONES:
        raise ModelLoadError(
            f"unknown backbone {manifest.model_name!r}; "
            f"choose from {sorted(BACKBONES)}"
        )
    torch.manual_seed(manifest.seed)
    model = BACKBONES[manifest.model_name](weights=None)
    in_features = model.classifier[-1].in_features
    if in_features != manifest.feature_dim:
        raise ManifestError(
            f"manifest declares feature_dim {manifest.feature_dim}, but "
            f"{manifest.model_name} produces {in_features}"
        )
    model.classifier[-1] = torch.nn.Linear(in_features, 1)
    if manifest.weights is not None:
        try:
            state = torch.load(manifest.weights, map_location="cpu",
                               weights_only=True)
            model.load_state_dict(state)
        except (OSError, RuntimeError, ValueError) as exc:
            raise ModelLoadError(
                f"cannot load weights from {manifest.weights}: {exc}"
            ) from exc
    model.eval()
    return model


def _load_image(entry: ImageEntry) -> Image.Image:
    try:
        return Image.open(entry.path).convert("RGB")
    except OSError as exc:
        raise ModelLoadError(f"cannot read image {entry.path}: {exc}") from exc


def tile_4x4(image: Image.Image) -> list[Image.Image]:
    """Sixteen non-overlapping rectangles covering the image, row-major.

    Boundaries are rounded grid lines, so the cover is exact for any size
    and the rectangles are equal whenever both sides divide by four.
    """
    width, height = image.size
    xs = [round(c * width / 4) for c in range(5)]
    ys = [round(r * height / 4) for r in range(5)]
    return [image.crop((xs[c], ys[r], xs[c + 1], ys[r + 1]))
            for r in range(4) for c in range(4)]


def _preprocess(image: Image.Image, manifest: ExtractionManifest) -> torch.Tensor:
    size = manifest.input_size
    resized = image.resize((size, size), Image.BILINEAR)
    array = np.asarray(resized, dtype=np.float32) / 255.0
    array = (array - np.asarray(manifest.mean, dtype=np.float32)) \
        / np.asarray(manifest.std, dtype=np.float32)
    return torch.from_numpy(array.transpose(2, 0, 1))


def _pooled_features(model: torch.nn.Module, batch: torch.Tensor) -> np.ndarray:
    with torch.no_grad():
        activations = model.features(batch)
        pooled = torch.nn.functional.adaptive_avg_pool2d(activations, 1)
    return pooled.flatten(1).numpy().astype(np.float64)


def _write_feature_csv(path, ids, rows) -> None:
    dim = rows[0].size
    lines = ["id," + ",".join(f"f{i}" for i in range(dim))]
    for sid, row in zip(ids, rows):
        lines.append(str(sid) + "," + ",".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path, text: str) -> None:
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


def extract(manifest: ExtractionManifest, out_dir,
            model: torch.nn.Module | None = None,
            batch_size: int = 8) -> dict[str, str]:
    """Run the backbone over every manifest image and write feature CSVs.

    Untiled entries produce one row each in ``features.csv``; tiled entries
    produce sixteen rows each in ``patches.csv``, ids suffixed ``_p00`` ..
    ``_p15`` in row-major tile order. Output row order follows the manifest
    regardless of batching.
    """
    if not manifest.images:
        raise ManifestError("manifest lists no images")
    if model is None:
        model = build_model(manifest)
    os.makedirs(out_dir, exist_ok=True)

    whole_ids: list[str] = []
    whole_tensors: list[torch.Tensor] = []
    patch_ids: list[str] = []
    patch_tensors: list[torch.Tensor] = []
    for entry in manifest.images:
        image = _load_image(entry)
        if entry.tiling == "none":
            whole_ids.append(entry.id)
            whole_tensors.append(_preprocess(image, manifest))
        else:
            for k, patch in enumerate(tile_4x4(image)):
                patch_ids.append(f"{entry.id}_p{k:02d}")
                patch_tensors.append(_preprocess(patch, manifest))

    def run(tensors):
        rows = []
        for i in range(0, len(tensors), batch_size):
            batch = torch.stack(tensors[i:i + batch_size])
            rows.extend(_pooled_features(model, batch))
        return rows

    outputs: dict[str, str] = {}
    if whole_ids:
        rows = run(whole_tensors)
        assert rows[0].size == manifest.feature_dim
        path = os.path.join(out_dir, "features.csv")
        _write_feature_csv(path, whole_ids, rows)
        outputs["features"] = path
    if patch_ids:
        rows = run(patch_tensors)
        path = os.path.join(out_dir, "patches.csv")
        _write_feature_csv(path, patch_ids, rows)
        outputs["patches"] = path
    return outputs


def export_head(model: torch.nn.Module, path) -> str:
    """Write the regression head as ``{"weights": [...], "bias": b}``."""
    head = model.classifier[-1]
    if not isinstance(head, torch.nn.Linear) or head.out_features != 1:
        raise HeadShapeMismatch(
            f"expected a single-output linear head, found {head}"
        )
    weights = head.weight.detach().numpy().astype(np.float64).ravel()
    bias = float(head.bias.detach().numpy().astype(np.float64)[0])
    doc = {"weights": [float(w) for w in weights], "bias": bias}
    _atomic_write(path, json.dumps(doc) + "\n")
    return os.fspath(path)


def finetune(manifest: ExtractionManifest, model: torch.nn.Module | None = None,
             epochs: int = 200, learning_rate: float = 1e-4,
             batch_size: int = 4) -> torch.nn.Module:
    """Optional end-to-end fine-tuning on the manifest's labeled images.

    Mean squared error loss with Adam; entries without a label are skipped.
    """
    labeled = [e for e in manifest.images if e.label is not None]
    if not labeled:
        raise ManifestError("fine-tuning needs at least one labeled image")
    if model is None:
        model = build_model(manifest)
    inputs = torch.stack([_preprocess(_load_image(e), manifest) for e in labeled])
    targets = torch.tensor([[float(e.label)] for e in labeled])
    optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
    loss_fn = torch.nn.MSELoss()
    model.train()
    for _ in range(epochs):
        for i in range(0, len(labeled), batch_size):
            optimizer.zero_grad()
            loss = loss_fn(model(inputs[i:i + batch_size]),
                           targets[i:i + batch_size])
            loss.backward()
            optimizer.step()
    model.eval()
    return model
