"""Run images through a convolutional backbone and write a headcam bundle.

The bundle is one manifest.json plus raw little-endian float32 blobs; this
module writes that format directly so the exporter has no dependency on the
consumer package. All math (gradients, CAMs) happens downstream.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = "1"
DEFAULT_HEAD_DIMS = (40, 30, 20)


class ExportError(Exception):
    pass


@dataclass(frozen=True)
class ExportSpec:
    """What to export: backbone, images, dense-head layout, destination."""

    backbone: str = "vgg16"
    images: tuple[str, ...] = ()
    head_dims: tuple[int, ...] = DEFAULT_HEAD_DIMS
    out: str = ""
    seed: int = 0
    force: bool = False
    # injectable feature extractor for tests: callable (H, W, 3) -> (T, M, N)
    extractor: object = field(default=None, compare=False)

    def __post_init__(self):
        if not self.images:
            raise ExportError("at least one input image is required")
        if not self.out:
            raise ExportError("an output bundle directory is required")
        if not self.head_dims or any(d < 1 for d in self.head_dims):
            raise ExportError(f"bad head dims {self.head_dims}")


def _vgg16_extractor():
    """Last-conv feature maps of torchvision's VGG16 (randomly initialized).

    Only the architecture matters here: a 200x200 input comes out as 512
    maps of 6x6 after the five conv/pool stages.
    """
    import torch
    from torchvision.models import vgg16

    features = vgg16(weights=None).features.eval()

    def extract(image: np.ndarray) -> np.ndarray:
        x = torch.from_numpy(image.astype(np.float32)).permute(2, 0, 1)[None]
        with torch.no_grad():
            out = features(x)[0]
        return out.numpy().astype(np.float64)

    return extract


def load_image(path: str) -> np.ndarray:
    """Read an image file as an (H, W, 3) float array in [0, 1]."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def _random_head(rng: np.random.Generator, dims):
    layers = []
    for d_in, d_out in zip(dims, dims[1:]):
        layers.append(
            (
                rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_out, d_in)),
                rng.normal(0.0, 0.1, size=d_out),
            )
        )
    return layers


def export_features(spec: ExportSpec) -> str:
    """Extract feature maps for every image and write the bundle directory.

    Everything is computed and shape-checked before the first byte hits disk,
    so a backbone/manifest mismatch aborts without leaving a partial bundle.
    Returns the bundle path.
    """
    extract = spec.extractor or _vgg16_extractor()

    stacks = []
    for path in spec.images:
        maps = np.asarray(extract(load_image(path)), dtype=np.float64)
        if maps.ndim != 3:
            raise ExportError(f"backbone returned shape {maps.shape} for {path}, expected (T, M, N)")
        stacks.append(maps)
    shape = stacks[0].shape
    for path, maps in zip(spec.images, stacks):
        if maps.shape != shape:
            raise ExportError(f"{path} produced {maps.shape}, first image produced {shape}")
    t, m, n = shape

    d0 = t * m * n
    dims = (d0,) + tuple(spec.head_dims)
    rng = np.random.default_rng(spec.seed)
    head = _random_head(rng, dims)

    manifest_path = os.path.join(spec.out, MANIFEST_NAME)
    if os.path.exists(manifest_path) and not spec.force:
        raise ExportError(f"refusing to overwrite existing bundle at {spec.out}")
    os.makedirs(spec.out, exist_ok=True)

    def blob(name, arr):
        arr = np.ascontiguousarray(arr, dtype="<f4")
        arr.tofile(os.path.join(spec.out, name))
        return {"file": name, "shape": list(arr.shape)}

    manifest = {
        "version": FORMAT_VERSION,
        "endianness": "little",
        "shape": {"m": m, "n": n, "t": t},
        "head": {
            "activation": "relu",
            "dims": list(dims),
            "layers": [
                {
                    "weight": blob(f"head_w{i}.bin", w),
                    "bias": blob(f"head_b{i}.bin", b),
                }
                for i, (w, b) in enumerate(head, start=1)
            ],
        },
        "samples": [
            {"features": blob(f"features_{i:03d}.bin", maps), "label": None}
            for i, maps in enumerate(stacks)
        ],
        "meta": {
            "backbone": spec.backbone if spec.extractor is None else "custom",
            "head_init": "random",
            "source_images": [os.path.basename(p) for p in spec.images],
        },
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return spec.out
