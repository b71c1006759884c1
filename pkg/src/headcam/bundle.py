"""On-disk interchange format: one JSON manifest plus raw little-endian
float32 blobs (row-major), and CSV/PGM heatmap export.

A bundle directory holds a ``manifest.json`` describing shapes and blob files
for the feature samples, the dense head, and optional PCA/SVM sections. The
format is intentionally trivial to write from any language.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .cam import CamMap
from .errors import IntegrityError, ShapeError, ValidationError
from .pca import PCAProjector
from .svm import Kernel, SVMModel, linear_kernel, rbf_kernel
from .types import Activation, DenseHead, DenseLayer, FeatureStack

FORMAT_VERSION = "1"
MANIFEST_NAME = "manifest.json"
_ORTHONORMAL_TOL = 1e-5  # float32 storage keeps V^T V = I only to ~1e-6


@dataclass(frozen=True)
class Bundle:
    """In-memory contents of a bundle directory."""

    stacks: tuple[FeatureStack, ...]
    head: DenseHead
    labels: tuple[int | None, ...] = ()
    pca: PCAProjector | None = None
    svm: SVMModel | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stacks:
            raise ValidationError("bundle needs at least one feature sample")
        labels = tuple(self.labels) if self.labels else (None,) * len(self.stacks)
        if len(labels) != len(self.stacks):
            raise ValidationError("one label entry per sample is required")
        shape = self.stacks[0].maps.shape
        for s in self.stacks:
            if s.maps.shape != shape:
                raise ShapeError("all samples must share the feature-map shape")
        if self.head.input_dim != shape[0] * shape[1] * shape[2]:
            raise ValidationError(
                f"head input dim {self.head.input_dim} != M*N*T = {shape[0] * shape[1] * shape[2]}"
            )
        object.__setattr__(self, "labels", labels)


def _write_blob(path: str, name: str, arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype="<f4")
    arr.tofile(os.path.join(path, name))
    return {"file": name, "shape": list(arr.shape)}


def _read_blob(path: str, ref: dict) -> np.ndarray:
    name = ref.get("file")
    shape = tuple(ref.get("shape", ()))
    fpath = os.path.join(path, name)
    if not os.path.exists(fpath):
        raise IOError(f"missing blob file {name}")
    expected = 4 * int(np.prod(shape)) if shape else 4
    actual = os.path.getsize(fpath)
    if actual != expected:
        raise IOError(f"blob {name} has {actual} bytes, expected {expected}")
    data = np.fromfile(fpath, dtype="<f4").astype(np.float64)
    return data.reshape(shape)


def save_bundle(bundle: Bundle, path: str, force: bool = False) -> None:
    """Write a bundle directory; refuses to overwrite without force."""
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if os.path.exists(manifest_path) and not force:
        raise IOError(f"refusing to overwrite existing bundle at {path} (use force)")
    os.makedirs(path, exist_ok=True)

    t, m, n = bundle.stacks[0].maps.shape
    samples = []
    for idx, (stack, label) in enumerate(zip(bundle.stacks, bundle.labels)):
        ref = _write_blob(path, f"features_{idx:03d}.bin", stack.maps)
        samples.append({"features": ref, "label": label})

    layers = []
    for idx, layer in enumerate(bundle.head.layers, start=1):
        layers.append(
            {
                "weight": _write_blob(path, f"head_w{idx}.bin", layer.weight),
                "bias": _write_blob(path, f"head_b{idx}.bin", layer.bias),
            }
        )
    manifest = {
        "version": FORMAT_VERSION,
        "endianness": "little",
        "shape": {"m": m, "n": n, "t": t},
        "head": {
            "activation": bundle.head.activation.value,
            "dims": list(bundle.head.dims),
            "layers": layers,
        },
        "samples": samples,
    }
    if bundle.pca is not None:
        manifest["pca"] = {
            "components": bundle.pca.components,
            "mean": _write_blob(path, "pca_mean.bin", bundle.pca.mean),
            "eigenvectors": _write_blob(path, "pca_vecs.bin", bundle.pca.eigenvectors),
            "eigenvalues": _write_blob(path, "pca_vals.bin", bundle.pca.eigenvalues),
        }
    if bundle.svm is not None:
        manifest["svm"] = {
            "kernel": bundle.svm.kernel.kind,
            "gamma": bundle.svm.kernel.gamma,
            "bias": bundle.svm.bias,
            "support_vectors": _write_blob(path, "svm_sv.bin", bundle.svm.support_vectors),
            "duals": _write_blob(path, "svm_duals.bin", bundle.svm.duals),
            "labels": _write_blob(path, "svm_labels.bin", bundle.svm.labels),
        }
    if bundle.meta:
        manifest["meta"] = bundle.meta
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_bundle(path: str) -> Bundle:
    """Read and validate a bundle directory back into memory."""
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise IOError(f"no {MANIFEST_NAME} in {path}")
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest does not parse: {exc}") from exc

    version = manifest.get("version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"unknown bundle format version {version!r}")
    if manifest.get("endianness") != "little":
        raise ValidationError("only little-endian bundles are supported")

    shape = manifest.get("shape", {})
    try:
        m, n, t = int(shape["m"]), int(shape["n"]), int(shape["t"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"manifest shape section invalid: {exc}") from exc

    head_sec = manifest.get("head")
    if not head_sec:
        raise ValidationError("manifest lacks a head section")
    try:
        activation = Activation(head_sec["activation"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"unknown activation: {exc}") from exc
    layers = tuple(
        DenseLayer(weight=_read_blob(path, ls["weight"]), bias=_read_blob(path, ls["bias"]))
        for ls in head_sec.get("layers", [])
    )
    head = DenseHead(layers=layers, activation=activation)
    declared = head_sec.get("dims")
    if declared is not None and tuple(declared) != head.dims:
        raise ValidationError(f"declared head dims {declared} do not match blobs {head.dims}")
    if head.input_dim != m * n * t:
        raise ValidationError(f"head input dim {head.input_dim} != M*N*T = {m * n * t} (field: shape)")

    stacks, labels = [], []
    for sample in manifest.get("samples", []):
        maps = _read_blob(path, sample["features"])
        if maps.shape != (t, m, n):
            raise ValidationError(f"sample features shaped {maps.shape}, expected {(t, m, n)}")
        stacks.append(FeatureStack(maps=maps))
        label = sample.get("label")
        labels.append(None if label is None else int(label))
    if not stacks:
        raise ValidationError("manifest lists no samples")

    proj = None
    if "pca" in manifest:
        sec = manifest["pca"]
        proj = PCAProjector(
            mean=_read_blob(path, sec["mean"]),
            eigenvectors=_read_blob(path, sec["eigenvectors"]),
            eigenvalues=_read_blob(path, sec["eigenvalues"]),
        )
        gram = proj.eigenvectors.T @ proj.eigenvectors
        drift = float(np.max(np.abs(gram - np.eye(proj.components))))
        if drift > _ORTHONORMAL_TOL:
            raise IntegrityError(f"eigenvectors are not orthonormal (max drift {drift:.3g})")

    model = None
    if "svm" in manifest:
        sec = manifest["svm"]
        kind = sec.get("kernel")
        if kind == "linear":
            kernel = linear_kernel()
        elif kind == "rbf":
            kernel = rbf_kernel(float(sec.get("gamma", 0.0)))
        else:
            raise ValidationError(f"unknown kernel {kind!r}")
        model = SVMModel(
            support_vectors=_read_blob(path, sec["support_vectors"]),
            duals=_read_blob(path, sec["duals"]),
            labels=_read_blob(path, sec["labels"]),
            bias=float(sec["bias"]),
            kernel=kernel,
        )

    return Bundle(
        stacks=tuple(stacks),
        head=head,
        labels=tuple(labels),
        pca=proj,
        svm=model,
        meta=manifest.get("meta", {}),
    )


def export_heatmap(cam: CamMap, path: str, fmt: str) -> None:
    """Write a CamMap as full-precision CSV or 8-bit grayscale P5 PGM.

    PGM pixels are round(255 * clip(v, 0, nu) / nu) with round-half-up, where
    nu is the map's color_max (the shared nu_b for a plus/minus pair). A zero
    nu yields an all-zero image.
    """
    if fmt == "csv":
        np.savetxt(path, cam.values, delimiter=",", fmt="%.17g")
        return
    if fmt != "pgm":
        raise ValidationError(f"unknown heatmap format {fmt!r}")
    values = cam.values
    nu = cam.color_max if cam.color_max > 0 else float(values.max())
    if nu > 0:
        pixels = np.floor(255.0 * np.clip(values, 0.0, nu) / nu + 0.5).astype(np.uint8)
    else:
        pixels = np.zeros(values.shape, dtype=np.uint8)
    m, n = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n} {m}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
