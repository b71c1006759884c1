"""Command-line entry point: fit, cam and verify subcommands.

Exit codes: 0 success, 2 validation/data error, 3 numeric verification failure.
Defaults mirror the reference setup: PCA at layer 2 with 3 components, RBF
kernel with gamma 1 and cost 1.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bundle as bundle_io
from .cam import conventional_grad_cam, pca_grad_cam, svm_grad_cam
from .errors import HeadcamError
from .forward import forward_head
from .jacobian import build_bundle
from .pca import contribution_ratios, fit, project
from .svm import decision, linear_kernel, rbf_kernel, train_smo
from .types import concat_features
from .verify import run_verification

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VERIFY = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="headcam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--bundle", required=True, help="bundle directory")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--pca-layer", type=int, default=2, dest="pca_layer")
        p.add_argument("--components", type=int, default=3)
        p.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--cost", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-5)
        p.add_argument("--force", action="store_true")

    p_fit = sub.add_parser("fit", help="fit PCA + SVM from labeled samples in the bundle")
    common(p_fit)
    p_cam = sub.add_parser("cam", help="export heatmaps for the first sample")
    common(p_cam)
    p_cam.add_argument("--class-cam", action="store_true", dest="class_cam",
                       help="also export conventional Grad-CAM per class")
    p_ver = sub.add_parser("verify", help="run the closed-form-vs-oracle report")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--tol", type=float, default=1e-5)
    return parser


def _make_kernel(args):
    if args.kernel == "linear":
        return linear_kernel()
    if args.gamma <= 0:
        raise HeadcamError("--gamma must be positive for the RBF kernel")
    return rbf_kernel(args.gamma)


def cmd_fit(args) -> int:
    data = bundle_io.load_bundle(args.bundle)
    labeled = [(s, lab) for s, lab in zip(data.stacks, data.labels) if lab is not None]
    if len(labeled) < 2:
        raise HeadcamError("fit requires at least 2 labeled samples in the bundle")
    layer = args.pca_layer
    if not 1 <= layer < data.head.depth:
        raise HeadcamError(
            f"--pca-layer must be in 1..{data.head.depth - 1} for this head, got {layer}"
        )

    observations = np.stack(
        [forward_head(data.head, concat_features(s), depth=layer).post_activation(layer)
         for s, _ in labeled]
    )
    labels = np.array([lab for _, lab in labeled], dtype=np.float64)
    proj = fit(observations, args.components)
    ratios = contribution_ratios(proj)
    projected = np.stack([project(proj, q) for q in observations])
    model = train_smo(projected, labels, _make_kernel(args), cost=args.cost)

    predictions = np.array([1.0 if decision(model, p) > 0 else -1.0 for p in projected])
    accuracy = float(np.mean(predictions == labels))
    for b, ratio in enumerate(ratios, start=1):
        print(f"component {b}: {ratio:.4f}%")
    print(f"training accuracy: {accuracy:.4f}")

    updated = bundle_io.Bundle(
        stacks=data.stacks, head=data.head, labels=data.labels,
        pca=proj, svm=model, meta=data.meta,
    )
    bundle_io.save_bundle(updated, args.bundle, force=True)
    return EXIT_OK


def _export(cam_map, out_dir: str, name: str) -> None:
    bundle_io.export_heatmap(cam_map, os.path.join(out_dir, f"{name}.csv"), "csv")
    bundle_io.export_heatmap(cam_map, os.path.join(out_dir, f"{name}.pgm"), "pgm")


def cmd_cam(args) -> int:
    data = bundle_io.load_bundle(args.bundle)
    out_dir = args.out or args.bundle
    os.makedirs(out_dir, exist_ok=True)
    stack = data.stacks[0]

    if data.pca is None:
        print("bundle has no PCA section; skipping PCA- and SVM-Grad-CAM", file=sys.stderr)
    if data.pca is not None and data.svm is None:
        print("bundle has no SVM section; skipping SVM-Grad-CAM", file=sys.stderr)

    jac = build_bundle(
        data.head, stack,
        proj=data.pca, model=data.svm,
        layer=args.pca_layer if data.pca is not None else None,
        include_class=args.class_cam,
    )
    if jac.per_map_pca is not None:
        for b in range(1, data.pca.components + 1):
            plus, minus = pca_grad_cam(jac, stack, b)
            _export(plus, out_dir, f"pca_b{b}_plus")
            _export(minus, out_dir, f"pca_b{b}_minus")
    if jac.per_map_svm is not None:
        _export(svm_grad_cam(jac, stack), out_dir, "svm")
    if jac.per_map_class is not None:
        n_classes = data.head.dims[-1]
        for c in range(1, n_classes + 1):
            _export(conventional_grad_cam(jac, stack, c), out_dir, f"class_c{c}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_verification(seed=args.seed, rel_tol=args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"fit": cmd_fit, "cam": cmd_cam, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except (HeadcamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
