"""Grad-CAM, PCA-Grad-CAM and SVM-Grad-CAM for dense CNN heads.

Computes saliency heatmaps for a flatten -> dense -> PCA -> SVM pipeline using
closed-form Jacobian chain products, with a built-in finite-difference oracle
for verification.
"""

from .bundle import Bundle, export_heatmap, load_bundle, save_bundle
from .cam import CamMap, conventional_grad_cam, pca_grad_cam, svm_grad_cam, upsample
from .errors import HeadcamError
from .forward import forward_head, sigmoid
from .jacobian import (
    JacobianBundle,
    build_bundle,
    chain_class,
    chain_pca,
    chain_svm,
)
from .oracle import FDConfig, compare, fd_jacobian
from .pca import PCAProjector, contribution_ratios, covariance, fit, project, sym_eig
from .svm import (
    Kernel,
    SVMModel,
    decision,
    decision_grad,
    effect,
    kernel_eval,
    kernel_grad,
    linear_kernel,
    rbf_kernel,
    train_smo,
)
from .types import (
    Activation,
    DenseHead,
    DenseLayer,
    FeatureStack,
    ForwardTrace,
    JacobianMatrix,
    concat_features,
    flatten_map,
    unflatten,
)
from .verify import run_verification

__version__ = "0.1.0"
