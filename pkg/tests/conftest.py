import numpy as np
import pytest

from headcam.types import Activation, DenseHead, DenseLayer, FeatureStack


def random_head(rng, dims, activation=Activation.SIGMOID, bias_scale=0.1):
    layers = tuple(
        DenseLayer(
            weight=rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_out, d_in)),
            bias=rng.normal(0.0, bias_scale, size=d_out),
        )
        for d_in, d_out in zip(dims, dims[1:])
    )
    return DenseHead(layers=layers, activation=activation)


def random_stack(rng, t, m, n):
    return FeatureStack(maps=rng.normal(size=(t, m, n)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def synthetic_blob_data(seed=0, n_train=200, n_test=100, t=2, m=4, n=4,
                        offset=3.5, noise=0.5):
    """Two Gaussian blobs in flattened feature space, split train/test."""
    rng_ = np.random.default_rng(seed)
    d0 = t * m * n
    direction = rng_.normal(size=d0)
    direction /= np.linalg.norm(direction)

    def sample(label, count):
        return label * offset * direction + noise * rng_.normal(size=(count, d0))

    half_tr, half_te = n_train // 2, n_test // 2
    x_train = np.vstack([sample(1, half_tr), sample(-1, half_tr)])
    y_train = np.concatenate([np.ones(half_tr), -np.ones(half_tr)])
    x_test = np.vstack([sample(1, half_te), sample(-1, half_te)])
    y_test = np.concatenate([np.ones(half_te), -np.ones(half_te)])

    head = DenseHead(
        layers=tuple(
            DenseLayer(
                weight=rng_.normal(0, 1 / np.sqrt(d_in), size=(d_out, d_in)),
                bias=np.abs(rng_.normal(0, 0.3, size=d_out)),
            )
            for d_in, d_out in zip([d0, 16, 8], [16, 8])
        ),
        activation=Activation.RELU,
    )
    stacks = tuple(FeatureStack(maps=x.reshape(t, m, n)) for x in x_train)
    labels = tuple(int(y) for y in y_train)
    return stacks, labels, head, x_test, y_test
