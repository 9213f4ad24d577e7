import numpy as np
import pytest

from lapfit.gmrf import random_connected_graph, sample_gmrf
from lapfit.graph import assemble_laplacian


def gmrf_instance(n, m, N, seed):
    """Random connected topology, its ground-truth weights and N GMRF samples."""
    rng = np.random.default_rng(seed)
    topology, u = random_connected_graph(n, m, rng)
    x = sample_gmrf(assemble_laplacian(topology, u), N, rng)
    return topology, u, x


def natural_image(name="camera"):
    """A 256x256 grayscale test image from scikit-image (2x2 block mean)."""
    data = pytest.importorskip("skimage.data")
    img = getattr(data, name)().astype(float)
    if img.ndim == 3:
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    h, w = (img.shape[0] // 2) * 2, (img.shape[1] // 2) * 2
    img = img[:h, :w].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
    if min(img.shape) < 256:
        img = getattr(data, name)().astype(float)
        if img.ndim == 3:
            img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    top = (img.shape[0] - 256) // 2
    left = (img.shape[1] - 256) // 2
    return img[top : top + 256, left : left + 256]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
