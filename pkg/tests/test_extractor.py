# -*- coding: utf 8 -*-
"""
Define a suite a tests for the feature extractors.
"""
import numpy as np
import pytest

from baforge.errors import ShapeError, ParameterError
from baforge.extractor import ARCHITECTURES, FeatureExtractor, build_extractor, forward, input_gradient


def directional_error(model, x, upstream, n_directions=5, step=1e-7, seed=0):
    """
    Largest relative error between the analytic and the central-difference
    directional derivative of <f(x), upstream> along random directions.
    """
    rng = np.random.default_rng(seed)
    g = model.input_gradient(x, upstream)
    worst = 0.0
    for _ in range(n_directions):
        v = rng.normal(size=x.shape)
        plus = model.forward(x + step * v) @ upstream
        minus = model.forward(x - step * v) @ upstream
        numeric = (plus - minus) / (2 * step)
        analytic = np.sum(g * v)
        worst = max(worst, abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-8))
    return worst


def test_forward(extractor, image):
    """
    Test embeddings are unit norm for single images and batches.
    """
    e = extractor.forward(image)
    assert e.shape == (16,)
    assert np.isclose(np.linalg.norm(e), 1, atol=1e-6)

    batch = np.stack([image, 1 - image])
    E = forward(extractor, batch)
    assert E.shape == (2, 16)
    assert np.allclose(E[0], e, atol=1e-6)


@pytest.mark.parametrize('arch', sorted(ARCHITECTURES))
def test_input_gradient(arch):
    """
    Test the pixel gradient against finite differences, in double precision.
    """
    model = build_extractor(arch, input_shape=(8, 8, 3), embedding_dim=8, seed=1, dtype=np.float64)
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rng.uniform(size=(8, 8, 3))
        upstream = rng.normal(size=8)
        assert directional_error(model, x, upstream) < 1e-3


def test_input_gradient_batch(extractor64, image):
    """
    Test the batch gradient matches single-image gradients.
    """
    up = np.random.default_rng(0).normal(size=(2, 16))
    batch = np.stack([image, image[::-1]]).astype(np.float64)
    g = input_gradient(extractor64, batch, up)
    assert g.shape == batch.shape
    assert np.allclose(g[1], extractor64.input_gradient(batch[1], up[1]))


def test_shape_errors(extractor, image):
    """
    Test wrong image and upstream shapes.
    """
    with pytest.raises(ShapeError):
        extractor.forward(np.zeros((8, 8, 3)))
    with pytest.raises(ShapeError):
        extractor.input_gradient(image, np.zeros(5))


def test_unknown_arch():
    """
    Test the error lists valid architectures.
    """
    with pytest.raises(ParameterError) as e:
        build_extractor('resnet')
    assert 'cnn-a' in str(e.value) and 'cnn-b' in str(e.value)


def test_descriptor(extractor, image):
    """
    Test rebuilding from the descriptor.
    """
    d = extractor.descriptor()
    assert d['embedding_dim'] == 16
    assert d['input_shape'] == [16, 16, 3]
    rebuilt = FeatureExtractor.from_descriptor(d, params=extractor.params)
    assert np.array_equal(rebuilt.forward(image), extractor.forward(image))


def test_with_params(extractor):
    """
    Test parameter replacement checks shapes and leaves the original alone.
    """
    zeros = [np.zeros_like(p) for p in extractor.params]
    new = extractor.with_params(zeros)
    assert all(np.all(p == 0) for p in new.params)
    assert any(np.any(p != 0) for p in extractor.params)
    with pytest.raises(ShapeError):
        extractor.with_params(zeros[:-1])


def test_seeds():
    """
    Test initialization is seeded.
    """
    a = build_extractor(seed=0, input_shape=(16, 16, 3))
    b = build_extractor(seed=0, input_shape=(16, 16, 3))
    c = build_extractor(seed=1, input_shape=(16, 16, 3))
    assert all(np.array_equal(p, q) for p, q in zip(a.params, b.params))
    assert not all(np.array_equal(p, q) for p, q in zip(a.params, c.params))


def test_identity_init():
    """
    Test the identity embedding layer.
    """
    model = build_extractor('cnn-a', input_shape=(16, 16, 3), embedding_dim=16, init='identity')
    assert np.array_equal(model.layers[-2].weight, np.eye(16))
    assert model.n_parameters > 0
    assert model.astype(np.float64).dtype == np.float64


@pytest.mark.parametrize('arch', sorted(ARCHITECTURES))
@pytest.mark.parametrize('init', ['he', 'identity'])
def test_zero_image(arch, init):
    """
    Test a black image embeds to a unit vector, the same one every time.
    """
    model = build_extractor(arch, input_shape=(64, 64, 3), embedding_dim=32, init=init)
    zeros = np.zeros((64, 64, 3), dtype=np.float32)
    v0 = forward(model, zeros)
    assert np.linalg.norm(v0) == pytest.approx(1, abs=1e-5)
    assert np.array_equal(v0, forward(model, zeros))
    assert np.all(np.isfinite(input_gradient(model, zeros, np.ones(32))))
