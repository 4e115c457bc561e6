# -*- coding: utf 8 -*-
"""
Define a suite a tests for the brightness transforms.
"""
import numpy as np
import pytest

from baforge.errors import ShapeError, ParameterError
from baforge.extractor import build_extractor
from baforge.tensor import j_adv, j_adv_batch
from baforge.transforms import (BrightnessParams, complement, random_rect_mask, rect_bounds,
                                identity, bt, cnbt_patch, cnbt_imperceptible,
                                linear_brightness, random_transform)
from baforge.masks import box_mask
from baforge.utils import numerical_gradient

SHAPE = (16, 16, 3)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_params():
    """
    Test parameter validation and the named parameter sets.
    """
    assert BrightnessParams.evaluation().p == 1.0
    c = BrightnessParams.collapsed()
    assert (c.p, c.l, c.h, c.mu, c.sigma) == (0, 1, 1, 1, 0)
    assert c.replace(p=0.5).p == 0.5
    for bad in ({'p': 1.5}, {'l': 1.2, 'h': 1.0}, {'sigma': -1}, {'area_frac_range': (0.5, 0.2)}):
        with pytest.raises(ParameterError):
            BrightnessParams(**bad)


def test_complement():
    """
    Test the complement of a mask.
    """
    m = np.array([0, 1, 1, 0], dtype=np.float32)
    assert np.array_equal(complement(m), [1, 0, 0, 1])
    assert complement(m).dtype == np.float32


def test_random_rect_mask():
    """
    Test rectangles are rectangles of about the right size.
    """
    r = rng()
    for _ in range(50):
        mask = random_rect_mask(32, 32, r, (0.1, 0.6))
        top, bottom, left, right = rect_bounds(mask)
        area = (bottom - top) * (right - left)
        assert mask.sum() == 3 * area
        assert 0.05 * 1024 <= area <= 0.7 * 1024
        assert np.all(mask[top:bottom, left:right] == 1)
    with pytest.raises(ParameterError):
        random_rect_mask(8, 8, r, (0, 0.5))


def test_identity():
    """
    Test the identity transform.
    """
    x = rng().uniform(size=SHAPE)
    s = identity(x)
    assert np.array_equal(s.transformed, x)
    assert np.all(s.coeff == 1)


def test_bt():
    """
    Test BT at both ends of p.
    """
    x = rng().uniform(size=SHAPE)
    params = BrightnessParams(p=0.0, l=0.5, h=1.5)
    assert np.array_equal(bt(x, params, rng()).transformed, x)

    s = bt(x, params.replace(p=1.0), rng())
    assert s.draws['gate']
    assert 0.5 <= s.draws['s_bt'] <= 1.5
    assert np.allclose(s.transformed, s.draws['s_bt'] * x)


def test_cnbt_patch_regions():
    """
    Test the patch transform scales each region as described.
    """
    x = rng().uniform(size=SHAPE)
    M_p = box_mask(SHAPE, (0.25, 0.5, 0.25, 0.75))
    M_b = box_mask(SHAPE, (0.0, 0.375, 0.0, 0.5))
    params = BrightnessParams(p=1.0, l=0.5, h=1.5, sigma=0.1)
    s = cnbt_patch(x, M_p, M_b, params, rng(3))
    d = s.draws
    expected = d['y'] * np.where(M_p > 0, d['s_bt'], 1.0) * np.where(M_b > 0, d['x_u'], 1.0)
    assert np.allclose(s.coeff, expected)
    # Outside both masks only the global scale applies.
    assert np.allclose(s.coeff[15, 15], d['y'])

    with pytest.raises(ShapeError):
        cnbt_patch(x, M_p[:8], M_b, params, rng())


def test_cnbt_imperceptible():
    """
    Test the full-image transform.
    """
    x = rng().uniform(size=SHAPE)
    M_b = box_mask(SHAPE, (0.0, 0.5, 0.0, 0.5))
    s = cnbt_imperceptible(x, M_b, BrightnessParams(p=1.0, l=0.5, h=1.5), rng(4))
    d = s.draws
    assert np.allclose(s.coeff[0, 0], d['y'] * d['s_bt'])
    assert np.allclose(s.coeff[15, 15], d['y'])


def test_linear_brightness():
    """
    Test the linear baseline stays in range.
    """
    x = rng().uniform(size=SHAPE)
    r = rng()
    for _ in range(20):
        s = linear_brightness(x, (0.5, 1.5), r)
        assert 0.5 <= s.draws['s'] <= 1.5
        assert np.all(s.coeff == s.draws['s'])
    with pytest.raises(ParameterError):
        linear_brightness(x, (1.5, 0.5), r)


@pytest.mark.parametrize('kind', ['none', 'linear', 'nonlinear'])
def test_affinity(kind):
    """
    Test transformed = coeff * input exactly, for many draws.
    """
    x = rng().uniform(size=SHAPE).astype(np.float32)
    M_p = box_mask(SHAPE, (0.25, 0.5, 0.1, 0.9))
    r = rng(5)
    for n in range(100):
        s = random_transform(kind, x, r, patch_mask=M_p if n % 2 else None)
        assert np.array_equal(s.transformed, s.coeff * x)


def test_collapsed():
    """
    Test collapsed parameters give the identity whatever the rectangle.
    """
    x = rng().uniform(size=SHAPE).astype(np.float32)
    M_p = box_mask(SHAPE, (0.25, 0.5, 0.1, 0.9))
    r = rng(6)
    for n in range(20):
        s = random_transform('nonlinear', x, r, params=BrightnessParams.collapsed(),
                             patch_mask=M_p if n % 2 else None)
        assert np.all(s.coeff == 1)
        assert np.array_equal(s.transformed, x)


def test_seeded():
    """
    Test one seed fixes every draw.
    """
    x = rng().uniform(size=SHAPE)
    a = random_transform('nonlinear', x, rng(7))
    b = random_transform('nonlinear', x, rng(7))
    assert a.draws == b.draws
    assert np.array_equal(a.transformed, b.transformed)


def test_unknown_kind():
    """
    Test unknown kinds.
    """
    with pytest.raises(ParameterError):
        random_transform('hue', np.zeros(SHAPE), rng())


def test_chained_gradient():
    """
    Test the ensemble gradient through frozen transforms against finite
    differences of the summed loss.
    """
    shape = (8, 8, 3)
    model = build_extractor('cnn-a', input_shape=shape, embedding_dim=8, seed=2, dtype=np.float64)
    x = rng(8).uniform(0.2, 0.8, size=shape)
    reference = model.forward(rng(9).uniform(size=shape))
    M_p = box_mask(shape, (0.25, 0.625, 0.125, 0.875))
    r = rng(10)
    coeffs = np.stack([random_transform('nonlinear', x, r, patch_mask=M_p).coeff for _ in range(4)])

    embeddings = model.forward(coeffs * x)
    _, upstream = j_adv_batch(embeddings, reference, 'impersonation')
    analytic = np.sum(coeffs * model.input_gradient(coeffs * x, upstream), axis=0)

    def loss(z):
        return sum(j_adv(model.forward(c * z), reference, 'impersonation') for c in coeffs)

    idx = rng(11).choice(x.size, size=20, replace=False)
    numeric = numerical_gradient(loss, x, step=1e-7, indices=idx)
    a, n = analytic.reshape(-1)[idx], numeric.reshape(-1)[idx]
    assert np.linalg.norm(a - n) / np.linalg.norm(a + n) < 1e-3
