# -*- coding: utf 8 -*-
"""
Define a suite a tests for the input defenses.
"""
import numpy as np
import pytest

from baforge.errors import ParameterError
from baforge.defenses import median_blur, bit_squeeze, parse_defense, apply_defenses, describe
from baforge.utils import quantize


def test_median_outlier():
    """
    Test a single bright pixel is removed by a 3 x 3 median.
    """
    image = np.zeros((5, 5, 3))
    image[2, 2] = 1.0
    assert np.all(median_blur(image, 3) == 0)


def test_median_identity(image):
    """
    Test k = 1 and constant images are unchanged.
    """
    assert np.array_equal(median_blur(image, 1), image)
    flat = np.full((6, 6, 3), 0.3)
    assert np.array_equal(median_blur(flat, 5), flat)


def test_median_batch(image):
    """
    Test batches are filtered image by image.
    """
    batch = np.stack([image, image[::-1]])
    out = median_blur(batch, 3)
    assert np.allclose(out[1], median_blur(image[::-1], 3))
    for k in (2, 0, 1.5):
        with pytest.raises(ParameterError):
            median_blur(image, k)


def test_bit_squeeze():
    """
    Test one bit rounds to black or white.
    """
    assert np.array_equal(bit_squeeze(np.array([0.4, 0.6]), 1), [0, 1])
    assert np.array_equal(bit_squeeze(np.array([0.5]), 1), [0])
    assert np.allclose(bit_squeeze(np.array([0.5]), 2), [2 / 3])
    x = np.array([0.1, 0.33, 0.72])
    once = bit_squeeze(x, 3)
    assert np.array_equal(bit_squeeze(once, 3), once)
    for bits in (0, 9):
        with pytest.raises(ParameterError):
            bit_squeeze(x, bits)


def test_eight_bits(image):
    """
    Test 8 bits leaves 8-bit images alone.
    """
    x = quantize(image.astype(np.float64))
    assert np.allclose(bit_squeeze(x, 8), x, atol=1e-12)


def test_parse():
    """
    Test parsing names and arguments.
    """
    assert parse_defense('median_blur:3') == ('median_blur', 3)
    for bad in ('median_blur:4', 'blur:3', 'bit_squeeze', 'bit_squeeze:x'):
        with pytest.raises(ParameterError):
            parse_defense(bad)


def test_apply(image):
    """
    Test defenses compose in order.
    """
    out = apply_defenses(image, ['bit_squeeze:1', ('median_blur', 3)])
    assert np.array_equal(out, median_blur(bit_squeeze(image, 1), 3))
    assert np.array_equal(apply_defenses(image), image)
    assert describe(None) == 'none'
    assert describe(['bit_squeeze:4', ('median_blur', 3)]) == 'bit_squeeze:4+median_blur:3'
