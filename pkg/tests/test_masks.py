# -*- coding: utf 8 -*-
"""
Define a suite a tests for the patch masks.
"""
import numpy as np
import pytest

from baforge import masks
from baforge.errors import ParameterError, ShapeError
from baforge.formats import write_ppm
from baforge.masks import (box_mask, reference_mask, reference_mask_path, load_mask,
                           mask_for_mode)


@pytest.mark.parametrize('name, area', [('eyeglass', 0.12), ('sticker', 0.06)])
def test_shipped_masks(name, area):
    """
    Test the shipped files match the builders and have the expected size.
    """
    mask = load_mask(reference_mask_path(name), shape=(64, 64, 3))
    assert np.array_equal(mask, reference_mask(name))
    assert abs(mask.mean() - area) < 0.01


def test_box_mask():
    """
    Test a box mask.
    """
    mask = box_mask((8, 8, 3), (0.25, 0.5, 0.0, 1.0))
    assert mask.sum() == 2 * 8 * 3
    assert np.all(mask[2:4] == 1)


def test_load_mask(tmp_path):
    """
    Test thresholding and shape checks when loading.
    """
    image = np.zeros((4, 4, 3))
    image[1:3, 1:3] = 0.8
    path = str(tmp_path / 'mask.ppm')
    write_ppm(path, image)
    mask = load_mask(path)
    assert mask.sum() == 4 * 3
    with pytest.raises(ShapeError):
        load_mask(path, shape=(8, 8, 3))


def test_mask_for_mode():
    """
    Test modes map to masks.
    """
    assert mask_for_mode('imperceptible') is None
    assert np.array_equal(mask_for_mode('patch_sticker', (64, 64, 3)), reference_mask('sticker'))
    with pytest.raises(ParameterError):
        mask_for_mode('patch_hat')
    with pytest.raises(ParameterError):
        reference_mask('hat')


def test_mask_for_mode_reads_file(tmp_path, monkeypatch):
    """
    Test the default-size mask comes from the mask file.
    """
    custom = np.zeros((64, 64, 3))
    custom[:8, :8] = 1
    write_ppm(str(tmp_path / 'eyeglass.ppm'), custom)
    monkeypatch.setattr(masks, 'ASSETS', str(tmp_path))
    assert np.array_equal(mask_for_mode('patch_eyeglass'), custom)
    assert np.array_equal(mask_for_mode('patch_eyeglass', (32, 32, 3)), reference_mask('eyeglass', (32, 32, 3)))
