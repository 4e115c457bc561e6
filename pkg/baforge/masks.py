"""
Reference patch masks.

Two shapes ship with the package, both as files under `baforge/assets/masks`
and as builders that scale to any image size: an eyeglass band across the
eye row (about 12% of the image) and a square sticker on the forehead
(about 6%).

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import os

import numpy as np

from . import defaults
from .errors import ParameterError, ShapeError
from .formats import read_ppm

ASSETS = os.path.join(os.path.dirname(__file__), 'assets', 'masks')

BOXES = {
    'eyeglass': defaults.EYEGLASS_BOX,
    'sticker': defaults.STICKER_BOX,
}

MODE_MASKS = {
    'patch_eyeglass': 'eyeglass',
    'patch_sticker': 'sticker',
}


def box_mask(shape, box, dtype=np.float32):
    """
    A mask that is 1 inside a box given as fractions of the image size.

    Args:
        shape (tuple): (H, W, C).
        box (tuple): (top, bottom, left, right) as fractions in [0, 1].

    Returns:
        ndarray.
    """
    h, w, c = shape
    top, bottom, left, right = box
    mask = np.zeros((h, w, c), dtype=dtype)
    mask[int(round(top * h)):int(round(bottom * h)), int(round(left * w)):int(round(right * w)), :] = 1
    return mask


def reference_mask(name, shape=defaults.IMAGE_SHAPE):
    """
    One of the reference patch masks at a given image size.

    Args:
        name (str): 'eyeglass' or 'sticker'.
        shape (tuple): (H, W, C).

    Returns:
        ndarray.
    """
    if name not in BOXES:
        m = "Unknown mask: {}. Valid names are {}.".format(name, ', '.join(sorted(BOXES)))
        raise ParameterError(m)
    return box_mask(shape, BOXES[name])


def reference_mask_path(name):
    """
    Path of the shipped 64 x 64 file for a reference mask.
    """
    return os.path.join(ASSETS, '{}.ppm'.format(name))


def load_mask(path, shape=None):
    """
    Read a mask from an image file. Pixels brighter than half are in the mask.

    Args:
        path (str): A PPM file.
        shape (tuple): Optional (H, W, C) the mask must have.

    Returns:
        ndarray. Mask of 0s and 1s, replicated across channels.
    """
    image = read_ppm(path)
    mask = (image.mean(axis=-1, keepdims=True) > 0.5).astype(np.float32)
    mask = np.repeat(mask, image.shape[-1], axis=-1)
    if shape is not None and mask.shape != tuple(shape):
        m = "Mask {} has shape {}, expected {}.".format(path, mask.shape, tuple(shape))
        raise ShapeError(m)
    return mask


def mask_for_mode(mode, shape=defaults.IMAGE_SHAPE):
    """
    The patch mask for an attack mode, or None for imperceptible attacks.

    At the default image size the mask is read from the shipped file; other
    sizes scale the reference box.
    """
    if mode == 'imperceptible':
        return None
    if mode not in MODE_MASKS:
        m = "Unknown mode: {}. Mode must be one of {}.".format(mode, ', '.join(defaults.MODES))
        raise ParameterError(m)
    name = MODE_MASKS[mode]
    if tuple(shape) == tuple(defaults.IMAGE_SHAPE):
        return load_mask(reference_mask_path(name), shape=shape)
    return reference_mask(name, shape)
