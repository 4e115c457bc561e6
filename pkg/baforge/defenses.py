"""
Input pre-processing defenses.

A defense is applied to every probe before it reaches the extractor. Both
defenses here are pure and deterministic.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np
from scipy.ndimage import median_filter

from .errors import ParameterError


def median_blur(image, k):
    """
    Per-channel k x k median filter, with edge pixels replicated as padding.

    Args:
        image (ndarray): (H, W, C) or (N, H, W, C).
        k (int): Odd kernel size. 1 is the identity.

    Returns:
        ndarray.
    """
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ParameterError("Median kernel must be an odd integer >= 1, got {}.".format(k))
    image = np.asarray(image)
    k = int(k)
    if k == 1:
        return image.copy()
    size = (k, k, 1) if image.ndim == 3 else (1, k, k, 1)
    return median_filter(image, size=size, mode='nearest')


def bit_squeeze(image, bits):
    """
    Reduce colour depth to `bits` per channel.

    Values are rounded to the nearest level with `np.round`, so exact halves
    go to the even level: 0.5 squeezes to 0 at one bit.

    Args:
        image (ndarray): Values in [0, 1].
        bits (int): In [1, 8].

    Returns:
        ndarray.
    """
    if int(bits) != bits or not 1 <= bits <= 8:
        raise ParameterError("bits must be an integer in [1, 8], got {}.".format(bits))
    image = np.asarray(image)
    levels = 2 ** int(bits) - 1
    out = np.round(image * levels) / levels
    return out.astype(image.dtype) if image.dtype.kind == 'f' else out


DEFENSES = {
    'median_blur': median_blur,
    'bit_squeeze': bit_squeeze,
}


def parse_defense(text):
    """
    Parse a defense given as 'name:argument', e.g. 'median_blur:3'.

    Returns:
        tuple. (name, argument).
    """
    name, _, arg = str(text).partition(':')
    if name not in DEFENSES:
        m = "Unknown defense: {}. Valid names are {}.".format(name, ', '.join(sorted(DEFENSES)))
        raise ParameterError(m)
    try:
        arg = int(arg)
    except ValueError:
        raise ParameterError("Defense {} needs an integer argument, e.g. {}:3.".format(name, name))
    # Check the argument now rather than at first use.
    DEFENSES[name](np.zeros((1, 1, 1)), arg)
    return name, arg


def apply_defenses(image, defenses=None):
    """
    Apply defenses in order.

    Args:
        image (ndarray): Image or batch.
        defenses (list): (name, argument) tuples or 'name:argument' strings.

    Returns:
        ndarray.
    """
    for defense in defenses or []:
        name, arg = parse_defense(defense) if isinstance(defense, str) else defense
        image = DEFENSES[name](image, arg)
    return image


def describe(defenses):
    """
    A short label for a list of defenses, e.g. 'bit_squeeze:4+median_blur:3'.
    """
    items = [d if isinstance(d, str) else '{}:{}'.format(*d) for d in defenses or []]
    return '+'.join(items) or 'none'
