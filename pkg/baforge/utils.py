"""
Utility functions for baforge.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import hashlib
import json
import zlib

import numpy as np


def substream(seed, name, *index):
    """
    Make an independent random generator from a master seed.

    Every consumer of randomness (dataset, init noise, ensemble draws,
    evaluation trials...) asks for its own named stream, so that adding
    draws in one place never shifts the samples seen in another.

    Args:
        seed (int): The master seed.
        name (str): The name of the stream, e.g. 'ensemble'.
        *index (int): Optional further keys, e.g. a run or cell index.

    Returns:
        numpy.random.Generator. A generator seeded from (seed, name, index).

    Example:
        >>> a = substream(42, 'ensemble', 3).random()
        >>> b = substream(42, 'ensemble', 3).random()
        >>> a == b
        True
    """
    key = [int(seed), zlib.crc32(name.encode('utf-8'))] + [int(i) for i in index]
    return np.random.default_rng(np.random.SeedSequence(key))


def sign(x):
    """
    Element-wise sign with sign(0) = 0.
    """
    return np.sign(x)


def quantize(x, levels=255):
    """
    Round an image in [0, 1] onto an integer grid, as happens when it is
    written to an 8-bit file and read back.

    Args:
        x (ndarray): Values in [0, 1].
        levels (int): Number of steps above zero. 255 for 8-bit.

    Returns:
        ndarray. Same dtype as x.
    """
    x = np.asarray(x)
    q = np.round(np.clip(x, 0, 1) * levels) / levels
    return q.astype(x.dtype if x.dtype.kind == 'f' else np.float32)


def config_hash(obj):
    """
    SHA-256 of the canonical JSON form of a config-like object.
    """
    text = json.dumps(obj, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def rel_error(x, y, floor=1e-8):
    """
    Largest element-wise relative error between two arrays.

    Args:
        x (ndarray): First array.
        y (ndarray): Second array, same shape.
        floor (float): Lower bound on the denominator.

    Returns:
        float.
    """
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    return float(np.max(np.abs(x - y) / np.maximum(floor, np.abs(x) + np.abs(y))))


def numerical_gradient(func, x, step=1e-3, indices=None):
    """
    Central finite-difference gradient of a scalar function.

    Evaluated in double precision; this is the oracle the analytic
    gradients are checked against.

    Args:
        func (callable): Maps an array shaped like x to a float.
        x (ndarray): The point to differentiate at. Not modified.
        step (float): The finite-difference step.
        indices (iterable): Optional flat indices to evaluate. All of them
            if None.

    Returns:
        ndarray. Shaped like x; entries not in `indices` are zero.
    """
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)

    if indices is None:
        indices = range(flat.size)

    for i in indices:
        old = flat[i]
        flat[i] = old + step
        plus = func(x)
        flat[i] = old - step
        minus = func(x)
        flat[i] = old
        gflat[i] = (plus - minus) / (2 * step)

    return grad


def as_batch(images):
    """
    View a single (H, W, C) image as a batch of one.

    Returns:
        tuple. The (N, H, W, C) array and whether the input was a single image.
    """
    images = np.asarray(images)
    if images.ndim == 3:
        return images[None], True
    return images, False


def derive_seed(seed, *index):
    """
    A new integer seed from a master seed and some keys, e.g. a run index.
    """
    key = [int(seed)] + [int(i) for i in index]
    return int(np.random.SeedSequence(key).generate_state(1)[0])
