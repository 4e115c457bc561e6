"""
Brightness transforms and the masks they use.

Every transform is multiplicative: it returns the transformed image along
with the coefficient map C such that transformed = C * input, element-wise.
Gradients therefore chain through a transform as C * upstream.

No transform clips to [0, 1]; only the attack update does.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np

from . import defaults
from .errors import ShapeError, ParameterError

KINDS = ('none', 'linear', 'nonlinear')


class BrightnessParams(object):
    """
    Parameters of the random brightness variables.

    Args:
        p (float): Probability that BT fires, in [0, 1].
        l (float): Lower bound of the uniform scale X_u.
        h (float): Upper bound of the uniform scale X_u.
        mu (float): Mean of the Gaussian global scale Y.
        sigma (float): Standard deviation of Y.
        area_frac_range (tuple): Fraction of the image area covered by the
            random brightness rectangle, (f_lo, f_hi).
    """
    def __init__(self, p=0.0, l=1.0, h=1.0,
                 mu=defaults.BRIGHTNESS['mu'],
                 sigma=defaults.BRIGHTNESS['sigma'],
                 area_frac_range=defaults.BRIGHTNESS['area_frac_range']):
        self.p = float(p)
        self.l = float(l)
        self.h = float(h)
        self.mu = float(mu)
        self.sigma = float(sigma)
        self.area_frac_range = tuple(float(f) for f in area_frac_range)

        if not 0 <= self.p <= 1:
            raise ParameterError("p must be in [0, 1], got {}.".format(self.p))
        if not 0 <= self.l <= self.h:
            raise ParameterError("Need 0 <= l <= h, got l={}, h={}.".format(self.l, self.h))
        if self.sigma < 0:
            raise ParameterError("sigma must be non-negative, got {}.".format(self.sigma))
        _check_fractions(self.area_frac_range)

    def __repr__(self):
        return 'BrightnessParams(p={}, l={}, h={}, mu={}, sigma={}, area_frac_range={})'.format(
            self.p, self.l, self.h, self.mu, self.sigma, self.area_frac_range)

    def __eq__(self, other):
        return isinstance(other, BrightnessParams) and self.__dict__ == other.__dict__

    def replace(self, **kwargs):
        """
        A copy with some fields changed.
        """
        params = dict(self.__dict__)
        params.update(kwargs)
        return BrightnessParams(**params)

    @classmethod
    def collapsed(cls):
        """
        Parameters under which every transform is the identity.
        """
        return cls(p=0.0, l=1.0, h=1.0, mu=1.0, sigma=0.0)

    @classmethod
    def evaluation(cls):
        """
        The fixed parameters used to score adversarial examples.
        """
        return cls(**defaults.EVAL_PARAMS)


class TransformSample(object):
    """
    The result of one transform draw.

    Args:
        transformed (ndarray): The transformed image.
        coeff (ndarray): Coefficient map, transformed = coeff * input.
        draws (dict): The realized random variables.
    """
    def __init__(self, transformed, coeff, draws=None):
        self.transformed = transformed
        self.coeff = coeff
        self.draws = draws or {}

    def __repr__(self):
        return 'TransformSample(shape={}, draws={})'.format(self.transformed.shape, self.draws)


def _check_fractions(frac_range):
    f_lo, f_hi = frac_range
    if not 0 < f_lo <= f_hi <= 1:
        m = "Area fractions must satisfy 0 < f_lo <= f_hi <= 1, got {}.".format(frac_range)
        raise ParameterError(m)


def _check_mask(mask, x, name):
    if np.shape(mask) != np.shape(x):
        m = "{} has shape {} but the image has shape {}.".format(name, np.shape(mask), np.shape(x))
        raise ShapeError(m)
    return np.asarray(mask, dtype=x.dtype)


def complement(m):
    """
    The complementary mask, 1 - m.
    """
    m = np.asarray(m)
    return (1 - m).astype(m.dtype)


def random_rect_mask(height, width, rng, area_frac_range=defaults.BRIGHTNESS['area_frac_range'],
                     channels=3, dtype=np.float32):
    """
    A mask that is 1 on a randomly placed axis-aligned rectangle.

    The rectangle covers a fraction of the image area drawn uniformly from
    `area_frac_range`, up to rounding of its side lengths, and is placed
    uniformly. The same rectangle is used on every channel.

    Args:
        height (int): Image height.
        width (int): Image width.
        rng (numpy.random.Generator): Source of randomness.
        area_frac_range (tuple): (f_lo, f_hi).
        channels (int): Number of channels.

    Returns:
        ndarray. (height, width, channels) mask of 0s and 1s.
    """
    if height < 1 or width < 1 or channels < 1:
        raise ShapeError("Mask dimensions must be positive, got {}.".format((height, width, channels)))
    _check_fractions(area_frac_range)

    frac = rng.uniform(*area_frac_range)
    area = frac * height * width
    rh = int(rng.integers(min(height, max(1, int(np.ceil(frac * height)))), height + 1))
    rw = int(np.clip(np.round(area / rh), 1, width))
    top = int(rng.integers(0, height - rh + 1))
    left = int(rng.integers(0, width - rw + 1))

    mask = np.zeros((height, width, channels), dtype=dtype)
    mask[top:top + rh, left:left + rw, :] = 1
    return mask


def rect_bounds(mask):
    """
    (top, bottom, left, right) of the 1-region of a rectangular mask,
    bottom and right exclusive.
    """
    rows = np.flatnonzero(np.any(mask, axis=(1, 2)))
    cols = np.flatnonzero(np.any(mask, axis=(0, 2)))
    if rows.size == 0:
        return (0, 0, 0, 0)
    return (int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1)


def identity(x):
    """
    The no-op transform.
    """
    x = np.asarray(x)
    coeff = np.ones_like(x)
    return TransformSample(coeff * x, coeff, {})


def bt(image, params, rng):
    """
    BT: with probability p, scale the whole image by X_u ~ U(l, h).

    Args:
        image (ndarray): The image.
        params (BrightnessParams): Uses p, l and h.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        TransformSample.
    """
    image = np.asarray(image)
    gate = rng.random() < params.p
    s = rng.uniform(params.l, params.h)
    scale = s if gate else 1.0
    coeff = np.full_like(image, scale)
    return TransformSample(coeff * image, coeff, {'gate': bool(gate), 's_bt': float(scale)})


def cnbt_patch(x, M_p, M_b, params, rng):
    """
    The composed non-linear brightness transform for patch attacks.

    A Gaussian global scale Y, BT applied to the patch region only, and a
    uniform scale on the brightness rectangle M_b:

        Y * (BT(x * M_p) + x * M_p') * (M_b * X_u + M_b')

    The scale of BT and the rectangle's X_u are independent draws from
    U(l, h).

    Args:
        x (ndarray): The adversarial image.
        M_p (ndarray): Patch mask.
        M_b (ndarray): Brightness rectangle mask.
        params (BrightnessParams): Transform parameters.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        TransformSample.
    """
    x = np.asarray(x)
    M_p = _check_mask(M_p, x, 'M_p')
    M_b = _check_mask(M_b, x, 'M_b')

    y = rng.normal(params.mu, params.sigma)
    gate = rng.random() < params.p
    s = rng.uniform(params.l, params.h)
    s_bt = s if gate else 1.0
    x_u = rng.uniform(params.l, params.h)

    coeff = y * (s_bt * M_p + complement(M_p)) * (x_u * M_b + complement(M_b))
    draws = {'y': float(y), 'gate': bool(gate), 's_bt': float(s_bt), 'x_u': float(x_u)}
    return TransformSample(coeff * x, coeff, draws)


def cnbt_imperceptible(x, M_b, params, rng):
    """
    The composed non-linear brightness transform for full-image noise.

    BT inside the brightness rectangle, identity outside, then a Gaussian
    global scale:

        Y * (BT(x * M_b) + x * M_b')

    Args:
        x (ndarray): The adversarial image.
        M_b (ndarray): Brightness rectangle mask.
        params (BrightnessParams): Transform parameters.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        TransformSample.
    """
    x = np.asarray(x)
    M_b = _check_mask(M_b, x, 'M_b')

    y = rng.normal(params.mu, params.sigma)
    gate = rng.random() < params.p
    s = rng.uniform(params.l, params.h)
    s_bt = s if gate else 1.0

    coeff = y * (s_bt * M_b + complement(M_b))
    draws = {'y': float(y), 'gate': bool(gate), 's_bt': float(s_bt)}
    return TransformSample(coeff * x, coeff, draws)


def linear_brightness(x, value_range, rng):
    """
    The linear baseline: scale the whole image by s ~ U(a, b), every call.

    Args:
        x (ndarray): The image.
        value_range (tuple): (a, b) with 0 <= a <= b.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        TransformSample.
    """
    a, b = value_range
    if not 0 <= a <= b:
        raise ParameterError("Need 0 <= a <= b, got {}.".format(value_range))
    x = np.asarray(x)
    s = rng.uniform(a, b)
    coeff = np.full_like(x, s)
    return TransformSample(coeff * x, coeff, {'s': float(s)})


def random_transform(kind, x, rng, params=None, patch_mask=None,
                     linear_range=defaults.LINEAR_RANGE):
    """
    Draw one transform of a given kind.

    Args:
        kind (str): 'none', 'linear' or 'nonlinear'.
        x (ndarray): The image.
        rng (numpy.random.Generator): Source of randomness.
        params (BrightnessParams): For 'nonlinear'. Evaluation parameters if
            None.
        patch_mask (ndarray): If given, 'nonlinear' uses the patch form of
            the transform, otherwise the imperceptible form.
        linear_range (tuple): For 'linear'.

    Returns:
        TransformSample.
    """
    if kind == 'none':
        return identity(x)
    if kind == 'linear':
        return linear_brightness(x, linear_range, rng)
    if kind == 'nonlinear':
        params = params or BrightnessParams.evaluation()
        h, w, c = np.shape(x)
        M_b = random_rect_mask(h, w, rng, params.area_frac_range, channels=c, dtype=np.asarray(x).dtype)
        if patch_mask is not None:
            sample = cnbt_patch(x, patch_mask, M_b, params, rng)
        else:
            sample = cnbt_imperceptible(x, M_b, params, rng)
        sample.draws['rect'] = rect_bounds(M_b)
        return sample

    m = "Unknown transform kind: {}. ".format(kind)
    m += "Kind must be one of {}.".format(', '.join(KINDS))
    raise ParameterError(m)
