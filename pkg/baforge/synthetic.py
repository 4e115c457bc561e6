"""
Defines a procedural dataset of synthetic identities.

Each identity is a fixed pattern (a base colour, a grating and a few soft
blobs). Base colours of all identities sit close together, so the pattern
carries the identity rather than the overall tint. Its samples are that
pattern shifted by a few pixels, scaled by a brightness jitter and given a
little additive noise.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np
import matplotlib.pyplot as plt

from . import defaults
from .errors import ValidationError
from .formats import read_json
from .utils import substream

# Base colours of every identity fall in this narrow range.
BASE_COLOR = (0.4, 0.6)


class Identity(object):
    """
    The base pattern of one synthetic identity.

    Args:
        label (int): Integer label.
        seed (int): Master seed of the dataset.
    """
    n_blobs = 4

    def __init__(self, label, seed=0):
        self.label = int(label)
        self.seed = int(seed)

        rng = substream(seed, 'dataset', label, 0)
        self.base_color = rng.uniform(*BASE_COLOR, size=3)
        self.frequency = rng.uniform(1, 4)
        self.orientation = rng.uniform(0, np.pi)
        self.grating_color = rng.uniform(-0.25, 0.25, size=3)
        self.blob_centers = rng.uniform(0.2, 0.8, size=(self.n_blobs, 2))
        self.blob_radii = rng.uniform(0.08, 0.2, size=self.n_blobs)
        self.blob_colors = rng.uniform(-0.4, 0.4, size=(self.n_blobs, 3))

    def __repr__(self):
        return 'Identity(label={}, seed={})'.format(self.label, self.seed)

    def render(self, shape=defaults.IMAGE_SHAPE):
        """
        Draw the pattern.

        Args:
            shape (tuple): (H, W, C). C is 3, or 1 for grey.

        Returns:
            ndarray. Float32 image in [0, 1].
        """
        h, w, c = shape
        yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing='ij')

        phase = 2 * np.pi * self.frequency * (xx * np.cos(self.orientation) + yy * np.sin(self.orientation))
        image = self.base_color + np.sin(phase)[..., None] * self.grating_color
        for (cy, cx), r, colour in zip(self.blob_centers, self.blob_radii, self.blob_colors):
            blob = np.exp(-((yy - cy)**2 + (xx - cx)**2) / (2 * r**2))
            image = image + blob[..., None] * colour

        if c == 1:
            image = image.mean(axis=-1, keepdims=True)
        return np.clip(image, 0, 1).astype(np.float32)


class DatasetSpec(object):
    """
    Size and variation of a synthetic dataset.

    Args:
        n_identities (int): Number of identities.
        samples_per_identity (int): Images per identity.
        image_size (tuple): (H, W, C).
        max_shift (int): Largest shift in pixels, in each direction.
        noise_sigma (float): Standard deviation of additive Gaussian noise.
        brightness_jitter (tuple): Range of the per-sample brightness scale.
    """
    def __init__(self,
                 n_identities=defaults.DATASET['n_identities'],
                 samples_per_identity=defaults.DATASET['samples_per_identity'],
                 image_size=defaults.DATASET['image_size'],
                 max_shift=defaults.DATASET['max_shift'],
                 noise_sigma=defaults.DATASET['noise_sigma'],
                 brightness_jitter=defaults.DATASET['brightness_jitter']):
        self.n_identities = int(n_identities)
        self.samples_per_identity = int(samples_per_identity)
        self.image_size = tuple(int(i) for i in image_size)
        self.max_shift = int(max_shift)
        self.noise_sigma = float(noise_sigma)
        self.brightness_jitter = tuple(float(b) for b in brightness_jitter)

        if self.n_identities < 1 or self.samples_per_identity < 1:
            raise ValidationError("A dataset needs at least one identity and one sample per identity.")
        if len(self.image_size) != 3 or min(self.image_size) < 1 or self.image_size[-1] not in (1, 3):
            raise ValidationError("image_size must be [H, W, C] with C 1 or 3, got {}.".format(list(self.image_size)))
        if self.max_shift < 0 or self.noise_sigma < 0:
            raise ValidationError("max_shift and noise_sigma must be non-negative.")
        lo, hi = self.brightness_jitter
        if not 0 < lo <= hi:
            raise ValidationError("brightness_jitter must satisfy 0 < lo <= hi, got {}.".format(list(self.brightness_jitter)))

    def __repr__(self):
        return 'DatasetSpec({})'.format(', '.join('{}={}'.format(k, v) for k, v in self.to_dict().items()))

    def __eq__(self, other):
        return isinstance(other, DatasetSpec) and self.to_dict() == other.to_dict()

    def to_dict(self):
        return {
            'n_identities': self.n_identities,
            'samples_per_identity': self.samples_per_identity,
            'image_size': list(self.image_size),
            'max_shift': self.max_shift,
            'noise_sigma': self.noise_sigma,
            'brightness_jitter': list(self.brightness_jitter),
        }

    @classmethod
    def from_dict(cls, params):
        if not isinstance(params, dict):
            raise ValidationError("A dataset spec must be a JSON object.")
        unknown = set(params) - set(defaults.DATASET)
        if unknown:
            m = "Unknown dataset spec fields: {}. ".format(', '.join(sorted(unknown)))
            m += "Valid fields are {}.".format(', '.join(defaults.DATASET))
            raise ValidationError(m)
        try:
            return cls(**params)
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError("Bad dataset spec: {}".format(e))

    @classmethod
    def from_json(cls, source):
        return cls.from_dict(read_json(source))

    @classmethod
    def without_variation(cls, **kwargs):
        """
        A spec whose samples are exact copies of their identity's pattern.
        """
        params = dict(max_shift=0, noise_sigma=0.0, brightness_jitter=(1.0, 1.0))
        params.update(kwargs)
        return cls(**params)


class Dataset(object):
    """
    Labelled images.

    Args:
        images (ndarray): (N, H, W, C) float32 in [0, 1].
        labels (ndarray): (N,) integer identity labels.
        spec (DatasetSpec): How it was made, if known.
        seed (int): Seed it was made with, if known.
    """
    def __init__(self, images, labels, spec=None, seed=None):
        self.images = np.asarray(images, dtype=np.float32)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.spec = spec
        self.seed = seed
        if self.images.ndim != 4 or len(self.images) != len(self.labels):
            m = "Need (N, H, W, C) images and N labels, got {} and {}.".format(self.images.shape, self.labels.shape)
            raise ValidationError(m)

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return 'Dataset({} images, {} identities, shape={})'.format(
            len(self), self.n_identities, self.image_shape)

    @property
    def image_shape(self):
        return tuple(self.images.shape[1:])

    @property
    def identities(self):
        return np.unique(self.labels)

    @property
    def n_identities(self):
        return len(self.identities)

    def of(self, label):
        """
        All images of one identity.
        """
        return self.images[self.labels == label]

    def subset(self, idx):
        return Dataset(self.images[idx], self.labels[idx], spec=self.spec, seed=self.seed)

    def split(self, holdout=defaults.TRAINING['holdout']):
        """
        Split every identity's samples into train and held-out parts. The
        last `holdout` fraction of each identity (at least one sample, when
        it has two or more) is held out.

        Args:
            holdout (float): Fraction held out, in [0, 1).

        Returns:
            tuple. (train, test) Datasets.
        """
        if not 0 <= holdout < 1:
            raise ValidationError("holdout must be in [0, 1), got {}.".format(holdout))
        train, test = [], []
        for label in self.identities:
            idx = np.flatnonzero(self.labels == label)
            n = int(round(holdout * len(idx)))
            if holdout > 0 and len(idx) > 1:
                n = max(n, 1)
            n = min(n, len(idx) - 1)
            train.extend(idx[:len(idx) - n])
            test.extend(idx[len(idx) - n:])
        return self.subset(np.array(train, dtype=int)), self.subset(np.array(test, dtype=int))

    def plot(self, ax=None, per_identity=1, max_identities=8):
        """
        Show a grid of samples, one row per identity.

        Args:
            ax (ax): A matplotlib axis.
            per_identity (int): Samples per row.
            max_identities (int): Rows.

        Returns:
            ax. If you passed in an ax, otherwise the figure.
        """
        rows = []
        for label in self.identities[:max_identities]:
            images = self.of(label)[:per_identity]
            rows.append(np.concatenate(list(images), axis=1))
        mosaic = np.concatenate(rows, axis=0)
        if mosaic.shape[-1] == 1:
            mosaic = mosaic[..., 0]

        if ax is None:
            fig = plt.figure(figsize=(per_identity, min(self.n_identities, max_identities)))
            ax = fig.add_subplot(111)
            return_ax = False
        else:
            return_ax = True

        ax.imshow(mosaic, cmap='gray', vmin=0, vmax=1)
        ax.set_axis_off()

        if return_ax:
            return ax
        return fig


def generate_dataset(spec=None, seed=0):
    """
    Make a synthetic dataset.

    Args:
        spec (DatasetSpec): Size and variation. Default spec if None.
        seed (int): Master seed. The same seed gives the same dataset.

    Returns:
        Dataset.
    """
    spec = spec or DatasetSpec()
    h, w, _ = spec.image_size
    s = spec.max_shift

    images, labels = [], []
    for label in range(spec.n_identities):
        pattern = Identity(label, seed).render(spec.image_size)
        rng = substream(seed, 'dataset', label, 1)
        for _ in range(spec.samples_per_identity):
            dy, dx = rng.integers(-s, s + 1, size=2)
            scale = rng.uniform(*spec.brightness_jitter)
            noise = rng.normal(0, spec.noise_sigma, size=pattern.shape)
            image = scale * np.roll(pattern, (dy, dx), axis=(0, 1)) + noise
            images.append(np.clip(image, 0, 1).astype(np.float32))
            labels.append(label)

    return Dataset(np.stack(images), np.array(labels), spec=spec, seed=seed)
