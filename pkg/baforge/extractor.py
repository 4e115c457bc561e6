"""
Defines the differentiable feature extractors.

A FeatureExtractor maps an (H, W, C) image to a unit-norm embedding and
can pull an embedding-space gradient back to image space. Gradients are
chained by hand through the layers in `baforge.layers`.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np

from . import defaults
from .errors import ShapeError, ParameterError
from .layers import Conv2D, ReLU, GlobalAvgPool, Dense, L2Normalize, LAYERS
from .tensor import check_image
from .utils import as_batch, substream

# Layer plans: ('conv', filters, stride) or a parameter-free layer kind.
# The dense embedding layer and the normalization close every plan.
ARCHITECTURES = {
    'cnn-a': [('conv', 8, 2), 'relu', ('conv', 16, 2), 'relu', 'gap'],
    'cnn-b': [('conv', 8, 2), 'relu', ('conv', 8, 1), 'relu', ('conv', 16, 2), 'relu', 'gap'],
}


class FeatureExtractor(object):
    """
    A stack of layers ending in an L2 normalization.

    Treat instances as immutable: training and dtype changes return new
    extractors. That makes one extractor safe to share between threads.

    Args:
        layers (list): Layer objects, applied in order.
        input_shape (tuple): The (H, W, C) images this model accepts.
        name (str): Architecture name, e.g. 'cnn-a'.
    """
    def __init__(self, layers, input_shape, name='custom'):
        self.layers = list(layers)
        self.input_shape = tuple(int(i) for i in input_shape)
        self.name = name
        self.history = None

    def __repr__(self):
        return "FeatureExtractor('{}', input_shape={}, embedding_dim={}, {} parameters)".format(
            self.name, self.input_shape, self.embedding_dim, self.n_parameters)

    @property
    def params(self):
        """
        All parameter arrays in declaration order.
        """
        return [p for layer in self.layers for p in layer.params]

    @property
    def n_parameters(self):
        return int(sum(p.size for p in self.params))

    @property
    def dtype(self):
        params = self.params
        return params[0].dtype if params else np.dtype(np.float32)

    @property
    def embedding_dim(self):
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        return int(shape[-1])

    def descriptor(self):
        """
        The architecture as a JSON-friendly dict (no parameter values).
        """
        return {
            'name': self.name,
            'input_shape': list(self.input_shape),
            'embedding_dim': self.embedding_dim,
            'layers': [layer.descriptor() for layer in self.layers],
        }

    @classmethod
    def from_descriptor(cls, descriptor, params=None, dtype=np.float32):
        """
        Rebuild an extractor from `descriptor()` output and parameter arrays.

        Args:
            descriptor (dict): As produced by `descriptor()`.
            params (list): Arrays in declaration order. Zeros if None.
            dtype: Parameter dtype when params is None.

        Returns:
            FeatureExtractor.
        """
        layers = []
        for spec in descriptor['layers']:
            kind = spec['type']
            if kind not in LAYERS:
                raise ParameterError("Unknown layer type: {}.".format(kind))
            if kind == 'conv':
                shapes = Conv2D.shapes(spec['in_channels'], spec['filters'], spec['kernel'])
                layer = Conv2D(*[np.zeros(s, dtype=dtype) for s in shapes],
                               stride=spec['stride'], padding=spec['padding'])
            elif kind == 'dense':
                shapes = Dense.shapes(spec['in_features'], spec['units'])
                layer = Dense(*[np.zeros(s, dtype=dtype) for s in shapes])
            else:
                layer = LAYERS[kind]()
            layers.append(layer)

        extractor = cls(layers, descriptor['input_shape'], name=descriptor.get('name', 'custom'))
        if params is not None:
            extractor = extractor.with_params(params)
        return extractor

    def parameter_shapes(self):
        return [p.shape for p in self.params]

    def with_params(self, params):
        """
        A new extractor with the same architecture and the given parameters.

        Args:
            params (list): Arrays in declaration order.

        Returns:
            FeatureExtractor.
        """
        params = list(params)
        expected = self.parameter_shapes()
        if [tuple(np.shape(p)) for p in params] != [tuple(s) for s in expected]:
            m = "Parameter shapes {} do not match architecture {}.".format(
                [np.shape(p) for p in params], expected)
            raise ShapeError(m)

        layers, i = [], 0
        for layer in self.layers:
            n = len(layer.param_names)
            layers.append(layer.with_params(params[i:i + n]) if n else layer)
            i += n

        new = self.__class__(layers, self.input_shape, name=self.name)
        new.history = self.history
        return new

    def astype(self, dtype):
        """
        A copy computing in another float precision.
        """
        return self.with_params([p.astype(dtype) for p in self.params])

    def forward_with_cache(self, images):
        """
        Batch forward pass keeping what the backward pass needs.

        Args:
            images (ndarray): (N, H, W, C).

        Returns:
            tuple. (embeddings (N, D), caches).
        """
        check_image(images, self.input_shape)
        x = np.asarray(images, dtype=self.dtype)
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, upstream, caches):
        """
        Chain an embedding gradient back through every layer.

        Args:
            upstream (ndarray): (N, D) gradient with respect to the embeddings.
            caches (list): From `forward_with_cache`.

        Returns:
            tuple. (dx (N, H, W, C), parameter gradients in declaration order).
        """
        dx = np.asarray(upstream, dtype=self.dtype)
        grads = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            dx, g = layer.backward(dx, cache)
            grads = [g[name] for name in layer.param_names] + grads
        return dx, grads

    def forward(self, images):
        """
        Embed one image or a batch.

        Args:
            images (ndarray): (H, W, C) or (N, H, W, C).

        Returns:
            ndarray. (D,) or (N, D) unit-norm embeddings.
        """
        batch, single = as_batch(images)
        out, _ = self.forward_with_cache(batch)
        return out[0] if single else out

    def input_gradient(self, images, upstream):
        """
        Vector-Jacobian product of the embedding with respect to the pixels.

        Args:
            images (ndarray): (H, W, C) or (N, H, W, C).
            upstream (ndarray): (D,) or (N, D), the gradient of some scalar
                with respect to the embedding(s).

        Returns:
            ndarray. Shaped like `images`.
        """
        batch, single = as_batch(images)
        upstream = np.asarray(upstream)
        if single:
            upstream = upstream[None]
        if upstream.shape != (batch.shape[0], self.embedding_dim):
            m = "Upstream gradient of shape {} does not match ".format(upstream.shape[1:] if single else upstream.shape)
            m += "embedding dimension {}.".format(self.embedding_dim)
            raise ShapeError(m)

        _, caches = self.forward_with_cache(batch)
        dx, _ = self.backward(upstream, caches)
        return dx[0] if single else dx


def build_extractor(arch='cnn-a',
                    input_shape=defaults.IMAGE_SHAPE,
                    embedding_dim=defaults.EMBEDDING_DIM,
                    seed=0,
                    init='he',
                    dtype=np.float32):
    """
    Make a freshly initialized extractor.

    Args:
        arch (str): One of ARCHITECTURES.
        input_shape (tuple): (H, W, C).
        embedding_dim (int): D.
        seed (int): Initialization seed.
        init (str): 'he' for He-normal weights everywhere, or 'identity' to
            make the embedding layer a (rectangular) identity map.
        dtype: Parameter precision.

    Returns:
        FeatureExtractor.
    """
    if arch not in ARCHITECTURES:
        m = "Unknown architecture: {}. ".format(arch)
        m += "Valid names are {}.".format(', '.join(sorted(ARCHITECTURES)))
        raise ParameterError(m)

    rng = substream(seed, 'init-weights')
    channels = input_shape[-1]
    layers = []
    for step in ARCHITECTURES[arch]:
        if isinstance(step, tuple):
            _, filters, stride = step
            fan_in = channels * 9
            weight = rng.normal(0, np.sqrt(2 / fan_in), size=(filters, channels, 3, 3))
            layers.append(Conv2D(weight.astype(dtype), np.zeros(filters, dtype=dtype),
                                 stride=stride, padding=1))
            channels = filters
        else:
            layers.append(LAYERS[step]())

    if init == 'identity':
        weight = np.eye(channels, embedding_dim)
    else:
        weight = rng.normal(0, np.sqrt(2 / channels), size=(channels, embedding_dim))
    layers.append(Dense(weight.astype(dtype), np.zeros(embedding_dim, dtype=dtype)))
    layers.append(L2Normalize())

    return FeatureExtractor(layers, input_shape, name=arch)


def forward(extractor, image):
    """
    Embed an image with an extractor. See `FeatureExtractor.forward`.
    """
    return extractor.forward(image)


def input_gradient(extractor, image, upstream):
    """
    Pull an embedding gradient back to the image. See
    `FeatureExtractor.input_gradient`.
    """
    return extractor.input_gradient(image, upstream)
