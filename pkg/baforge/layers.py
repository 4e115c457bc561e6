"""
The fixed layer vocabulary of the feature extractors.

Every layer has a `forward(x)` returning `(out, cache)` and a
`backward(dout, cache)` returning `(dx, grads)`, where `grads` maps each
parameter name to its gradient. Activations are NHWC.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError


class Layer(object):
    """
    Base class. Parameter-free unless `param_names` says otherwise.
    """
    kind = None
    param_names = ()

    @property
    def params(self):
        return [getattr(self, name) for name in self.param_names]

    def with_params(self, params):
        """
        A copy of this layer holding the given parameter arrays.
        """
        new = object.__new__(self.__class__)
        new.__dict__.update(self.__dict__)
        for name, value in zip(self.param_names, params):
            setattr(new, name, value)
        return new

    def descriptor(self):
        return {'type': self.kind}

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def __repr__(self):
        args = ', '.join('{}={}'.format(k, v) for k, v in self.descriptor().items() if k != 'type')
        return '{}({})'.format(self.__class__.__name__, args)


class Conv2D(Layer):
    """
    Square convolution with zero padding and a stride.

    Args:
        weight (ndarray): (filters, in_channels, k, k).
        bias (ndarray): (filters,).
        stride (int): Step between windows.
        padding (int): Zero rows/columns added on every side.
    """
    kind = 'conv'
    param_names = ('weight', 'bias')

    def __init__(self, weight, bias, stride=1, padding=1):
        self.weight = weight
        self.bias = bias
        self.stride = int(stride)
        self.padding = int(padding)

    @classmethod
    def shapes(cls, in_channels, filters, kernel):
        return [(filters, in_channels, kernel, kernel), (filters,)]

    @property
    def kernel(self):
        return self.weight.shape[-1]

    def descriptor(self):
        f, c, k, _ = self.weight.shape
        return {'type': self.kind, 'in_channels': c, 'filters': f,
                'kernel': k, 'stride': self.stride, 'padding': self.padding}

    def output_shape(self, input_shape):
        h, w, _ = input_shape
        k, s, p = self.kernel, self.stride, self.padding
        return ((h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1, self.weight.shape[0])

    def forward(self, x):
        n, h, w, c = x.shape
        f, cw, k, _ = self.weight.shape
        if c != cw:
            m = "Convolution expects {} input channels, got {}.".format(cw, c)
            raise ShapeError(m)
        s, p = self.stride, self.padding

        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
        windows = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::s, ::s]
        ho, wo = windows.shape[1], windows.shape[2]
        cols = windows.reshape(n * ho * wo, c * k * k)

        out = cols @ self.weight.reshape(f, -1).T + self.bias
        return out.reshape(n, ho, wo, f), (x.shape, cols)

    def backward(self, dout, cache):
        (n, h, w, c), cols = cache
        f, _, k, _ = self.weight.shape
        s, p = self.stride, self.padding
        ho, wo = dout.shape[1], dout.shape[2]

        dflat = dout.reshape(-1, f)
        grads = {
            'weight': (dflat.T @ cols).reshape(self.weight.shape),
            'bias': dflat.sum(axis=0),
        }

        dcols = (dflat @ self.weight.reshape(f, -1)).reshape(n, ho, wo, c, k, k)
        dxp = np.zeros((n, h + 2 * p, w + 2 * p, c), dtype=dout.dtype)
        for i in range(k):
            for j in range(k):
                dxp[:, i:i + s * ho:s, j:j + s * wo:s, :] += dcols[..., i, j]

        return dxp[:, p:p + h, p:p + w, :], grads


class ReLU(Layer):
    kind = 'relu'

    def forward(self, x):
        mask = x > 0
        return x * mask, mask

    def backward(self, dout, cache):
        return dout * cache, {}


class GlobalAvgPool(Layer):
    """
    Mean over the spatial axes: (N, H, W, C) -> (N, C).
    """
    kind = 'gap'

    def output_shape(self, input_shape):
        return (input_shape[-1],)

    def forward(self, x):
        return x.mean(axis=(1, 2)), x.shape

    def backward(self, dout, cache):
        n, h, w, c = cache
        dx = np.broadcast_to(dout[:, None, None, :] / (h * w), cache)
        return np.array(dx), {}


class Dense(Layer):
    """
    Fully connected layer, y = x W + b.

    Args:
        weight (ndarray): (in_features, out_features).
        bias (ndarray): (out_features,).
    """
    kind = 'dense'
    param_names = ('weight', 'bias')

    def __init__(self, weight, bias):
        self.weight = weight
        self.bias = bias

    @classmethod
    def shapes(cls, in_features, units):
        return [(in_features, units), (units,)]

    def descriptor(self):
        i, o = self.weight.shape
        return {'type': self.kind, 'in_features': i, 'units': o}

    def output_shape(self, input_shape):
        return (self.weight.shape[1],)

    def forward(self, x):
        if x.shape[-1] != self.weight.shape[0]:
            m = "Dense layer expects {} features, got {}.".format(self.weight.shape[0], x.shape[-1])
            raise ShapeError(m)
        return x @ self.weight + self.bias, x

    def backward(self, dout, cache):
        grads = {'weight': cache.T @ dout, 'bias': dout.sum(axis=0)}
        return dout @ self.weight.T, grads


class L2Normalize(Layer):
    """
    Scale each row to unit Euclidean length. A row of zeros maps to the
    first basis vector, with zero gradient.
    """
    kind = 'l2norm'
    eps = 1e-12

    def forward(self, x):
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        zero = norm <= self.eps
        basis = np.zeros(x.shape[-1], dtype=x.dtype)
        basis[0] = 1
        y = np.where(zero, basis, x / np.where(zero, 1, norm))
        return y, (y, norm, zero)

    def backward(self, dout, cache):
        y, norm, zero = cache
        dx = (dout - y * np.sum(y * dout, axis=-1, keepdims=True)) / np.where(zero, 1, norm)
        return np.where(zero, 0, dx), {}


LAYERS = {cls.kind: cls for cls in (Conv2D, ReLU, GlobalAvgPool, Dense, L2Normalize)}
