import numpy as np
from ..solvers.autograd import Tensor, conv2d, elu, concat, avg_pool2, upsample2


def fan_in_uniform(rng, shape, fan_in):
    '''Uniform init in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``.
    '''
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    '''A callable holding parameter tensors and sub-layers.
    '''
    def parameters(self, prefix=''):
        '''Named parameters of this layer and its sub-layers, in a fixed order.
        '''
        params = {}
        for name, value in vars(self).items():
            key = prefix + name
            if isinstance(value, Tensor) and value.requires_grad:
                params[key] = value
            elif isinstance(value, Layer):
                params.update(value.parameters(key + '.'))
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Layer):
                        params.update(item.parameters("{}.{}.".format(key, i)))
        return params


class Conv2d(Layer):
    '''Stride-1 convolution with "same" padding.

    Parameters
    ----------
    rng : RandomState
    c_in, c_out : int
    kernel : int, default: 3
    zero : bool, default: False
        Zero-initialize weights and bias.
    '''
    def __init__(self, rng, c_in, c_out, kernel=3, zero=False):
        fan_in = c_in * kernel * kernel
        shape = (c_out, c_in, kernel, kernel)
        self.weight = Tensor(np.zeros(shape) if zero else fan_in_uniform(rng, shape, fan_in), requires_grad=True)
        self.bias = Tensor(np.zeros(c_out) if zero else fan_in_uniform(rng, c_out, fan_in), requires_grad=True)

    def __call__(self, x):
        return conv2d(x, self.weight, self.bias)


class FrequencyMapping(Layer):
    '''Learned ``F x F`` linear map along the frequency axis, shared by all channels and frames.

    ``y[..., g] = sum_f W[g, f] x[..., f]``. Initialized to the identity.
    '''
    def __init__(self, n_freqs):
        self.n_freqs = n_freqs
        self.weight = Tensor(np.eye(n_freqs), requires_grad=True)

    def __call__(self, x):
        if x.shape[-1] != self.n_freqs:
            raise ValueError("[E] Frequency mapping learned for {} bins, got {}.".format(self.n_freqs, x.shape[-1]))
        return x @ self.weight.swapaxes(0, 1)


def frequency_mapping_layer(x, mapping):
    '''Apply a ``FrequencyMapping`` followed by the block nonlinearity.
    '''
    return elu(mapping(x))


class DenseBlock(Layer):
    '''Densely-connected block: every convolution sees the block input and all earlier outputs.

    The middle layer is a 1x1 convolution followed by a frequency mapping; the others are 3x3 convolutions.
    Each layer ends with an ELU. The block returns the last layer's output.
    '''
    def __init__(self, rng, channels, n_convs, n_freqs):
        self.middle = n_convs // 2
        self.convs = []
        for i in range(n_convs):
            kernel = 1 if i == self.middle else 3
            self.convs.append(Conv2d(rng, channels * (i + 1), channels, kernel=kernel))
        self.mapping = FrequencyMapping(n_freqs)

    def __call__(self, x):
        outputs = [x]
        for i, conv in enumerate(self.convs):
            h = conv(concat(outputs, axis=1) if len(outputs) > 1 else x)
            h = frequency_mapping_layer(h, self.mapping) if i == self.middle else elu(h)
            outputs.append(h)
        return outputs[-1]


class Down(Layer):
    def __init__(self, rng, channels):
        self.conv = Conv2d(rng, channels, channels)

    def __call__(self, x):
        return elu(self.conv(avg_pool2(x)))


class Up(Layer):
    def __init__(self, rng, channels):
        self.conv = Conv2d(rng, 2 * channels, channels)

    def __call__(self, x, skip):
        return elu(self.conv(concat([upsample2(x), skip], axis=1)))
