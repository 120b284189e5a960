import numpy as np
from contextlib import contextmanager
from numpy.lib.stride_tricks import sliding_window_view


_GRAD_ENABLED = True


@contextmanager
def no_grad():
    '''Run operations without recording a graph.
    '''
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


class Tensor:
    '''Real float64 array with reverse-mode differentiation.

    An operation on tensors records its inputs and a backward closure when at least one input requires a gradient.
    ``backward()`` on a scalar result accumulates gradients into the ``grad`` of every leaf that requires one.

    Parameters
    ----------
    data : array_like
    requires_grad : bool, default: False
        Set on parameters (leaves).
    '''
    __array_ufunc__ = None

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return self._backward is None

    def item(self):
        return float(self.data)

    def __float__(self):
        return self.item()

    def numpy(self):
        return self.data

    def __repr__(self):
        return "Tensor(shape={}, requires_grad={})".format(self.shape, self.requires_grad)

    def backward(self):
        '''Back-propagate from a scalar through the recorded graph.
        '''
        if self.data.size != 1:
            raise RuntimeError("[E] backward() needs a scalar, got shape {}.".format(self.shape))
        if not self.requires_grad or self.is_leaf:
            raise RuntimeError("[E] backward() on a tensor with no recorded graph.")

        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(_topological_order(self)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                g = np.array(g, dtype=np.float64).reshape(node.shape)
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                grads[id(parent)] = pg if id(parent) not in grads else grads[id(parent)] + pg

    # arithmetic

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def abs(self):
        return tabs(self)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)


def _topological_order(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward):
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(data)


def _unbroadcast(grad, shape):
    '''Sum ``grad`` down to ``shape`` after numpy broadcasting.
    '''
    grad = np.asarray(grad)
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# elementwise

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def neg(a):
    return _make(-a.data, (a,), lambda g: (-g,))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.data * b.data, (a, b), lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    return _make(out, (a, b), lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)))


def power(a, p):
    if not np.isscalar(p):
        raise TypeError("[E] Only scalar exponents are supported.")
    return _make(a.data ** p, (a,), lambda g: (g * p * a.data ** (p - 1),))


def tabs(a):
    return _make(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),))


def elu(a):
    '''Exponential linear unit ``x if x > 0 else exp(x) - 1``.
    '''
    positive = a.data > 0
    out = np.where(positive, a.data, np.expm1(np.minimum(a.data, 0.0)))
    return _make(out, (a,), lambda g: (g * np.where(positive, 1.0, out + 1.0),))


def hypot(a, b):
    '''Elementwise ``sqrt(a^2 + b^2)``; the gradient is taken as zero where both are zero.
    '''
    a, b = as_tensor(a), as_tensor(b)
    r = np.hypot(a.data, b.data)
    safe = np.where(r > 0, r, 1.0)

    def backward(g):
        scale = np.where(r > 0, g / safe, 0.0)
        return _unbroadcast(scale * a.data, a.shape), _unbroadcast(scale * b.data, b.shape)
    return _make(r, (a, b), backward)


# reductions and shapes

def tsum(a, axis=None, keepdims=False):
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)
    return _make(out, (a,), backward)


def mean(a, axis=None, keepdims=False):
    count = a.data.size if axis is None else int(np.prod([a.shape[i] for i in np.atleast_1d(axis)]))
    return tsum(a, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(a, shape):
    return _make(a.data.reshape(shape), (a,), lambda g: (np.reshape(g, a.shape),))


def swapaxes(a, i, j):
    return _make(np.swapaxes(a.data, i, j), (a,), lambda g: (np.swapaxes(g, i, j),))


def getitem(a, index):
    def backward(g):
        out = np.zeros_like(a.data)
        np.add.at(out, index, g)
        return (out,)
    return _make(a.data[index], (a,), backward)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, lambda g: tuple(np.split(g, sizes, axis=axis)))


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)
    return _make(np.matmul(a.data, b.data), (a, b), backward)


# convolution and resampling on (B, C, H, W)

def conv2d(x, w, b=None):
    '''Stride-1 2-D convolution with zero "same" padding.

    Parameters
    ----------
    x : Tensor
        ``(B, C, H, W)``.
    w : Tensor
        ``(O, C, kh, kw)`` with odd kernel sizes.
    b : Tensor, optional
        ``(O,)``.
    '''
    x, w = as_tensor(x), as_tensor(w)
    O, C, kh, kw = w.shape
    if x.shape[1] != C:
        raise ValueError("[E] conv2d: {} input channels, kernel expects {}.".format(x.shape[1], C))
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError("[E] conv2d: kernel sizes must be odd, got {}.".format((kh, kw)))
    ph, pw = kh // 2, kw // 2
    H, W = x.shape[2:]
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    out = np.einsum('bchwij,ocij->bohw', windows, w.data, optimize=True)
    parents = [x, w]
    if b is not None:
        b = as_tensor(b)
        out = out + b.data[None, :, None, None]
        parents.append(b)

    def backward(g):
        gw = np.einsum('bchwij,bohw->ocij', windows, g, optimize=True)
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + H, j:j + W] += np.einsum('bohw,oc->bchw', g, w.data[:, :, i, j], optimize=True)
        grads = [gxp[:, :, ph:ph + H, pw:pw + W], gw]
        if b is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return tuple(grads)
    return _make(out, parents, backward)


def avg_pool2(x):
    '''2x2 average pooling; H and W must be even.
    '''
    B, C, H, W = x.shape
    if H % 2 or W % 2:
        raise ValueError("[E] avg_pool2 needs even sizes, got {}.".format((H, W)))
    out = x.data.reshape(B, C, H // 2, 2, W // 2, 2).mean(axis=(3, 5))
    return _make(out, (x,), lambda g: (np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) / 4.0,))


def upsample2(x):
    '''Nearest-neighbour 2x upsampling.
    '''
    B, C, H, W = x.shape
    out = np.repeat(np.repeat(x.data, 2, axis=2), 2, axis=3)
    return _make(out, (x,), lambda g: (g.reshape(B, C, H, 2, W, 2).sum(axis=(3, 5)),))


class ComplexTensor:
    '''Complex values held as a pair of real tensors.

    Supports ``+``, ``-`` and ``*`` against other complex tensors, complex ndarrays and scalars.
    ``abs()`` gives the magnitude as a real ``Tensor``.
    '''
    __array_ufunc__ = None

    def __init__(self, real, imag):
        self.real = as_tensor(real)
        self.imag = as_tensor(imag)
        if self.real.shape != self.imag.shape:
            raise ValueError("[E] Real and imaginary parts differ in shape: {} vs {}.".format(self.real.shape, self.imag.shape))

    @classmethod
    def constant(cls, z):
        z = np.asarray(z)
        return cls(Tensor(np.real(z)), Tensor(np.imag(z)))

    @property
    def shape(self):
        return self.real.shape

    def numpy(self):
        return self.real.data + 1j * self.imag.data

    def __repr__(self):
        return "ComplexTensor(shape={})".format(self.shape)

    def __getitem__(self, index):
        return ComplexTensor(self.real[index], self.imag[index])

    def __add__(self, other):
        other = _lift(other)
        return ComplexTensor(self.real + other.real, self.imag + other.imag)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        return ComplexTensor(self.real - other.real, self.imag - other.imag)

    def __rsub__(self, other):
        return _lift(other) - self

    def __neg__(self):
        return ComplexTensor(-self.real, -self.imag)

    def __mul__(self, other):
        other = _lift(other)
        return ComplexTensor(self.real * other.real - self.imag * other.imag,
                             self.real * other.imag + self.imag * other.real)

    __rmul__ = __mul__

    def __abs__(self):
        return hypot(self.real, self.imag)


def _lift(x):
    return x if isinstance(x, ComplexTensor) else ComplexTensor.constant(x)
