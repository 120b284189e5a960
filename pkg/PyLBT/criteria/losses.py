import numpy as np
from ..solvers.autograd import ComplexTensor
from ..utils.signal_utils import as_bins


def _operands(S_hat, S):
    a, b = as_bins(S_hat), as_bins(S)
    if a.shape != b.shape:
        raise ValueError("[E] Loss operands differ in shape: {} vs {}.".format(a.shape, b.shape))
    if isinstance(a, ComplexTensor) or isinstance(b, ComplexTensor):
        lift = lambda x: x if isinstance(x, ComplexTensor) else ComplexTensor.constant(x)
        return lift(a), lift(b), True
    return np.asarray(a), np.asarray(b), False


def loss_ri(S_hat, S):
    '''Mean absolute error over the real and imaginary spectrograms.

    ``mean|Re(S_hat - S)| + mean|Im(S_hat - S)|`` over all bins.

    Parameters
    ----------
    S_hat, S : complex ndarray, ComplexSpectrogram or ComplexTensor
        Equal shapes. With a ``ComplexTensor`` operand the result is a differentiable scalar ``Tensor``.

    Returns
    -------
    loss : float or Tensor
    '''
    a, b, graph = _operands(S_hat, S)
    d = a - b
    if graph:
        return d.real.abs().mean() + d.imag.abs().mean()
    return float(np.mean(np.abs(d.real)) + np.mean(np.abs(d.imag)))


def loss_ri_mag(S_hat, S):
    '''``loss_ri`` plus the mean absolute error between magnitudes.
    '''
    a, b, graph = _operands(S_hat, S)
    if graph:
        return loss_ri(a, b) + (abs(a) - abs(b)).abs().mean()
    return loss_ri(a, b) + float(np.mean(np.abs(np.abs(a) - np.abs(b))))


LOSSES = {'ri': loss_ri, 'ri+mag': loss_ri_mag}


def get_loss(name):
    if name not in LOSSES:
        raise ValueError("[E] Unknown loss: {}. Choose from {}.".format(name, list(LOSSES)))
    return LOSSES[name]
