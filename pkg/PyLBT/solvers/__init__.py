from .autograd import Tensor, ComplexTensor, no_grad, as_tensor
from .autograd import elu, hypot, concat, conv2d, avg_pool2, upsample2
from .adam import Adam

__all__ = ['Tensor', 'ComplexTensor', 'Adam']
