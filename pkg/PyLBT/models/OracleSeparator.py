import numpy as np
from .BaseModel import BaseModel
from ..utils import stft, ideal_cirm, apply_cirm


class OracleSeparator(BaseModel):
    '''Ideal-cIRM separator.

    Each output is the reference mixture spectrogram times the ideal complex mask of one target, in speaker order.
    It needs the targets of the example and is used as an upper bound and as an oracle mask source for localization.

    Parameters
    ----------
    clamp : float, default: 10.0
        Mask magnitude limit.
    '''
    def __init__(self, clamp=10.0, verbose=False):
        self.check_params(clamp=clamp, verbose=verbose)


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        assert self.clamp > 0, "[E] clamp must be positive."


    def fit(self, examples, criterion=None, **kwargs):
        self.print_msg("Oracle separator has nothing to fit.", type='W')


    def masks(self, example):
        '''Ideal complex masks, ``N``-by-``T``-by-``F``.
        '''
        Y_ref = self.mixture_spectrograms(example)[0]
        return np.stack([ideal_cirm(stft(t, self.stft_cfg).bins, Y_ref, clamp=self.clamp) for t in example.targets])


    def separate(self, example):
        Y_ref = self.mixture_spectrograms(example)[0]
        return np.stack([apply_cirm(M, Y_ref) for M in self.masks(example)])
