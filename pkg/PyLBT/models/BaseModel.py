import numpy as np
from .BaseModelTools import BaseModelTools
from ..generators.scenario import MixtureExample
from ..utils import StftConfig, stft_multichannel, istft
from ..localization import build_steering_table, estimate_azimuths
from ..criteria import Criterion, speaker_order


class BaseModel(BaseModelTools):
    '''The base class for all the separators.

    A separator maps a multichannel mixture to ``N`` complex spectrograms at the reference microphone.
    '''
    def __init__(self, **kwargs):
        raise NotImplementedError('This is a template class.')


    def check_params(self, **kwargs):
        '''Check and load model parameters and experiment configurations.

        Called upon model initialization and fitting.

        .. code-block:: python

            # include this in your model class:

            def __init__(self, n_speakers, depth, lr):
                self.check_params(n_speakers=n_speakers, depth=depth, lr=lr)

            def fit(self, examples, criterion, **kwargs):
                self.check_params(**kwargs)

            # call them when initializing and fitting:

            model = MySeparator(n_speakers=2, depth=2, lr=1e-3, seed=1997)

            model.fit(examples, 'azimuth', n_steps=200, verbose=True)
        '''
        self.set_params(**kwargs)
        self.set_config(**kwargs)


    def fit(self, examples, criterion, **kwargs):
        '''Fit the model to training examples.

        For a fitting procedure, implement and append your ``_fit()`` and ``finish()``.

        Parameters
        ----------
        examples : list of MixtureExample
        criterion : Criterion or str
        **kwargs : dict
            Other parameters.
        '''
        self.check_params(**kwargs)
        self.load_dataset(examples)
        self.init_model()

        # attach these in your models:

        # self._fit(criterion)
        # self.finish(show_logs=self.show_logs, save_model=self.save_model)


    def init_model(self):
        '''Called after params are set and the dataset is loaded.
        '''
        self._init_logs()
        self._start_timer()
        self._make_name()


    def _fit(self, criterion):
        '''Where the fitting procedure takes place.
        '''
        raise NotImplementedError('This is a template method.')


    def finish(self, show_logs=False, save_model=False):
        '''Called when the fitting is over.
        '''
        self._stop_timer()
        if save_model:
            self._save_model()
            self._save_logs()
        if show_logs:
            self._show_logs()


    def _save_model(self, path=None):
        raise NotImplementedError("{} has no checkpoint format.".format(type(self).__name__))


    def load_dataset(self, examples):
        '''Check the training examples against the model.

        Parameters
        ----------
        examples : list of MixtureExample
        '''
        if examples is None or len(examples) == 0:
            raise TypeError("[E] Missing training examples.")
        for example in examples:
            if not isinstance(example, MixtureExample):
                raise TypeError("[E] Expected MixtureExample, got {}.".format(type(example).__name__))
            self._check_example(example)
        self.examples = list(examples)
        self.print_msg("examples     : {}".format(len(self.examples)))


    def _check_example(self, example):
        n_speakers = getattr(self, 'n_speakers', None)
        if n_speakers is not None and example.n_speakers != n_speakers:
            raise ValueError("[E] Example {} has {} speakers, the model separates {}.".format(example.example_id, example.n_speakers, n_speakers))
        n_mics = getattr(self, 'n_mics', None)
        if n_mics is not None and example.n_mics != n_mics:
            raise ValueError("[E] Example {} has {} channels, the model expects {}.".format(example.example_id, example.n_mics, n_mics))


    @property
    def stft_cfg(self):
        return getattr(self, 'cfg', None) or StftConfig()


    def mixture_spectrograms(self, example):
        '''``M``-by-``T``-by-``F`` STFT of the mixture.
        '''
        return stft_multichannel(example.mixture, self.stft_cfg)


    def separate(self, example):
        '''Separated spectrograms at the reference microphone.

        Returns
        -------
        S_hats : complex ndarray
            ``N``-by-``T``-by-``F``, in output order.
        '''
        raise NotImplementedError('This is a template method.')


    def estimate_waveforms(self, example):
        '''Separated waveforms, ``N``-by-``L``, in output order.
        '''
        S_hats = self.separate(example)
        return np.stack([istft(S, self.stft_cfg, out_len=example.length) for S in S_hats])


    def localize(self, example, grid_step=1.0, table=None):
        '''Mask-weighted GCC-PHAT azimuths of the separated outputs.

        Returns
        -------
        estimates : AzimuthEstimateSet
        '''
        table = build_steering_table(example.scenario.array, grid_step) if table is None else table
        return estimate_azimuths(list(self.separate(example)), self.mixture_spectrograms(example), table)


    def output_order(self, example):
        '''Speaker index behind each output, the pairing of fixed-order scoring.

        Separators trained with a location-based criterion emit the speakers in that criterion's order;
        the others follow the speaker order of the example.
        '''
        criterion = getattr(self, 'criterion', None)
        if criterion in [Criterion.AZIMUTH, Criterion.DISTANCE] and example.n_speakers > 1:
            return speaker_order(criterion, example.scenario)
        return tuple(range(example.n_speakers))
