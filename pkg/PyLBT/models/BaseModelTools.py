import os
import numpy as np
import pandas as pd
import time
from ..utils import _make_name, format_time, get_config, save_csv


class BaseModelTools():
    '''The helper class for ``BaseModel``.
    '''
    def __init__(self):
        raise NotImplementedError('This is a helper class.')


    def set_params(self, **kwargs):
        '''Model parameters.

        The parameter list shows the commonly used meanings of them.

        Model parameters
        ----------------
        n_speakers : int
            Number of separated outputs.
        n_mics : int
            Number of input channels (microphones).
        n_freqs : int
            Frequency bins of the input spectrograms.
        depth : int
            Down-sampling levels.
        n_blocks : int
            Densely-connected blocks, odd.
        n_convs : int
            Convolutions per block.
        channels : int
            Feature maps per convolution.
        lr : float
            The learning rate.
        loss : str in {'ri', 'ri+mag'}
            Pairwise loss.
        tol : float
            Training stops when the step loss falls below ``tol``.
        '''
        kwconfigs = ['seed', 'verbose', 'show_logs', 'save_model']
        for param in kwargs:
            if param in kwconfigs:
                continue

            value = kwargs.get(param)
            setattr(self, param, value)

            # display
            if isinstance(value, list):
                value = len(value)
            if isinstance(value, np.ndarray):
                value = value.shape
            if kwargs.get('verbose', getattr(self, 'verbose', False)):
                print("[I] {:<12} : {}".format(param, value))


    def set_config(self, **kwargs):
        '''Set system configurations.

        System configurations
        ---------------------
        seed : int
            Model seed. Parameter initialization and shuffling draw from ``self.rng``.
        verbose : bool, default: False
            Switch for verbosity.
        show_logs : bool, default: False
            Print the tail of every log when fitting is over.
        save_model : bool, default: False
            Save a checkpoint to the ``saved_models`` folder when fitting is over.
        '''
        self.verbose = getattr(self, 'verbose', False)
        if "verbose" in kwargs and bool(kwargs["verbose"]) != self.verbose:
            self.verbose = bool(kwargs["verbose"])
            self.print_msg("verbose      : {}".format(self.verbose))

        if "seed" in kwargs:
            seed = kwargs.get("seed")
            # a missing seed keeps the current one, or falls back to the clock
            if seed is not None or not hasattr(self, 'seed'):
                self.seed = int(time.time()) if seed is None else int(seed)
                self.rng = np.random.RandomState(self.seed)
                self.print_msg("seed         : {}".format(self.seed))

        self.show_logs = kwargs.get("show_logs", getattr(self, 'show_logs', False))
        self.save_model = kwargs.get("save_model", getattr(self, 'save_model', False))


    def _start_timer(self):
        '''Start timer.
        '''
        self.time = time.time()


    def _make_name(self):
        '''Make name.
        '''
        if not hasattr(self, 'name'):
            self.name = _make_name(model=self)
            self.print_msg("name         : {}".format(self.name))


    def _stop_timer(self):
        '''Stop timer.
        '''
        if not hasattr(self, 'time') or isinstance(self.time, str):
            print('[W] Timer not started.')
            return

        self.time = format_time(time.time() - self.time)
        self.print_msg("time elapsed : {}".format(self.time))


    def _show_logs(self, n_rows=5):
        '''Print the last rows of every dataframe in ``self.logs``.
        '''
        for name, log in self.logs.items():
            if isinstance(log, pd.DataFrame):
                print("[I] log '{}':".format(name))
                with pd.option_context('display.max_rows', None, 'display.max_columns', None):
                    print(log.tail(n_rows).to_string())


    def _save_logs(self, path=None):
        '''Write every dataframe in ``self.logs`` as ``<name>_<log>.csv``.

        Falls back to the ``saved_logs`` folder of settings.ini, then to the working directory.
        '''
        folder = get_config(key="saved_logs") if path is None else path
        folder = '.' if folder is None else folder
        for name, log in self.logs.items():
            if isinstance(log, pd.DataFrame):
                save_csv(log, os.path.join(folder, "{}_{}.csv".format(self.name, name)))


    def _init_logs(self):
        '''Initialize the logs.

        The ``logs`` is a ``dict`` that holds the records in one place, mostly ``DataFrame``.
        '''
        if not hasattr(self, 'logs'):
            self.logs = {}


    def early_stop(self, loss=None, n_step=None, msg=None, verbose=True):
        '''Stopping criteria detection and early stop.

        Parameters
        ----------
        loss : float
            Current loss. To be compared with ``self.tol``.
        n_step : int
            Current number of steps. To be compared with ``self.n_steps``.
        msg : str
            Forced stop with a message.

        Returns
        -------
        is_improving : bool
            Whether the fitting should continue or not.
        '''
        is_improving = True

        if loss is not None and getattr(self, 'tol', None) is not None and loss <= self.tol:
            self._early_stop(msg="Loss <= tolerance", verbose=verbose)
            is_improving = False
        if n_step is not None and getattr(self, 'n_steps', None) is not None and n_step >= self.n_steps:
            is_improving = False
        if loss is not None and not np.isfinite(loss):
            self._early_stop(msg="Non-finite loss", verbose=True)
            is_improving = False
        if msg is not None:
            self._early_stop(msg=msg, verbose=verbose)
            is_improving = False

        return is_improving


    def _early_stop(self, msg, verbose):
        if verbose:
            print("[W] Stopped in advance: " + msg)


    def print_msg(self, msg, type='I'):
        '''Print message.

        Parameters
        ----------
        msg : str
            The message to be printed.
        type : str
            The type of message, e.g. 'I' for info, 'W' for warning, 'E' for error.
        '''
        if self.verbose:
            print("[{}] {}".format(type, msg))
