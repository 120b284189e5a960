import numpy as np
import time


class BaseGenerator:
    '''Base class of scene, speech and mixture generators.

    .. note::

        Attributes of ``BaseGenerator``.

        seed : int
            The seed the generator was configured with.
        rng : RandomState
            Generator state, advanced by every call to ``generate()``.
        verbose : bool
            Switch for progress messages.
    '''
    def __init__(self):
        raise NotImplementedError('This is a template class.')


    def check_params(self, **kwargs):
        '''Check and load generator parameters.

        Parameters
        ----------
        seed : int, optional
            Random seed. The current time is used when missing.
        verbose : bool, optional
            Switch for progress messages.
        '''
        self.set_params(**kwargs)
        self.set_config(**kwargs)


    def set_params(self, **kwargs):
        kwconfigs = ['seed', 'verbose']
        for param in kwargs:
            if param in kwconfigs:
                continue

            value = kwargs.get(param)
            setattr(self, param, value)

            # display
            if isinstance(value, list) and len(value) > 8:
                value = len(value)
            if kwargs.get('verbose', getattr(self, 'verbose', False)):
                print("[I] {:<12} : {}".format(param, value))


    def set_config(self, **kwargs):
        if "verbose" in kwargs:
            self.verbose = bool(kwargs.get("verbose"))
        elif not hasattr(self, 'verbose'):
            self.verbose = False

        if "seed" in kwargs:
            seed = kwargs.get("seed")
            # a missing seed keeps the current one, or falls back to the clock
            if seed is not None or not hasattr(self, 'seed'):
                self.seed = int(time.time()) if seed is None else int(seed)
                self.rng = np.random.RandomState(self.seed)
                self.print_msg("seed         : {}".format(self.seed))


    def generate(self, n):
        '''Generate ``n`` items.
        '''
        raise NotImplementedError("Missing generate method.")


    def print_msg(self, msg, type='I'):
        '''Print message when ``verbose`` is on.

        Parameters
        ----------
        msg : str
        type : str
            'I' for info, 'W' for warning, 'E' for error.
        '''
        if self.verbose:
            print("[{}] {}".format(type, msg))
