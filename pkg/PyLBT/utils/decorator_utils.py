import time
import numpy as np
import warnings
import functools


def timeit(func):
    '''Print the wall time of each call.
    '''
    @functools.wraps(func)
    def inner(*args, **kwargs):
        ts = time.perf_counter()
        result = func(*args, **kwargs)
        te = time.perf_counter()
        print('[T] Function {} finished in {:2.4f} s.'.format(func.__name__, te-ts))
        return result

    return inner


def ignore_warnings(func):
    '''Silence numpy/scipy warnings raised inside ``func`` (log of zero, division on silent bins).
    '''
    @functools.wraps(func)
    def inner(*args, **kwargs):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            old_state = np.seterr(all='ignore')
            try:
                return func(*args, **kwargs)
            finally:
                np.seterr(**old_state)

    return inner

