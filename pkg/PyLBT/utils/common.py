import numpy as np
import time
import json
import hashlib
import numbers


def get_rng(seed=None, rng=None, verbose=False):
    '''Get random number generator.

    Parameters
    ----------
    seed : int, RandomState, optional
        Random seed. A ``RandomState`` passed here is used as it is.
    rng : RandomState, optional
        Random number generator. Has priority over ``seed``.
    verbose : bool, default: False
        Print the seed in use.

    Returns
    -------
    rng : RandomState
    '''
    if isinstance(rng, np.random.RandomState):
        return rng
    if isinstance(seed, np.random.RandomState):
        return seed
    if not isinstance(seed, (numbers.Integral, np.integer)):
        seed = int(time.time())
    if verbose:
        print("[I] Using seed   :", seed)
    return np.random.RandomState(int(seed))


def split_seeds(rng, n):
    '''Draw ``n`` independent integer seeds from a generator.

    Each example, scenario or worker gets its own seed so that results do not depend on scheduling.
    '''
    rng = get_rng(rng)
    return [int(s) for s in rng.randint(0, 2**31 - 1, size=n)]


def config_hash(obj, length=12):
    '''SHA-1 of the canonical JSON form of ``obj``.

    Parameters
    ----------
    obj : dict or object with ``to_dict()``
    length : int, default: 12
        Number of hex characters kept.
    '''
    if hasattr(obj, 'to_dict'):
        obj = obj.to_dict()
    text = json.dumps(obj, sort_keys=True, separators=(',', ':'), default=_json_default)
    return hashlib.sha1(text.encode('utf-8')).hexdigest()[:length]


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError("[E] Not JSON serializable: {}".format(type(value)))


def to_jsonable(value):
    '''Convert numpy scalars, arrays and tuples into plain JSON types, recursively.
    '''
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if hasattr(value, 'value') and hasattr(value, 'name'): # Enum
        return value.value
    return value


def format_time(seconds):
    '''Format elapsed seconds as ``1h2m3s``.
    '''
    hours, seconds = divmod(seconds, 3600)
    minutes, seconds = divmod(seconds, 60)
    formatted = ""
    if hours > 0:
        formatted += f"{int(hours)}h"
    if minutes > 0:
        formatted += f"{int(minutes)}m"
    formatted += f"{int(seconds)}s"
    return formatted
