import os
import re
import configparser
import pandas as pd


PATH_KEYS = ['data', 'cache', 'saved_models', 'saved_logs']


def get_config(key, path='settings.ini'):
    '''Get a path from the ``[PATHS]`` section of settings.ini.

    Parameters
    ----------
    key : str in {'data', 'cache', 'saved_models', 'saved_logs'}
        Key in settings.ini.
    path : str, default: 'settings.ini'
        Location of the settings file, relative to the working directory.

    Returns
    -------
    value : str or None
        None if the file or the key is missing.
    '''
    if not os.path.isfile(path):
        print("[W] No settings.ini found.")
        return None

    config = configparser.ConfigParser()
    config_path = os.path.abspath(path)
    config.read(config_path)
    if "PATHS" not in config or key not in config["PATHS"]:
        print("[W] No '{}' in [PATHS] of {}.".format(key, config_path))
        return None
    return config["PATHS"][key]


def _make_name(model=None, model_name=None, format="%Y-%m-%d %H-%M-%S-%f "):
    '''Make a file name for an instance of a model.

    Microseconds are part of the timestamp to keep names unique.

    Parameters
    ----------
    model : object
        Model object.
    model_name : str
        Name of the model.
    format : str
        Format of the timestamp.
    '''
    if model is None and model_name is None:
        raise ValueError("[E] In _make_name(), model and model_name cannot be both None.")

    if model_name is None:
        model_name = type(model).__name__
    model_name = re.sub(r'[^\w\-]', '_', model_name)

    return pd.Timestamp.now().strftime(format) + model_name


def save_csv(df, path, config_hash=None, seed=None):
    '''Write a dataframe to CSV, stamping the config hash and seed as leading columns.
    '''
    df = df.copy()
    if seed is not None:
        df.insert(0, 'seed', seed)
    if config_hash is not None:
        df.insert(0, 'config_hash', config_hash)

    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    df.to_csv(path, index=False)
    print("[I] CSV saved as:", os.path.abspath(path))
    return path
