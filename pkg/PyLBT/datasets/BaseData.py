import os
from ..utils import get_config


class BaseData:
    '''Base class for file-backed datasets.

    .. note::

        Attributes of ``BaseData``.

        root : str
            Folder the data lives in. Falls back to the ``data`` entry of settings.ini.
        loaded : bool
            Whether ``read_data()`` has run.
    '''
    def __init__(self, root=None):
        self.root = get_config(key="data") if root is None else root
        if self.root is None:
            raise ValueError("[E] No data folder given and none in settings.ini.")
        self.loaded = False


    def load(self):
        '''Read the data once; later calls are no-ops.
        '''
        if not self.loaded:
            self.read_data()
            self.loaded = True
        return self


    def read_data(self):
        '''Read data.
        '''
        raise NotImplementedError("Missing read data method.")


    def path(self, relative):
        return os.path.join(self.root, relative)
