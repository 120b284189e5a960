import os
from .BaseData import BaseData
from ..utils import read_wav


class SpeechFolderData(BaseData):
    '''A folder of dry 16 kHz mono WAV utterances, listed recursively in sorted order.

    Utterance ids are paths relative to ``root``.
    '''
    def read_data(self):
        if not os.path.isdir(self.root):
            raise ValueError("[E] Dry speech folder {} does not exist.".format(self.root))
        self.ids = []
        for folder, _, files in sorted(os.walk(self.root)):
            for name in sorted(files):
                if name.lower().endswith('.wav'):
                    self.ids.append(os.path.relpath(os.path.join(folder, name), self.root).replace(os.sep, '/'))
        if not self.ids:
            raise ValueError("[E] No WAV files under {}.".format(self.root))
        print("[I] Found {} utterances in {}".format(len(self.ids), os.path.abspath(self.root)))


    def utterances(self):
        '''List of ``(id, waveform)`` pairs.
        '''
        self.load()
        return [(uid, read_wav(self.path(uid), expect_mono=True)) for uid in self.ids]
