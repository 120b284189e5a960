import os
import json
import numpy as np
from .BaseData import BaseData
from ..generators.scenario import Scenario, MixtureExample
from ..utils import read_wav, write_wav, to_jsonable


REQUIRED_KEYS = ['example_id', 'scenario', 'mixture', 'targets', 'utterance_ids']


class MixtureData(BaseData):
    '''Examples listed in a JSONL manifest.

    Each line holds the example id, the full scenario (geometry, ``t60`` and seed), the utterance ids and the
    mixture/target WAV paths relative to the manifest folder. Nothing outside the manifest is read.

    Parameters
    ----------
    manifest : str
        Path to the ``.jsonl`` manifest.
    '''
    def __init__(self, manifest):
        self.manifest = manifest
        super().__init__(root=os.path.dirname(os.path.abspath(manifest)))


    def read_data(self):
        if not os.path.isfile(self.manifest):
            raise ValueError("[E] Manifest {} does not exist.".format(self.manifest))
        self.records = []
        with open(self.manifest, 'r', encoding='utf-8') as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ValueError("[E] Corrupt manifest {} at line {}: {}".format(self.manifest, line_no, e)) from e
                missing = [k for k in REQUIRED_KEYS if k not in rec]
                if missing:
                    raise ValueError("[E] Manifest {} line {} misses {}.".format(self.manifest, line_no, missing))
                self.records.append(rec)


    def __len__(self):
        self.load()
        return len(self.records)


    def __getitem__(self, i):
        return self.example(i)


    def __iter__(self):
        for i in range(len(self)):
            yield self.example(i)


    @property
    def n_speakers(self):
        '''The speaker count shared by every example; ``None`` for an empty manifest.
        '''
        self.load()
        counts = sorted({len(rec['scenario']['sources']) for rec in self.records})
        if len(counts) > 1:
            raise ValueError("[E] Manifest mixes speaker counts {}.".format(counts))
        return counts[0] if counts else None


    def scenario(self, i):
        self.load()
        return Scenario.from_dict(self.records[i]['scenario'])


    def example(self, i):
        '''Read example ``i`` from its WAV files.
        '''
        self.load()
        rec = self.records[i]
        scenario = Scenario.from_dict(rec['scenario'])
        mixture = read_wav(self.path(rec['mixture']))
        targets = read_wav(self.path(rec['targets']))
        if targets.shape[0] != scenario.n_speakers:
            raise ValueError("[E] Example {}: {} target channels for {} speakers.".format(rec['example_id'], targets.shape[0], scenario.n_speakers))
        if mixture.shape[0] != scenario.array.n_mics:
            raise ValueError("[E] Example {}: {} mixture channels for {} microphones.".format(rec['example_id'], mixture.shape[0], scenario.array.n_mics))
        if mixture.shape[1] != targets.shape[1]:
            raise ValueError("[E] Example {}: mixture and targets differ in length.".format(rec['example_id']))

        drr = tuple(np.inf if v is None else float(v) for v in rec.get('drr_db', []))
        return MixtureExample(mixture=mixture, targets=targets, scenario=scenario,
                              utterance_ids=tuple(rec['utterance_ids']), example_id=rec['example_id'], drr_db=drr)


def _finite_or_none(value):
    value = float(value)
    return value if np.isfinite(value) else None


def manifest_record(example, mixture_path, targets_path, config_hash=None, seed=None):
    '''The manifest line of one example, as a dict.
    '''
    scenario = example.scenario
    return to_jsonable({
        'example_id': example.example_id,
        'scenario': scenario.to_dict(),
        'utterance_ids': list(example.utterance_ids),
        'mixture': mixture_path,
        'targets': targets_path,
        'n_speakers': scenario.n_speakers,
        't60': scenario.room.t60,
        'min_gap': _finite_or_none(scenario.min_gap),
        'drr_db': [_finite_or_none(v) for v in example.drr_db],
        'config_hash': config_hash,
        'seed': seed,
    })


def write_manifest(examples, out_dir, name='manifest.jsonl', config_hash=None, seed=None, subtype='FLOAT'):
    '''Write the WAV files of ``examples`` under ``out_dir/wav`` and a JSONL manifest sorted by example id.

    Keys are sorted and no timestamps are written, so identical examples give byte-identical manifests.

    Returns
    -------
    path : str
        The manifest path.
    '''
    os.makedirs(out_dir, exist_ok=True)
    lines = []
    for example in sorted(examples, key=lambda e: e.example_id):
        mixture_path = "wav/{}_mixture.wav".format(example.example_id)
        targets_path = "wav/{}_targets.wav".format(example.example_id)
        write_wav(os.path.join(out_dir, mixture_path), example.mixture, subtype=subtype)
        write_wav(os.path.join(out_dir, targets_path), example.targets, subtype=subtype)
        lines.append(json.dumps(manifest_record(example, mixture_path, targets_path, config_hash, seed), sort_keys=True))

    path = os.path.join(out_dir, name)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(''.join(line + '\n' for line in lines))
    print("[I] Manifest saved as:", os.path.abspath(path))
    return path
