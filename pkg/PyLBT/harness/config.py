import json
from dataclasses import dataclass, field, fields, asdict, replace
from ..criteria import Criterion
from ..generators.scenario import ArrayGeometry
from ..generators.image_method import ABSORPTION_MODELS
from ..models.DenseUNet import SeparatorConfig
from ..utils import StftConfig, config_hash, split_seeds
from ..utils.evaluate_utils import SCORING
from ..utils.metrics import METRICS


ARRAYS = ['circular', 'linear', 'single']
SPLITS = ['train', 'test']

# desk-scale defaults; the published budget is not known
TOY_MODEL = {'depth': 2, 'n_blocks': 3, 'n_convs': 2, 'channels': 8, 'input_norm': 'reference-phase'}


@dataclass(frozen=True)
class ExperimentConfig:
    '''Everything an experiment run depends on.

    .. note::

        Dataset
            n_speakers, n_train, n_test, reverberant, azimuth_resolution, min_gap, max_gap, duration,
            absorption, array, dry_dir, seed.
        Model
            model : dict of ``SeparatorConfig`` fields other than the speaker, microphone and bin counts.
        Training
            criterion, n_steps, batch_size, lr, loss, shuffle.
        Evaluation
            scoring, metrics, threshold, gap_bins, grid_step, n_jobs.

    The config hash (``hash()``) is written into every output file.
    '''
    n_speakers: int = 2
    n_train: int = 200
    n_test: int = 50
    reverberant: bool = False
    azimuth_resolution: int = 5
    min_gap: float = None
    max_gap: float = None
    duration: float = 1.0
    absorption: str = 'sabine'
    array: str = 'circular'
    dry_dir: str = None
    seed: int = 1997

    model: dict = field(default_factory=lambda: dict(TOY_MODEL))

    criterion: str = 'azimuth'
    n_steps: int = 200
    batch_size: int = 8
    lr: float = 1e-3
    loss: str = 'ri+mag'
    shuffle: bool = True

    scoring: str = 'fixed'
    metrics: tuple = ('SI-SNR', 'SDR', 'ESTOI')
    threshold: float = 20.0
    gap_bins: tuple = (0.0, 20.0, 45.0, 90.0, 180.0)
    grid_step: float = 1.0
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'metrics', tuple(self.metrics))
        object.__setattr__(self, 'gap_bins', tuple(float(b) for b in self.gap_bins))
        object.__setattr__(self, 'model', dict(self.model))

        if not 1 <= self.n_speakers <= 5:
            raise ValueError("[E] n_speakers must be in [1, 5], got {}.".format(self.n_speakers))
        if self.n_train < 0 or self.n_test < 0:
            raise ValueError("[E] Example counts must be non-negative.")
        if self.azimuth_resolution not in [1, 5]:
            raise ValueError("[E] azimuth_resolution must be 1 or 5, got {}.".format(self.azimuth_resolution))
        if self.absorption not in ABSORPTION_MODELS:
            raise ValueError("[E] absorption must be one of {}, got {}.".format(ABSORPTION_MODELS, self.absorption))
        if self.array not in ARRAYS:
            raise ValueError("[E] array must be one of {}, got {}.".format(ARRAYS, self.array))
        if self.scoring not in SCORING:
            raise ValueError("[E] scoring must be one of {}, got {}.".format(SCORING, self.scoring))
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ValueError("[E] Unknown metrics {}.".format(unknown))
        if len(self.gap_bins) < 2 or any(a >= b for a, b in zip(self.gap_bins, self.gap_bins[1:])):
            raise ValueError("[E] gap_bins must be at least two increasing edges, got {}.".format(list(self.gap_bins)))
        if self.duration <= 0:
            raise ValueError("[E] duration must be positive.")
        if self.batch_size < 1:
            raise ValueError("[E] batch_size must be at least 1, got {}.".format(self.batch_size))
        Criterion.parse(self.criterion)
        unknown = [k for k in self.model if k not in TOY_MODEL]
        if unknown:
            raise ValueError("[E] Unknown model settings {}.".format(unknown))

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = sorted(k for k in d if k not in names)
        if unknown:
            raise ValueError("[E] Unknown config keys {}.".format(unknown))
        d = dict(d)
        if 'model' in d:
            d['model'] = {**TOY_MODEL, **d['model']}
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            try:
                d = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError("[E] Config {} is not valid JSON: {}".format(path, e)) from e
        return cls.from_dict(d)

    def to_dict(self):
        d = asdict(self)
        d['metrics'] = list(self.metrics)
        d['gap_bins'] = list(self.gap_bins)
        return d

    def to_json(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        return path

    def hash(self):
        return config_hash(self.to_dict())

    def override(self, **kwargs):
        '''Copy with the given settings replaced; ``None`` values are ignored.
        '''
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def make_array(self):
        if self.array == 'linear':
            return ArrayGeometry.linear()
        if self.array == 'single':
            return ArrayGeometry.single()
        return ArrayGeometry.circular()

    def split_seed(self, split):
        '''Seed of the ``train`` or ``test`` dataset, derived from ``seed``.
        '''
        if split not in SPLITS:
            raise ValueError("[E] split must be one of {}, got {}.".format(SPLITS, split))
        return split_seeds(self.seed, len(SPLITS))[SPLITS.index(split)]

    def n_examples(self, split):
        return self.n_train if split == 'train' else self.n_test

    def separator_config(self, n_mics=None):
        n_mics = self.make_array().n_mics if n_mics is None else n_mics
        return SeparatorConfig(n_speakers=self.n_speakers, n_mics=n_mics, n_freqs=StftConfig().n_freqs, **self.model)
