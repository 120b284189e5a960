import os
import json
import numpy as np
from dataclasses import dataclass, asdict
from tqdm import tqdm
from .BaseModel import BaseModel
from .layers import Layer, Conv2d, DenseBlock, Down, Up
from ..solvers import Tensor, ComplexTensor, Adam, no_grad
from ..solvers.autograd import elu
from ..criteria import Criterion, assign, get_loss
from ..utils import StftConfig, stft, apply_cirm, record, get_config


CHECKPOINT_FORMAT = 'pylbt-checkpoint'
CHECKPOINT_VERSION = 1
INPUT_NORMS = ['reference-phase', 'utterance']


@dataclass(frozen=True)
class SeparatorConfig:
    '''Architecture of the Dense-UNet separator.

    .. note::

        n_speakers : int
            Outputs; the network predicts ``2 * n_speakers`` mask channels (real, imaginary).
        n_mics : int
            Input microphones; the network sees ``2 * n_mics`` channels.
        n_freqs : int
            One-sided frequency bins of the input.
        depth : int
            Down/up-sampling levels.
        n_blocks : int
            Dense blocks, odd, at most ``2 * depth + 1``; placed symmetrically around the bottleneck.
        n_convs : int
            Convolutions per dense block.
        channels : int
            Feature maps per convolution.
        input_norm : str in {'reference-phase', 'utterance'}
            'reference-phase' rotates every channel by the phase of microphone 0 before scaling by the
            utterance RMS of microphone 0; 'utterance' only scales.
    '''
    n_speakers: int = 2
    n_mics: int = 7
    n_freqs: int = 257
    depth: int = 2
    n_blocks: int = 3
    n_convs: int = 2
    channels: int = 8
    input_norm: str = 'reference-phase'

    def __post_init__(self):
        for name in ['n_speakers', 'n_mics', 'n_freqs', 'n_blocks', 'n_convs', 'channels']:
            if int(getattr(self, name)) < 1:
                raise ValueError("[E] {} must be positive, got {}.".format(name, getattr(self, name)))
        if self.depth < 0:
            raise ValueError("[E] depth must be non-negative, got {}.".format(self.depth))
        if self.n_blocks % 2 == 0 or self.n_blocks > 2 * self.depth + 1:
            raise ValueError("[E] n_blocks must be odd and at most 2 * depth + 1, got {}.".format(self.n_blocks))
        if self.input_norm not in INPUT_NORMS:
            raise ValueError("[E] input_norm must be one of {}, got {}.".format(INPUT_NORMS, self.input_norm))

    @classmethod
    def full_scale(cls, n_speakers=2, n_mics=7, n_freqs=257):
        '''Four levels, nine blocks of five 64-channel convolutions.
        '''
        return cls(n_speakers=n_speakers, n_mics=n_mics, n_freqs=n_freqs, depth=4, n_blocks=9, n_convs=5, channels=64)

    @property
    def in_channels(self):
        return 2 * self.n_mics

    @property
    def out_channels(self):
        return 2 * self.n_speakers

    @property
    def multiple(self):
        return 2 ** self.depth

    @property
    def padded_freqs(self):
        return -(-self.n_freqs // self.multiple) * self.multiple

    def block_levels(self):
        '''Encoder/decoder levels that carry a dense block; the bottleneck always does.
        '''
        return [level for level in range(self.depth) if level >= self.depth - (self.n_blocks - 1) // 2]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class _Network(Layer):
    def __init__(self, cfg, rng):
        C = cfg.channels
        blocks = cfg.block_levels()
        self.depth = cfg.depth
        self.has_block = [level in blocks for level in range(cfg.depth)]

        self.input = Conv2d(rng, cfg.in_channels, C)
        self.encoder = [DenseBlock(rng, C, cfg.n_convs, cfg.padded_freqs >> level) if self.has_block[level] else None
                        for level in range(cfg.depth)]
        self.down = [Down(rng, C) for _ in range(cfg.depth)]
        self.bottleneck = DenseBlock(rng, C, cfg.n_convs, cfg.padded_freqs >> cfg.depth)
        self.up = [Up(rng, C) for _ in range(cfg.depth)]
        self.decoder = [DenseBlock(rng, C, cfg.n_convs, cfg.padded_freqs >> level) if self.has_block[level] else None
                        for level in range(cfg.depth)]
        self.output = Conv2d(rng, C, cfg.out_channels, kernel=1, zero=True)

    def __call__(self, x):
        x = elu(self.input(x))
        skips = []
        for level in range(self.depth):
            if self.has_block[level]:
                x = self.encoder[level](x)
            skips.append(x)
            x = self.down[level](x)
        x = self.bottleneck(x)
        for level in reversed(range(self.depth)):
            x = self.up[level](x, skips[level])
            if self.has_block[level]:
                x = self.decoder[level](x)
        return self.output(x)


class DenseUNet(BaseModel):
    '''Multichannel complex spectral mapping separator.

    Stacked real and imaginary mixture spectrograms of all microphones go through a Dense-UNet that predicts one
    complex ratio mask per speaker; masks are applied to the reference-microphone spectrogram.

    Parameters
    ----------
    n_speakers : int, default: 2
    n_mics : int, default: 7
        1 gives the single-channel configuration.
    n_freqs : int, default: 257
    depth : int, default: 2
    n_blocks : int, default: 3
    n_convs : int, default: 2
    channels : int, default: 8
    input_norm : str in {'reference-phase', 'utterance'}, default: 'reference-phase'
    loss : str in {'ri', 'ri+mag'}, default: 'ri+mag'
    lr : float, default: 1e-3
    tol : float, optional
        Stop fitting once a step loss is at most ``tol``.
    seed : int, optional
    '''
    def __init__(self, n_speakers=2, n_mics=7, n_freqs=257, depth=2, n_blocks=3, n_convs=2, channels=8,
                 input_norm='reference-phase', loss='ri+mag', lr=1e-3, tol=None, seed=None, verbose=False):
        self.check_params(n_speakers=n_speakers, n_mics=n_mics, n_freqs=n_freqs, depth=depth, n_blocks=n_blocks,
                          n_convs=n_convs, channels=channels, input_norm=input_norm, loss=loss, lr=lr, tol=tol,
                          seed=seed, verbose=verbose)
        self._build()


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        assert self.loss in ['ri', 'ri+mag'], "[E] loss must be 'ri' or 'ri+mag'."
        assert self.input_norm in INPUT_NORMS, "[E] input_norm must be one of {}.".format(INPUT_NORMS)
        assert self.lr > 0, "[E] lr must be positive."


    @classmethod
    def from_config(cls, config, **kwargs):
        return cls(**config.to_dict(), **kwargs)


    @property
    def config(self):
        return SeparatorConfig(n_speakers=self.n_speakers, n_mics=self.n_mics, n_freqs=self.n_freqs, depth=self.depth,
                               n_blocks=self.n_blocks, n_convs=self.n_convs, channels=self.channels,
                               input_norm=self.input_norm)


    def _build(self):
        '''Draw the parameters from ``self.rng`` and reset the optimizer.
        '''
        fft_len = 2 * (self.n_freqs - 1)
        # mixtures can only be analysed when the bins come from a 4x-overlap STFT
        self.cfg = StftConfig(window_len=fft_len, hop=fft_len // 4, fft_len=fft_len) if fft_len % 4 == 0 and fft_len > 0 else None
        self.network = _Network(self.config, self.rng)
        self.params = self.network.parameters()
        self.optimizer = Adam(self.params, lr=self.lr)
        self.loss_fn = get_loss(self.loss)
        self.n_step = 0
        self.criterion = None
        self._init_logs()
        self.print_msg("parameters   : {}".format(sum(p.size for p in self.params.values())))


    def features(self, Y):
        '''Normalized network input ``(1, 2M, T, F)`` from ``M``-by-``T``-by-``F`` mixture spectrograms.

        Channels ``2m`` and ``2m + 1`` carry the real and imaginary parts of microphone ``m``.
        '''
        Y = np.asarray(Y)
        if Y.ndim != 3 or Y.shape[0] != self.n_mics or Y.shape[2] != self.n_freqs:
            raise ValueError("[E] Expected ({}, T, {}) spectrograms, got {}.".format(self.n_mics, self.n_freqs, Y.shape))
        rms = np.sqrt(np.mean(np.abs(Y[0]) ** 2))
        Z = Y / max(rms, 1e-8)
        if self.input_norm == 'reference-phase':
            Z = Z * np.exp(-1j * np.angle(Y[0]))[None]
        x = np.empty((1, 2 * self.n_mics) + Y.shape[1:])
        x[0, 0::2] = Z.real
        x[0, 1::2] = Z.imag
        return x


    def _pad(self, x):
        m = 2 ** self.depth
        T, F = x.shape[2:]
        pads = ((0, 0), (0, 0), (0, -T % m), (0, -F % m))
        mode = 'reflect' if min(T, F) > 1 else 'edge'
        return np.pad(x, pads, mode=mode)


    def forward(self, Y):
        '''Complex masks for every speaker.

        Parameters
        ----------
        Y : complex ndarray
            ``M``-by-``T``-by-``F`` mixture spectrograms.

        Returns
        -------
        masks : ComplexTensor
            ``N``-by-``T``-by-``F``; output channels ``2n`` and ``2n + 1`` are the real and imaginary parts of mask ``n``.
        '''
        x = self.features(Y)
        T, F = x.shape[2:]
        out = self.network(Tensor(self._pad(x)))
        out = out[0, :, :T, :F]
        return ComplexTensor(out[0::2], out[1::2])


    def separate(self, example):
        Y = self.mixture_spectrograms(example)
        with no_grad():
            masks = self.forward(Y).numpy()
        return np.stack([apply_cirm(m, Y[0]) for m in masks])


    def train_step(self, batch, criterion):
        '''One optimizer update on one example or a mini-batch.

        The objective of a mini-batch is the mean of the per-example objectives.

        Parameters
        ----------
        batch : MixtureExample or list of MixtureExample
        criterion : Criterion or str in {'pit', 'azimuth', 'distance'}

        Returns
        -------
        report : CriterionReport or list of CriterionReport
            Assignment, loss before the update and evaluation counters, one per example when a list is given.
        '''
        criterion = Criterion.parse(criterion)
        examples = list(batch) if isinstance(batch, (list, tuple)) else [batch]
        if len(examples) == 0:
            raise ValueError("[E] Empty batch.")
        for example in examples:
            self._check_example(example)

        self.optimizer.zero_grad()
        reports = []
        for example in examples:
            Y = self.mixture_spectrograms(example)
            targets = [stft(t, self.cfg).bins for t in example.targets]
            masks = self.forward(Y)
            S_hats = [apply_cirm(masks[n], Y[0]) for n in range(self.n_speakers)]
            report = assign(criterion, S_hats, targets, example.scenario, pairwise_loss=self.loss_fn)
            # gradients accumulate across the batch
            (report.objective * (1.0 / len(examples))).backward()
            reports.append(report)
        self.optimizer.step()
        self.n_step += 1
        self.criterion = criterion
        return reports if isinstance(batch, (list, tuple)) else reports[0]


    def fit(self, examples, criterion, n_steps=200, batch_size=1, shuffle=False, **kwargs):
        '''Train on ``examples`` for ``n_steps`` updates of ``batch_size`` examples each.

        Examples are visited in order, cycling; with ``shuffle`` each pass is permuted by ``self.rng``.
        Each step is recorded in ``self.logs['updates']``: the mean loss of the batch, the counters summed over
        the batch and the example ids joined by ``;``.
        '''
        assert batch_size >= 1, "[E] batch_size must be at least 1."
        super().fit(examples, criterion, n_steps=n_steps, batch_size=batch_size, shuffle=shuffle, **kwargs)

        self._fit(Criterion.parse(criterion))
        self.finish(show_logs=self.show_logs, save_model=self.save_model)


    def _fit(self, criterion):
        order = self._visit_order()
        pbar = tqdm(total=self.n_steps, position=0, disable=not self.verbose, desc="[I] loss: -")
        is_improving = self.n_steps > 0
        n, n_updates = 0, 0
        while is_improving:
            batch = []
            for _ in range(self.batch_size):
                batch.append(self.examples[order[n % len(order)]])
                n += 1
                if n % len(order) == 0:
                    order = self._visit_order()
            reports = self.train_step(batch, criterion)
            n_updates += 1
            loss = float(np.mean([r.total_loss for r in reports]))

            record(df_dict=self.logs, df_name='updates',
                   columns=['step', 'loss', 'criterion', 'permutations_scanned', 'pairwise_evals', 'example_id'],
                   records=[self.n_step, loss, criterion.value, sum(r.permutations_scanned for r in reports),
                            sum(r.pairwise_evals for r in reports), ';'.join(e.example_id for e in batch)])

            pbar.set_description(f"[I] loss: {loss:.6e}")
            pbar.update(1)
            is_improving = self.early_stop(loss=loss, n_step=n_updates, verbose=self.verbose)
        pbar.close()


    def _visit_order(self):
        order = np.arange(len(self.examples))
        if self.shuffle:
            self.rng.shuffle(order)
        return order


    def save_checkpoint(self, path, config_hash=None):
        '''Write an ``.npz`` checkpoint with a versioned JSON header, the parameters and the optimizer moments.

        ``config_hash`` identifies the experiment config the model was trained under.
        '''
        header = {
            'format': CHECKPOINT_FORMAT,
            'version': CHECKPOINT_VERSION,
            'config': self.config.to_dict(),
            'loss': self.loss,
            'step': self.n_step,
            'criterion': None if self.criterion is None else self.criterion.value,
            'seed': self.seed,
            'batch_size': getattr(self, 'batch_size', None),
            'config_hash': config_hash,
            'stft': None if self.cfg is None else self.cfg.to_dict(),
            'optimizer': {k: v for k, v in self.optimizer.state_dict().items() if '/' not in k},
        }
        arrays = {'param/' + k: p.data for k, p in self.params.items()}
        arrays.update({'adam/' + k: v for k, v in self.optimizer.state_dict().items() if '/' in k})

        folder = os.path.dirname(os.path.abspath(path))
        os.makedirs(folder, exist_ok=True)
        with open(path, 'wb') as f:
            np.savez(f, header=np.array(json.dumps(header, sort_keys=True)), **arrays)
        self.print_msg("model saved as: {}".format(path))
        return path


    def _save_model(self, path=None):
        folder = get_config(key="saved_models") if path is None else path
        folder = '.' if folder is None else folder
        return self.save_checkpoint(os.path.join(folder, self.name + '.npz'))


    @classmethod
    def load_checkpoint(cls, path, verbose=False):
        '''Rebuild a separator from a checkpoint written by ``save_checkpoint``.
        '''
        with np.load(path, allow_pickle=False) as data:
            if 'header' not in data:
                raise ValueError("[E] {} is not a checkpoint.".format(path))
            header = json.loads(str(data['header']))
            if header.get('format') != CHECKPOINT_FORMAT:
                raise ValueError("[E] {} is not a checkpoint.".format(path))
            if header.get('version') != CHECKPOINT_VERSION:
                raise ValueError("[E] Unsupported checkpoint version {}.".format(header.get('version')))

            config = SeparatorConfig.from_dict(header['config'])
            model = cls.from_config(config, loss=header['loss'], lr=header['optimizer']['lr'], seed=header['seed'], verbose=verbose)
            for name, p in model.params.items():
                if 'param/' + name not in data:
                    raise ValueError("[E] Checkpoint misses parameter {}.".format(name))
                value = data['param/' + name]
                if value.shape != p.shape:
                    raise ValueError("[E] Parameter {} has shape {}, expected {}.".format(name, value.shape, p.shape))
                p.data[...] = value
            state = dict(header['optimizer'])
            state.update({k[len('adam/'):]: data[k] for k in data.files if k.startswith('adam/')})
            model.optimizer.load_state_dict(state)
            model.n_step = int(header['step'])
            model.config_hash = header.get('config_hash')
            model.criterion = None if header.get('criterion') is None else Criterion.parse(header['criterion'])
        return model
