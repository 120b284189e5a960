import numpy as np
import scipy.signal
from dataclasses import dataclass, field
from numpy.lib.stride_tricks import sliding_window_view


SAMPLE_RATE = 16000


@dataclass(frozen=True)
class StftConfig:
    '''STFT analysis/synthesis settings.

    Parameters
    ----------
    window_len : int, default: 512
        Frame length in samples (32 ms at 16 kHz).
    hop : int, default: 128
        Frame shift in samples (8 ms at 16 kHz). Must divide ``window_len``.
    fft_len : int, default: 512
        FFT size, at least ``window_len``.
    window : str in {'sqrt-hann', 'hann', 'rect'}, default: 'sqrt-hann'
        Window family, used for both analysis and synthesis.
    '''
    window_len: int = 512
    hop: int = 128
    fft_len: int = 512
    window: str = 'sqrt-hann'

    def __post_init__(self):
        if self.window_len <= 0 or self.hop <= 0:
            raise ValueError("[E] window_len and hop must be positive.")
        if self.hop > self.window_len:
            raise ValueError("[E] hop ({}) exceeds window_len ({}).".format(self.hop, self.window_len))
        if self.window_len % self.hop != 0:
            raise ValueError("[E] hop ({}) must divide window_len ({}).".format(self.hop, self.window_len))
        if self.fft_len < self.window_len:
            raise ValueError("[E] fft_len ({}) is shorter than window_len ({}).".format(self.fft_len, self.window_len))
        if self.window not in ['sqrt-hann', 'hann', 'rect']:
            raise ValueError("[E] Unknown window: {}".format(self.window))

    @property
    def n_freqs(self):
        return self.fft_len // 2 + 1

    @property
    def pad(self):
        '''Zeros prepended to the signal so that every sample is covered by ``window_len / hop`` frames.
        '''
        return self.window_len - self.hop

    def analysis_window(self):
        if self.window == 'sqrt-hann':
            return np.sqrt(scipy.signal.get_window('hann', self.window_len))
        if self.window == 'hann':
            return scipy.signal.get_window('hann', self.window_len)
        return np.ones(self.window_len)

    def to_dict(self):
        return {'window_len': self.window_len, 'hop': self.hop, 'fft_len': self.fft_len, 'window': self.window}


@dataclass(frozen=True, eq=False)
class ComplexSpectrogram:
    '''One-sided complex spectrogram of a single channel.

    .. note::

        bins : complex ndarray
            A ``T``-by-``F`` matrix, ``F = fft_len / 2 + 1``.
        cfg : StftConfig
            The configuration that produced ``bins``.
    '''
    bins: np.ndarray
    cfg: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self):
        bins = np.asarray(self.bins)
        if bins.ndim != 2:
            raise ValueError("[E] Spectrogram bins must be 2-D (frames x freqs), got shape {}.".format(bins.shape))
        if bins.shape[1] != self.cfg.n_freqs:
            raise ValueError("[E] Expected {} frequency bins, got {}.".format(self.cfg.n_freqs, bins.shape[1]))
        object.__setattr__(self, 'bins', bins.astype(np.complex128, copy=False))

    @property
    def shape(self):
        return self.bins.shape

    @property
    def n_frames(self):
        return self.bins.shape[0]

    @property
    def n_freqs(self):
        return self.bins.shape[1]

    @property
    def frame_hop(self):
        return self.cfg.hop

    @property
    def window_len(self):
        return self.cfg.window_len

    @property
    def fft_len(self):
        return self.cfg.fft_len

    def to_waveform(self, out_len=None):
        return istft(self, out_len=out_len)


def as_bins(S):
    '''Return the complex matrix behind a spectrogram, or the input itself.
    '''
    if isinstance(S, ComplexSpectrogram):
        return S.bins
    return S


def n_frames(length, cfg=None):
    '''Number of frames ``stft`` produces for a signal of ``length`` samples.
    '''
    cfg = StftConfig() if cfg is None else cfg
    if length <= 0:
        raise ValueError("[E] Empty input.")
    return (cfg.pad + length - 1) // cfg.hop + 1


def stft(x, cfg=None):
    '''Short-time Fourier transform of a mono waveform.

    The signal is zero-padded with ``cfg.pad`` samples in front and up to an integer number of frames at the tail.

    Parameters
    ----------
    x : 1-D array
        Waveform.
    cfg : StftConfig, optional

    Returns
    -------
    S : ComplexSpectrogram
    '''
    cfg = StftConfig() if cfg is None else cfg
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("[E] stft expects a 1-D waveform, got shape {}.".format(x.shape))
    if x.size == 0:
        raise ValueError("[E] Empty input.")
    if not np.all(np.isfinite(x)):
        raise ValueError("[E] Waveform contains non-finite values.")

    n = n_frames(len(x), cfg)
    padded = np.zeros((n - 1) * cfg.hop + cfg.window_len)
    padded[cfg.pad:cfg.pad + len(x)] = x

    frames = sliding_window_view(padded, cfg.window_len)[::cfg.hop] * cfg.analysis_window()
    bins = np.fft.rfft(frames, n=cfg.fft_len, axis=-1)
    return ComplexSpectrogram(bins=bins, cfg=cfg)


def stft_multichannel(x, cfg=None):
    '''STFT of every channel of an ``M``-by-``L`` waveform.

    Returns
    -------
    Y : complex ndarray
        ``M``-by-``T``-by-``F``.
    '''
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError("[E] Expected a (channels, samples) array, got shape {}.".format(x.shape))
    return np.stack([stft(channel, cfg).bins for channel in x])


def istft(S, cfg=None, out_len=None):
    '''Overlap-add synthesis normalized by the summed squared window.

    Parameters
    ----------
    S : ComplexSpectrogram or complex ndarray
    cfg : StftConfig, optional
        Taken from ``S`` when it is a ``ComplexSpectrogram``.
    out_len : int, optional
        Output length; the result is truncated or zero-padded to it.
    '''
    if isinstance(S, ComplexSpectrogram):
        cfg = S.cfg if cfg is None else cfg
    cfg = StftConfig() if cfg is None else cfg
    bins = np.asarray(as_bins(S))
    if bins.ndim != 2 or bins.shape[1] != cfg.n_freqs:
        raise ValueError("[E] Spectrogram shape {} does not match {} frequency bins.".format(bins.shape, cfg.n_freqs))

    n, hop, N = bins.shape[0], cfg.hop, cfg.window_len
    total = (n - 1) * hop + N
    win = cfg.analysis_window()

    frames = np.fft.irfft(bins, n=cfg.fft_len, axis=-1)[:, :N] * win
    index = (np.arange(n)[:, None] * hop + np.arange(N)[None, :]).ravel()
    y = np.bincount(index, weights=frames.ravel(), minlength=total)
    norm = np.bincount(index, weights=np.tile(win ** 2, n), minlength=total)

    covered = norm > 1e-10
    y[covered] /= norm[covered]
    y[~covered] = 0.0

    y = y[cfg.pad:]
    out_len = len(y) if out_len is None else int(out_len)
    if len(y) >= out_len:
        return y[:out_len].copy()
    return np.concatenate([y, np.zeros(out_len - len(y))])


def _check_shapes(A, B, what):
    if A.shape != B.shape:
        raise ValueError("[E] {}: shape mismatch {} vs {}.".format(what, A.shape, B.shape))


def apply_cirm(mask, Y_ref):
    '''Apply a complex mask to the reference mixture spectrogram, bin by bin.

    Works with complex ndarrays and with differentiable ``ComplexTensor`` masks.
    '''
    Y = as_bins(Y_ref)
    M = as_bins(mask)
    _check_shapes(M, Y, "apply_cirm")
    S_hat = M * Y
    if isinstance(Y_ref, ComplexSpectrogram) and isinstance(S_hat, np.ndarray):
        return ComplexSpectrogram(bins=S_hat, cfg=Y_ref.cfg)
    return S_hat


def ideal_cirm(S, Y_ref, eps=1e-8, clamp=10.0):
    '''Complex ideal ratio mask ``S / Y_ref``.

    The denominator is ``|Y|^2 + eps`` and the mask magnitude is clamped to ``clamp``, so ``apply_cirm`` gives back
    ``S`` up to a relative error of ``eps / (|Y|^2 + eps)`` on unclamped bins.

    Returns
    -------
    M : complex ndarray
    '''
    S, Y = np.asarray(as_bins(S)), np.asarray(as_bins(Y_ref))
    _check_shapes(S, Y, "ideal_cirm")
    M = S * np.conj(Y) / (np.abs(Y) ** 2 + eps)

    magnitude = np.abs(M)
    over = magnitude > clamp
    M[over] *= clamp / magnitude[over]
    return M
