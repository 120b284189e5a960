import itertools
import numpy as np
from dataclasses import dataclass
from ..generators.image_method import SPEED_OF_SOUND
from ..criteria.assignment import circular_diff, min_azimuth_gap
from ..utils import SAMPLE_RATE, ComplexSpectrogram, as_bins


EPS = 1e-8
BAND = (100.0, 7800.0)


@dataclass(frozen=True, eq=False)
class SteeringTable:
    '''Far-field TDOAs of every microphone pair over a grid of candidate azimuths.

    .. note::

        grid : ndarray
            Candidate azimuths in degrees, ascending from -180.
        pairs : tuple of (p, q)
            All unordered microphone pairs, ``p < q``.
        delays : ndarray
            ``len(pairs)``-by-``len(grid)``, ``tau_pq(theta)`` in seconds.
        n_mics : int
    '''
    grid: np.ndarray
    pairs: tuple
    delays: np.ndarray
    n_mics: int

    @property
    def grid_step(self):
        return float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else 360.0

    def delay(self, p, q):
        '''``tau_pq`` over the grid; antisymmetric in ``(p, q)``.
        '''
        if p < q:
            return self.delays[self.pairs.index((p, q))]
        return -self.delays[self.pairs.index((q, p))]


@dataclass(frozen=True, eq=False)
class AzimuthEstimateSet:
    '''Per-speaker azimuth estimates and their score profiles.
    '''
    azimuths: tuple
    profiles: np.ndarray
    grid: np.ndarray

    @property
    def n_speakers(self):
        return len(self.azimuths)

    @property
    def grid_step(self):
        return float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else 360.0

    @property
    def min_gap(self):
        return min_azimuth_gap(self.azimuths)

    def to_dict(self, include_profiles=False):
        speakers = []
        for az, profile in zip(self.azimuths, self.profiles):
            entry = {'azimuth_deg': float(az)}
            if include_profiles:
                entry['score_profile'] = [float(v) for v in profile]
            speakers.append(entry)
        return {'grid_step': self.grid_step, 'speakers': speakers}


def build_steering_table(array, grid_step=1.0, c=SPEED_OF_SOUND):
    '''TDOA table ``tau_pq(theta) = u(theta) . (pos_p - pos_q) / c`` for horizontal unit vectors ``u``.

    Parameters
    ----------
    array : ArrayGeometry
    grid_step : float, default: 1.0
        Must divide 360.
    c : float, default: 343

    Returns
    -------
    table : SteeringTable
    '''
    if grid_step <= 0:
        raise ValueError("[E] grid_step must be positive, got {}.".format(grid_step))
    n_steps = 360.0 / grid_step
    if abs(n_steps - round(n_steps)) > 1e-9:
        raise ValueError("[E] grid_step must divide 360, got {}.".format(grid_step))
    grid = -180.0 + grid_step * np.arange(int(round(n_steps)))

    phi = np.deg2rad(grid)
    u = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=1)
    pos = array.mic_positions
    pairs = tuple(itertools.combinations(range(array.n_mics), 2))
    delays = np.array([u @ (pos[p] - pos[q]) / c for p, q in pairs]).reshape(len(pairs), len(grid))
    return SteeringTable(grid=grid, pairs=pairs, delays=delays, n_mics=array.n_mics)


def _channels(Y):
    if isinstance(Y, ComplexSpectrogram):
        Y = Y.bins
    if isinstance(Y, (list, tuple)):
        Y = np.stack([np.asarray(as_bins(y)) for y in Y])
    Y = np.asarray(Y)
    if Y.ndim != 3:
        raise ValueError("[E] Expected M-by-T-by-F spectrograms, got shape {}.".format(Y.shape))
    return Y


def ratio_mask(S_hat_k, Y_ref, eps=EPS):
    '''Speaker ratio mask ``|S|^2 / (|S|^2 + |Y - S|^2 + eps)`` in [0, 1].
    '''
    S = np.asarray(as_bins(S_hat_k))
    Y = np.asarray(as_bins(Y_ref))
    if S.shape != Y.shape:
        raise ValueError("[E] ratio_mask: shape mismatch {} vs {}.".format(S.shape, Y.shape))
    target = np.abs(S) ** 2
    residual = np.abs(Y - S) ** 2
    return target / (target + residual + eps)


def gcc_phat_score(Y, mask, table, fs=SAMPLE_RATE, band=BAND, eps=EPS):
    '''Mask-weighted GCC-PHAT score of every candidate azimuth.

    For each pair the phase-transformed cross spectrum is weighted by ``mask``, summed over frames, and steered with
    ``exp(-j 2 pi f tau_pq(theta))``; the real parts are summed over pairs and in-band frequencies.
    The PHAT denominator is ``|cross| + eps * max |cross|`` per pair, which keeps the profile unchanged when all
    channels are scaled by the same gain.

    Parameters
    ----------
    Y : M-by-T-by-F complex array or list of ComplexSpectrogram
    mask : T-by-F real array
    table : SteeringTable
    fs : int, default: 16000
    band : 2-tuple, default: (100, 7800)
        Frequencies in Hz included in the sum.

    Returns
    -------
    profile : ndarray
        One score per grid azimuth.
    '''
    Y = _channels(Y)
    mask = np.asarray(mask, dtype=np.float64)
    if Y.shape[0] != table.n_mics:
        raise ValueError("[E] {} channels for a {}-microphone steering table.".format(Y.shape[0], table.n_mics))
    if mask.shape != Y.shape[1:]:
        raise ValueError("[E] Mask shape {} does not match spectrograms {}.".format(mask.shape, Y.shape[1:]))

    freqs = np.linspace(0.0, fs / 2.0, Y.shape[2])
    in_band = (freqs >= band[0]) & (freqs <= band[1])
    f = freqs[in_band]
    Yb = Y[:, :, in_band]
    w = mask[:, in_band]

    profile = np.zeros(len(table.grid))
    for k, (p, q) in enumerate(table.pairs):
        cross = Yb[p] * np.conj(Yb[q])
        magnitude = np.abs(cross)
        # floor relative to the loudest bin of the pair
        phat = cross / (magnitude + eps * max(magnitude.max(), np.finfo(np.float64).tiny))
        weighted = np.sum(w * phat, axis=0)
        steer = np.exp(-2j * np.pi * np.outer(table.delays[k], f))
        profile += np.real(steer @ weighted)
    return profile


def estimate_azimuths(S_hats, Y, table, ref=0, fs=SAMPLE_RATE):
    '''Localize each separated speaker on the table's grid.

    Ties between grid points go to the smaller azimuth.

    Parameters
    ----------
    S_hats : list of N spectrograms
        Separated speakers at the reference microphone.
    Y : M-by-T-by-F complex array or list of ComplexSpectrogram
        Multichannel mixture.
    table : SteeringTable
    ref : int, default: 0
        Reference microphone.

    Returns
    -------
    estimates : AzimuthEstimateSet
    '''
    if len(S_hats) == 0:
        raise ValueError("[E] No separated speakers to localize.")
    Y = _channels(Y)
    profiles = np.stack([gcc_phat_score(Y, ratio_mask(S, Y[ref]), table, fs=fs) for S in S_hats])
    azimuths = tuple(float(table.grid[np.argmax(p)]) for p in profiles)
    return AzimuthEstimateSet(azimuths=azimuths, profiles=profiles, grid=table.grid)


def azimuth_errors(estimates, truth, match='fixed'):
    '''Circular errors in degrees between estimated and true azimuths.

    Parameters
    ----------
    estimates : AzimuthEstimateSet or sequence of float
    truth : sequence of float
    match : str in {'fixed', 'best'}, default: 'fixed'
        'fixed' compares in order; 'best' uses the pairing with the smallest total error.
    '''
    est = np.asarray(getattr(estimates, 'azimuths', estimates), dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if est.shape != truth.shape:
        raise ValueError("[E] {} estimates for {} true azimuths.".format(len(est), len(truth)))
    if match == 'fixed':
        return circular_diff(est, truth)
    if match != 'best':
        raise ValueError("[E] Unknown match: {}.".format(match))
    errors = [circular_diff(est, truth[list(perm)]) for perm in itertools.permutations(range(len(truth)))]
    return min(errors, key=lambda e: (np.sum(e), tuple(e)))
