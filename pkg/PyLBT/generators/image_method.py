import numpy as np
from scipy.signal import fftconvolve
from ..utils import SAMPLE_RATE, ignore_warnings


SPEED_OF_SOUND = 343.0
SINC_TAPS = 81
# rendered responses lag every path by this many samples
RIR_LEAD = SINC_TAPS // 2
ABSORPTION_MODELS = ['sabine', 'eyring']


def reflection_coefficient(room, model='sabine'):
    '''Uniform wall reflection coefficient that yields the room's ``t60``.

    Parameters
    ----------
    room : Room
    model : str in {'sabine', 'eyring'}, default: 'sabine'
        Absorption from ``0.161 V / (T60 S)`` (Sabine) or ``1 - exp(-0.161 V / (T60 S))`` (Eyring).

    Returns
    -------
    beta : float in [0, 0.999]
    '''
    if model not in ABSORPTION_MODELS:
        raise ValueError("[E] Unknown absorption model: {}".format(model))
    if room.t60 == 0:
        return 0.0

    ratio = 0.161 * room.volume / (room.t60 * room.surface_area)
    alpha = ratio if model == 'sabine' else 1.0 - np.exp(-ratio)
    alpha = min(alpha, 1.0)
    return float(np.clip(np.sqrt(1.0 - alpha), 0.0, 0.999))


def n_taps(room, distance, fs=SAMPLE_RATE):
    '''RIR length covering the longest direct path plus ``t60`` and the whole interpolation kernel.
    '''
    return int(np.ceil(room.t60 * fs)) + int(np.ceil(fs * distance / SPEED_OF_SOUND)) + SINC_TAPS + 1


def _axis_images(s, L, bound):
    '''Image coordinates and wall-hit counts along one axis.

    Image ``(r, p)`` sits at ``(1 - 2p) s + 2 r L`` after ``|r - p| + |r|`` reflections.
    '''
    r = np.arange(-bound, bound + 2)
    r, p = np.repeat(r, 2), np.tile([0, 1], len(r))
    return (1 - 2 * p) * s + 2 * r * L, np.abs(r - p) + np.abs(r)


def _distance(src, mics):
    return np.sqrt(np.sum((np.atleast_2d(mics) - src[None, :]) ** 2, axis=-1))


def _render(rir, delays, gains):
    '''Add band-limited impulses at fractional ``delays`` (samples) into ``rir``.

    Each impulse is a Hann-windowed sinc of ``SINC_TAPS`` taps centered on ``delay + RIR_LEAD``, so its first tap
    sits at the delay itself. Taps past the end of ``rir`` are dropped.
    '''
    half = SINC_TAPS // 2
    k = np.arange(-half, half + 1)
    centers = delays + RIR_LEAD
    index = np.round(centers).astype(np.int64)[:, None] + k[None, :]
    t = index - centers[:, None]
    kernel = 0.5 * (1.0 + np.cos(2 * np.pi * t / SINC_TAPS)) * np.sinc(t)
    values = gains[:, None] * kernel

    valid = (index >= 0) & (index < len(rir))
    rir += np.bincount(index[valid], weights=values[valid], minlength=len(rir))
    return rir


def _check_points(room, src, mics):
    src = np.asarray(src, dtype=np.float64)
    mics = np.atleast_2d(np.asarray(mics, dtype=np.float64))
    if not room.contains(src):
        raise ValueError("[E] Source {} is outside the room {}.".format(src.tolist(), room.dims))
    for mic in mics:
        if not room.contains(mic):
            raise ValueError("[E] Microphone {} is outside the room {}.".format(mic.tolist(), room.dims))
        if np.linalg.norm(src - mic) < 1e-6:
            raise ValueError("[E] Source and microphone coincide at {}.".format(mic.tolist()))
    return src, mics


def simulate_rirs(room, src, mics, fs=SAMPLE_RATE, absorption='sabine', taps=None):
    '''Image-method RIRs from one source to several microphones.

    The image set is computed once and shared by all microphones. An anechoic room yields the direct path only.

    Parameters
    ----------
    room : Room
    src : 3-vector
        Source position in meters.
    mics : M-by-3 array
        Microphone positions in meters.
    fs : int, default: 16000
    absorption : str in {'sabine', 'eyring'}, default: 'sabine'
    taps : int, optional
        RIR length. Defaults to ``n_taps`` for the farthest microphone.

    Returns
    -------
    rirs : ndarray
        ``M``-by-``taps``.
    '''
    src, mics = _check_points(room, src, mics)
    distance = _distance(src, mics)
    taps = n_taps(room, distance.max(), fs) if taps is None else int(taps)
    rirs = np.zeros((len(mics), taps))

    if room.t60 == 0:
        for m in range(len(mics)):
            _render(rirs[m], np.array([fs * distance[m] / SPEED_OF_SOUND]), np.array([1.0 / (4 * np.pi * distance[m])]))
        return rirs

    beta = reflection_coefficient(room, absorption)
    max_dist = SPEED_OF_SOUND * (taps + SINC_TAPS) / fs
    dims = room.dims
    bounds = [int(np.ceil(max_dist / (2 * dims[i]))) + 1 for i in range(3)]
    (xs, xc), (ys, yc), (zs, zc) = [_axis_images(src[i], dims[i], bounds[i]) for i in range(3)]

    # y-z plane of images, shared by every x slice
    yz_y = np.repeat(ys, len(zs))
    yz_z = np.tile(zs, len(ys))
    yz_count = np.repeat(yc, len(zc)) + np.tile(zc, len(yc))

    for m, mic in enumerate(mics):
        dyz2 = (yz_y - mic[1]) ** 2 + (yz_z - mic[2]) ** 2
        for x, cx in zip(xs, xc):
            d = np.sqrt((x - mic[0]) ** 2 + dyz2)
            keep = d <= max_dist
            if not np.any(keep):
                continue
            d_k = d[keep]
            gains = beta ** (cx + yz_count[keep]) / (4 * np.pi * d_k)
            _render(rirs[m], fs * d_k / SPEED_OF_SOUND, gains)
    return rirs


def simulate_rir(room, src, mic, fs=SAMPLE_RATE, absorption='sabine', taps=None):
    '''Image-method RIR for a single source/microphone pair.
    '''
    return simulate_rirs(room, src, np.asarray(mic, dtype=np.float64)[None, :], fs=fs, absorption=absorption, taps=taps)[0]


def direct_rir(src, mic, taps=None, fs=SAMPLE_RATE):
    '''Direct-path (order-0 image) response.
    '''
    src = np.asarray(src, dtype=np.float64)
    mic = np.asarray(mic, dtype=np.float64)
    distance = _distance(src, mic)[0]
    if distance < 1e-6:
        raise ValueError("[E] Source and microphone coincide at {}.".format(mic.tolist()))
    if taps is None:
        taps = int(np.ceil(fs * distance / SPEED_OF_SOUND)) + SINC_TAPS + 1
    rir = np.zeros(int(taps))
    return _render(rir, np.array([fs * distance / SPEED_OF_SOUND]), np.array([1.0 / (4 * np.pi * distance)]))


@ignore_warnings
def energy_decay_curve(rir):
    '''Schroeder backward integration in dB, normalized to 0 dB at the start.
    '''
    edc = np.cumsum(rir[::-1] ** 2)[::-1]
    return 10 * np.log10(edc / edc[0])


def estimate_t60(rir, fs=SAMPLE_RATE, fit_range=(-5.0, -25.0)):
    '''Reverberation time from a linear fit to the energy decay curve.

    Parameters
    ----------
    rir : 1-D array
    fs : int, default: 16000
    fit_range : 2-tuple, default: (-5, -25)
        Decay levels in dB bounding the fit, extrapolated to -60 dB.

    Returns
    -------
    t60 : float
        Seconds.
    '''
    rir = np.asarray(rir, dtype=np.float64)
    if not np.any(rir):
        raise ValueError("[E] All-zero impulse response.")
    edc = energy_decay_curve(rir)
    upper, lower = fit_range
    start = int(np.argmax(edc <= upper))
    stop = int(np.argmax(edc <= lower))
    if stop <= start + 1:
        raise ValueError("[E] Energy decay does not reach {} dB.".format(lower))

    t = np.arange(start, stop) / fs
    slope, _ = np.polyfit(t, edc[start:stop], 1)
    return float(-60.0 / slope)


def direct_to_reverberant_ratio(rir, direct):
    '''DRR in dB: energy of the direct path over the energy of everything else.
    '''
    rir = np.asarray(rir, dtype=np.float64)
    direct = np.asarray(direct, dtype=np.float64)
    n = min(len(rir), len(direct))
    reverberant = rir.copy()
    reverberant[:n] -= direct[:n]
    tail = np.sum(reverberant ** 2)
    if tail <= 0:
        return np.inf
    return float(10 * np.log10(np.sum(direct ** 2) / tail))


def convolve(dry, rir, length):
    '''Convolve with a response rendered by this module and trim to ``length`` samples.

    The first ``RIR_LEAD`` output samples are dropped, which puts every path back at its physical delay.
    '''
    wet = fftconvolve(dry, rir)[RIR_LEAD:]
    if len(wet) >= length:
        return wet[:length]
    return np.concatenate([wet, np.zeros(length - len(wet))])
