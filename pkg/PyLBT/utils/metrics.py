import warnings
import numpy as np
import pystoi
from scipy import signal
from scipy.linalg import solve_toeplitz
from .signal_utils import SAMPLE_RATE


CLAMP_DB = 60.0
METRICS = ['SI-SNR', 'SDR', 'ESTOI']


def get_metrics(est, ref, metrics, filter_len=512):
    '''Get results of the metrics all at once.

    Parameters
    ----------
    est : 1-D array
        Estimated waveform.
    ref : 1-D array
        Reference waveform.
    metrics : list of str
        Names in {'SI-SNR', 'SDR', 'ESTOI'}.
    filter_len : int, default: 512
        Projection filter length for SDR.

    Returns
    -------
    results : list of float
    '''
    functions = {
        'SI-SNR': si_snr,
        'SDR': lambda e, r: sdr(e, r, filter_len=filter_len),
        'ESTOI': estoi,
    }
    results = []
    for m in metrics:
        if m not in functions:
            raise ValueError("[E] Unknown metric: {}".format(m))
        results.append(functions[m](est, ref))
    return results


def _check_pair(est, ref):
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.ndim != 1 or ref.ndim != 1:
        raise ValueError("[E] Metrics expect 1-D waveforms.")
    if len(est) != len(ref):
        raise ValueError("[E] Length mismatch: {} vs {}.".format(len(est), len(ref)))
    return est, ref


def _to_db(num, den, clamp=CLAMP_DB):
    if num <= 0:
        return -clamp
    if den <= 0:
        return clamp
    return float(np.clip(10 * np.log10(num / den), -clamp, clamp))


def si_snr(est, ref, zero_mean=True, clamp=CLAMP_DB):
    '''Scale-invariant signal-to-noise ratio in dB, clamped to ``[-clamp, clamp]``.
    '''
    est, ref = _check_pair(est, ref)
    if zero_mean:
        est = est - est.mean()
        ref = ref - ref.mean()

    ref_energy = ref @ ref
    if ref_energy <= 0:
        raise ValueError("[E] Zero reference signal.")

    s_target = (est @ ref) / ref_energy * ref
    e_noise = est - s_target
    return _to_db(s_target @ s_target, e_noise @ e_noise, clamp)


def sdr(est, ref, filter_len=512, clamp=CLAMP_DB, reg=1e-10):
    '''Signal-to-distortion ratio with a least-squares FIR projection.

    The reference filtered by the best ``filter_len``-tap filter is taken as the target component.
    Normal equations are Toeplitz and are solved with Levinson recursion; ``reg`` is a relative diagonal load.
    '''
    est, ref = _check_pair(est, ref)
    n = len(ref)
    if not 1 <= filter_len <= n:
        raise ValueError("[E] filter_len must be in [1, {}], got {}.".format(n, filter_len))

    acf = signal.correlate(ref, ref, mode='full', method='fft')[n - 1:n - 1 + filter_len]
    xcf = signal.correlate(est, ref, mode='full', method='fft')[n - 1:n - 1 + filter_len]
    if acf[0] <= 0:
        raise ValueError("[E] Zero reference signal.")

    acf = acf.copy()
    acf[0] *= 1.0 + reg
    h = solve_toeplitz(acf, xcf)

    proj = signal.fftconvolve(ref, h)
    est_pad = np.concatenate([est, np.zeros(filter_len - 1)])
    e_dist = est_pad - proj
    return _to_db(proj @ proj, e_dist @ e_dist, clamp)


def estoi(est, ref, fs=SAMPLE_RATE):
    '''Extended short-time objective intelligibility, computed by ``pystoi``.

    Parameters
    ----------
    est : 1-D array
        Processed signal.
    ref : 1-D array
        Clean reference; silent frames are detected on it.
    fs : int, default: 16000

    Returns
    -------
    score : float in [-1, 1]
    '''
    est, ref = _check_pair(est, ref)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        score = pystoi.stoi(ref, est, fs, extended=True)
    # pystoi returns a placeholder when fewer than 30 active frames remain
    if any('Not enough STFT frames' in str(w.message) for w in caught):
        raise ValueError("[E] Input too short for ESTOI after removing silent frames.")
    return float(score)
