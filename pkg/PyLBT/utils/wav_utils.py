import os
import numpy as np
import soundfile as sf
from .signal_utils import SAMPLE_RATE


SUBTYPES = ['PCM_16', 'FLOAT']
MAX_CHANNELS = 7


def read_wav(path, expect_mono=False):
    '''Read a 16 kHz RIFF/WAVE file.

    Parameters
    ----------
    path : str
    expect_mono : bool, default: False
        Return a 1-D array and reject multichannel files.

    Returns
    -------
    x : ndarray
        ``M``-by-``L`` float64 samples, channel 0 being the reference microphone.
    '''
    try:
        info = sf.info(path)
    except RuntimeError as e:
        raise ValueError("[E] Cannot read {}: {}".format(path, e)) from e

    if info.format != 'WAV':
        raise ValueError("[E] {} is not a RIFF/WAVE file ({}).".format(path, info.format))
    if info.subtype not in SUBTYPES:
        raise ValueError("[E] Unsupported WAV subtype {} in {}.".format(info.subtype, path))
    if info.samplerate != SAMPLE_RATE:
        raise ValueError("[E] Expected {} Hz in {}, got {} Hz.".format(SAMPLE_RATE, path, info.samplerate))
    if not 1 <= info.channels <= MAX_CHANNELS:
        raise ValueError("[E] Expected 1 to {} channels in {}, got {}.".format(MAX_CHANNELS, path, info.channels))

    data, _ = sf.read(path, dtype='float64', always_2d=True)
    x = data.T.copy()

    if expect_mono:
        if x.shape[0] != 1:
            raise ValueError("[E] Expected a mono file, {} has {} channels.".format(path, x.shape[0]))
        return x[0]
    return x


def write_wav(path, x, subtype='FLOAT'):
    '''Write a 16 kHz RIFF/WAVE file.

    Parameters
    ----------
    path : str
    x : ndarray
        1-D waveform or ``M``-by-``L`` multichannel waveform.
    subtype : str in {'FLOAT', 'PCM_16'}, default: 'FLOAT'
        IEEE float32 or 16-bit PCM. PCM samples are rounded to the nearest step of 1/32768.
    '''
    if subtype not in SUBTYPES:
        raise ValueError("[E] Unsupported WAV subtype: {}".format(subtype))
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or not 1 <= x.shape[0] <= MAX_CHANNELS:
        raise ValueError("[E] Expected 1 to {} channels, got shape {}.".format(MAX_CHANNELS, x.shape))
    if not np.all(np.isfinite(x)):
        raise ValueError("[E] Waveform contains non-finite values.")

    if subtype == 'PCM_16':
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = x.astype(np.float32)

    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    sf.write(path, data.T, SAMPLE_RATE, subtype=subtype, format='WAV')
