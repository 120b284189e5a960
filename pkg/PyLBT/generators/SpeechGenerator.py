import numpy as np
from scipy import signal
from .BaseGenerator import BaseGenerator
from ..utils import SAMPLE_RATE


class SpeechGenerator(BaseGenerator):
    '''Synthetic speech-like dry signals.

    Each talker has its own pitch and formant layout. An utterance is a train of syllables separated by pauses:
    voiced syllables are harmonic series on a gliding pitch contour shaped by three formant resonators,
    unvoiced ones are high-passed noise bursts.

    Parameters
    ----------
    duration : float, default: 2.0
        Utterance length in seconds.
    level : float, default: 0.5
        Peak amplitude of each utterance.
    seed : int, optional
    '''
    def __init__(self, duration=2.0, level=0.5, seed=None, verbose=False):
        self.check_params(duration=duration, level=level, seed=seed, verbose=verbose)


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        if "duration" in kwargs:
            assert self.duration > 0, "[E] duration must be positive."
        if "level" in kwargs:
            assert 0 < self.level <= 1, "[E] level must be in (0, 1]."


    def generate(self, n, duration=None):
        '''Generate ``n`` utterances, one talker each.

        Returns
        -------
        utterances : list of 1-D arrays
        '''
        duration = self.duration if duration is None else duration
        length = int(round(duration * SAMPLE_RATE))
        return [self.utterance(length, self.rng) for _ in range(n)]


    def utterance(self, length, rng):
        f0 = rng.uniform(90, 230)
        formants = np.array([rng.uniform(300, 900), rng.uniform(900, 2500), rng.uniform(2500, 3500)])

        pieces, total = [], 0
        while total < length:
            pause = int(rng.uniform(0.03, 0.15) * SAMPLE_RATE)
            if rng.rand() < 0.1:
                pause += int(rng.uniform(0.1, 0.3) * SAMPLE_RATE)
            n = int(rng.uniform(0.12, 0.3) * SAMPLE_RATE)
            if rng.rand() < 0.8:
                syllable = self._voiced(n, f0, formants * rng.uniform(0.85, 1.15, size=3), rng)
            else:
                syllable = self._unvoiced(n, rng)
            syllable *= signal.windows.tukey(n, 0.3) * rng.uniform(0.3, 1.0)
            pieces += [np.zeros(pause), syllable]
            total += pause + n

        x = np.concatenate(pieces)[:length]
        peak = np.max(np.abs(x))
        return x * (self.level / peak) if peak > 0 else x


    @staticmethod
    def _voiced(n, f0, formants, rng):
        contour = np.linspace(f0 * rng.uniform(0.85, 1.15), f0 * rng.uniform(0.85, 1.15), n)
        phase = 2 * np.pi * np.cumsum(contour) / SAMPLE_RATE + rng.uniform(0, 2 * np.pi)
        n_harmonics = int(4000 // contour.max())
        excitation = sum(np.cos(h * phase) for h in range(1, n_harmonics + 1))

        out = np.zeros(n)
        for gain, fc in zip([1.0, 0.5, 0.25], formants):
            band = [fc / 1.25, min(fc * 1.25, 0.45 * SAMPLE_RATE)]
            sos = signal.butter(2, band, btype='bandpass', fs=SAMPLE_RATE, output='sos')
            out += gain * signal.sosfilt(sos, excitation)
        return out


    @staticmethod
    def _unvoiced(n, rng):
        sos = signal.butter(2, 2000, btype='highpass', fs=SAMPLE_RATE, output='sos')
        return 0.3 * signal.sosfilt(sos, rng.standard_normal(n))
