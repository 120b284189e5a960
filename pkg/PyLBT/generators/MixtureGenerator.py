import os
import numpy as np
from p_tqdm import p_map
from tqdm import tqdm
from .BaseGenerator import BaseGenerator
from .SpeechGenerator import SpeechGenerator
from .scenario import sample_scenario, MixtureExample
from .image_method import simulate_rirs, direct_rir, direct_to_reverberant_ratio, convolve, n_taps, _distance
from ..utils import SAMPLE_RATE, split_seeds


def scenario_rirs(scenario, absorption='sabine', cache_dir=None, fs=SAMPLE_RATE):
    '''Full RIRs of every speaker at every microphone, and the direct-path RIRs at the reference microphone.

    All responses of a scene share one length. With ``cache_dir`` the responses are stored as
    ``<scenario hash>_<absorption>.npz`` and read back on later calls.

    Returns
    -------
    rirs : ndarray
        ``N``-by-``M``-by-``taps``.
    direct : ndarray
        ``N``-by-``taps``.
    '''
    path = None
    if cache_dir is not None:
        path = os.path.join(cache_dir, "{}_{}.npz".format(scenario.hash(), absorption))
        if os.path.exists(path):
            with np.load(path) as cached:
                return cached['rirs'], cached['direct']

    mics = scenario.array.mic_positions
    sources = scenario.source_positions
    d_max = max(_distance(src, mics).max() for src in sources)
    taps = n_taps(scenario.room, d_max, fs)

    rirs = np.stack([simulate_rirs(scenario.room, src, mics, fs=fs, absorption=absorption, taps=taps) for src in sources])
    direct = np.stack([direct_rir(src, mics[0], taps=taps, fs=fs) for src in sources])

    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        np.savez(path, rirs=rirs, direct=direct)
    return rirs, direct


def spatialize(dry, scenario, absorption='sabine', fs=SAMPLE_RATE, cache_dir=None, utterance_ids=(), example_id=''):
    '''Render dry utterances into a multichannel mixture of the scene.

    Channel ``m`` of the mixture is the sum over speakers of ``dry[n]`` convolved with the full RIR from speaker ``n``
    to microphone ``m``. Target ``n`` is ``dry[n]`` convolved with the direct-path RIR at microphone 0.
    Everything is trimmed to the longest dry signal; shorter ones are zero-padded.

    Parameters
    ----------
    dry : list of 1-D arrays
        One utterance per speaker, in scenario speaker order.
    scenario : Scenario
    absorption : str in {'sabine', 'eyring'}, default: 'sabine'
    fs : int, default: 16000
    cache_dir : str, optional
        RIR cache folder.

    Returns
    -------
    example : MixtureExample
    '''
    if fs != SAMPLE_RATE:
        raise ValueError("[E] Dry signals must be {} Hz, got {}.".format(SAMPLE_RATE, fs))
    if len(dry) != scenario.n_speakers:
        raise ValueError("[E] {} dry signals for {} speakers.".format(len(dry), scenario.n_speakers))
    dry = [np.asarray(x, dtype=np.float64) for x in dry]
    for x in dry:
        if x.ndim != 1 or len(x) == 0:
            raise ValueError("[E] Dry signals must be non-empty 1-D arrays, got shape {}.".format(x.shape))

    length = max(len(x) for x in dry)
    rirs, direct = scenario_rirs(scenario, absorption=absorption, cache_dir=cache_dir, fs=fs)
    n_mics = rirs.shape[1]

    mixture = np.zeros((n_mics, length))
    for n, x in enumerate(dry):
        for m in range(n_mics):
            mixture[m] += convolve(x, rirs[n, m], length)
    targets = np.stack([convolve(x, direct[n], length) for n, x in enumerate(dry)])
    drr = tuple(direct_to_reverberant_ratio(rirs[n, 0], direct[n]) for n in range(len(dry)))

    return MixtureExample(mixture=mixture, targets=targets, scenario=scenario,
                          utterance_ids=tuple(utterance_ids), example_id=example_id, drr_db=drr)


def _simulate_one(job):
    '''Build one example from its own seed; module level so that worker processes can pickle it.
    '''
    seed, index, params, pool = job
    rng = np.random.RandomState(seed)
    scenario = sample_scenario(int(rng.randint(0, 2**31 - 1)), n_speakers=params['n_speakers'],
                               azimuth_resolution=params['azimuth_resolution'], reverberant=params['reverberant'],
                               min_gap=params['min_gap'], max_gap=params['max_gap'], array=params['array'])

    n = scenario.n_speakers
    length = int(round(params['duration'] * SAMPLE_RATE))
    if pool:
        picks = rng.choice(len(pool), size=n, replace=False)
        ids = tuple(pool[k][0] for k in picks)
        dry = [_fit_length(pool[k][1], length) for k in picks]
    else:
        speech = SpeechGenerator(duration=params['duration'], seed=int(rng.randint(0, 2**31 - 1)))
        dry = speech.generate(n)
        ids = tuple("synthetic-{}-{}".format(seed, k) for k in range(n))

    return spatialize(dry, scenario, absorption=params['absorption'], cache_dir=params['cache_dir'],
                      utterance_ids=ids, example_id="{:06d}".format(index))


def _fit_length(x, length):
    x = np.asarray(x, dtype=np.float64)
    if len(x) >= length:
        return x[:length]
    return np.concatenate([x, np.zeros(length - len(x))])


class MixtureGenerator(BaseGenerator):
    '''Simulated multichannel mixtures with direct-path targets.

    Parameters
    ----------
    n_speakers : int in [1, 5], default: 2
    duration : float, default: 2.0
        Seconds per example.
    azimuth_resolution : int in {5, 1}, default: 5
    reverberant : bool, default: True
    min_gap, max_gap : float, optional
        Constraint on the smallest pairwise azimuth difference.
    absorption : str in {'sabine', 'eyring'}, default: 'sabine'
    array : ArrayGeometry, optional
    cache_dir : str, optional
        RIR cache folder.
    n_jobs : int, default: 1
        Worker processes; results are identical for any value.
    seed : int, optional
    '''
    def __init__(self, n_speakers=2, duration=2.0, azimuth_resolution=5, reverberant=True, min_gap=None, max_gap=None,
                 absorption='sabine', array=None, cache_dir=None, n_jobs=1, seed=None, verbose=False):
        self.check_params(n_speakers=n_speakers, duration=duration, azimuth_resolution=azimuth_resolution,
                          reverberant=reverberant, min_gap=min_gap, max_gap=max_gap, absorption=absorption,
                          array=array, cache_dir=cache_dir, n_jobs=n_jobs, seed=seed, verbose=verbose)


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        if "absorption" in kwargs:
            assert self.absorption in ['sabine', 'eyring'], "[E] absorption must be 'sabine' or 'eyring'."
        if "n_speakers" in kwargs:
            assert 1 <= self.n_speakers <= 5, "[E] n_speakers must be in [1, 5]."
        if "n_jobs" in kwargs:
            assert self.n_jobs >= 1, "[E] n_jobs must be positive."


    def generate(self, n, dry=None):
        '''Generate ``n`` examples.

        Parameters
        ----------
        n : int
        dry : list of (id, waveform), optional
            Pool of dry 16 kHz utterances. Synthetic speech is used when missing.

        Returns
        -------
        examples : list of MixtureExample
            Sorted by example id.
        '''
        if dry is not None and len(dry) < self.n_speakers:
            raise ValueError("[E] Need at least {} dry utterances, got {}.".format(self.n_speakers, len(dry)))
        params = {k: getattr(self, k) for k in ['n_speakers', 'duration', 'azimuth_resolution', 'reverberant',
                                                 'min_gap', 'max_gap', 'absorption', 'array', 'cache_dir']}
        jobs = [(s, i, params, dry) for i, s in enumerate(split_seeds(self.rng, n))]
        if n == 0:
            return []

        if self.n_jobs > 1:
            examples = p_map(_simulate_one, jobs, num_cpus=self.n_jobs, disable=not self.verbose, desc="[I] Simulating")
        else:
            examples = [_simulate_one(job) for job in tqdm(jobs, disable=not self.verbose, desc="[I] Simulating")]
        return sorted(examples, key=lambda e: e.example_id)
