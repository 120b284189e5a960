from tqdm import tqdm
from .BaseGenerator import BaseGenerator
from .scenario import sample_scenario
from ..utils import split_seeds


class ScenarioGenerator(BaseGenerator):
    '''Draws scenes under the simulation protocol.

    Parameters
    ----------
    n_speakers : int in [1, 5]
    azimuth_resolution : int in {5, 1}, default: 5
    reverberant : bool, default: True
    min_gap, max_gap : float, optional
        Bounds on the smallest pairwise azimuth difference (constrained-difference test sets).
    array : ArrayGeometry, optional
        Defaults to the 7-mic circular array.
    seed : int, optional
    '''
    def __init__(self, n_speakers=2, azimuth_resolution=5, reverberant=True, min_gap=None, max_gap=None, array=None, seed=None, verbose=False):
        self.check_params(n_speakers=n_speakers, azimuth_resolution=azimuth_resolution, reverberant=reverberant,
                          min_gap=min_gap, max_gap=max_gap, array=array, seed=seed, verbose=verbose)


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        if "azimuth_resolution" in kwargs:
            assert self.azimuth_resolution in [1, 5], "[E] azimuth_resolution must be 1 or 5."
        if "n_speakers" in kwargs:
            assert 1 <= self.n_speakers <= 5, "[E] n_speakers must be in [1, 5]."


    def generate(self, n):
        '''Sample ``n`` scenes, each with its own seed drawn from the generator.

        Returns
        -------
        scenarios : list of Scenario
        '''
        seeds = split_seeds(self.rng, n)
        return [self.sample(s) for s in tqdm(seeds, disable=not self.verbose, desc="[I] Sampling scenes")]


    def sample(self, seed):
        return sample_scenario(seed, n_speakers=self.n_speakers, azimuth_resolution=self.azimuth_resolution,
                               reverberant=self.reverberant, min_gap=self.min_gap, max_gap=self.max_gap, array=self.array)
