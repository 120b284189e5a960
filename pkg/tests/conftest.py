import numpy as np
import pytest
from PyLBT.generators import MixtureGenerator, SpeechGenerator


@pytest.fixture
def rng():
    return np.random.RandomState(1997)


@pytest.fixture(scope='session')
def anechoic_pair():
    '''Two speakers at least 60 degrees apart, anechoic, 7-mic circular array.'''
    gen = MixtureGenerator(n_speakers=2, duration=0.5, reverberant=False, min_gap=60, seed=7)
    return gen.generate(1)[0]


@pytest.fixture(scope='session')
def anechoic_trio():
    gen = MixtureGenerator(n_speakers=3, duration=0.3, reverberant=False, min_gap=30, seed=11)
    return gen.generate(1)[0]


@pytest.fixture(scope='session')
def single_source():
    gen = MixtureGenerator(n_speakers=1, duration=0.5, reverberant=False, seed=3)
    return gen.generate(1)[0]


@pytest.fixture(scope='session')
def speech():
    return SpeechGenerator(duration=1.0, seed=5).generate(2)
