from .scenario import ArrayGeometry, Room, SourcePlacement, Scenario, MixtureExample
from .scenario import sample_scenario, geometry_truth
from .image_method import SPEED_OF_SOUND, reflection_coefficient, simulate_rir, simulate_rirs, direct_rir
from .image_method import energy_decay_curve, estimate_t60, direct_to_reverberant_ratio
from .MixtureGenerator import spatialize, scenario_rirs, MixtureGenerator
from .ScenarioGenerator import ScenarioGenerator
from .SpeechGenerator import SpeechGenerator

__all__ = [
    'ScenarioGenerator',
    'SpeechGenerator',
    'MixtureGenerator',
]
