from . import utils
from . import solvers
from . import generators
from . import datasets
from . import criteria
from . import localization
from . import models
from . import harness

__version__ = '0.1.0'

# __all__ = ['utils', 'generators', 'datasets', 'criteria', 'localization', 'models', 'harness']
