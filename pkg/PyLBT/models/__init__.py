from .BaseModel import BaseModel
from .DenseUNet import DenseUNet, SeparatorConfig
from .OracleSeparator import OracleSeparator
from .CombinedSeparator import CombinedSeparator
from .layers import Conv2d, FrequencyMapping, DenseBlock, frequency_mapping_layer

# __all__ = ['DenseUNet', 'OracleSeparator', 'CombinedSeparator']
