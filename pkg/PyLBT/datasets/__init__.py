from .BaseData import BaseData
from .MixtureData import MixtureData, write_manifest, manifest_record
from .SpeechFolderData import SpeechFolderData


__all__ = [
    'MixtureData',
    'SpeechFolderData',
]
