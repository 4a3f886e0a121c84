from .document import FORMAT_VERSION, load_model, save_model
from .signals import import_signal
from .urls import AppUrl, NoteLinks, note_links, parse_app_url
from .wavio import NORMALIZE_PEAK, WaveData, WaveInfo, read_wav, write_wav

__all__ = [
    "AppUrl",
    "FORMAT_VERSION",
    "NORMALIZE_PEAK",
    "NoteLinks",
    "WaveData",
    "WaveInfo",
    "import_signal",
    "load_model",
    "note_links",
    "parse_app_url",
    "read_wav",
    "save_model",
    "write_wav",
]
