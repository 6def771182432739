from ratnet.storage.checkpoint import dumps, load_network, loads, save_network
from ratnet.storage.files import frame_to_csv, write_atomic, write_frame

__all__ = [
    'dumps',
    'frame_to_csv',
    'load_network',
    'loads',
    'save_network',
    'write_atomic',
    'write_frame',
]
