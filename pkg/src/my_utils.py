import hashlib
import json
import os

import numpy as np


def get_hash(text):
    """
    Calculate a short BLAKE2b hash for the given text.
    """
    digest = hashlib.blake2b(text.encode('utf-8'))
    return digest.hexdigest()[:11]


def matrix_to_pairs(matrix):
    """Row-major nested lists of [re, im] pairs."""
    m = np.asarray(matrix, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def _plain(value):
    if isinstance(value, np.ndarray):
        return matrix_to_pairs(value)
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_json(path, payload):
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w') as f:
        json.dump(_plain(payload), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    return str(value)


def format_record(record):
    """Flat key=value line."""
    return ' '.join(f'{key}={format_value(value)}' for key, value in record.items())
