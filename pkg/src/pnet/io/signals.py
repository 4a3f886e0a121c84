"""Loading external input signals for the position and force input modules.

Two on-disk shapes are accepted: a WAV file (whose header carries the rate)
or a headerless little-endian float64 stream, whose rate must be declared by
the caller or by a sidecar file named "<signal>.rate" holding the integer
rate.  Either way the result is a mono float64 buffer at the model rate;
multichannel WAVs are mixed down by averaging.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import RateMismatch, UnsupportedFormat
from .wavio import read_wav


def _declared_rate(path: str, declared_rate) -> int:
    if declared_rate is not None:
        return int(declared_rate)
    sidecar = f"{path}.rate"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            text = fh.read().strip()
        try:
            return int(text)
        except ValueError:
            raise UnsupportedFormat(f"sidecar {sidecar} must hold an integer rate, got {text!r}") from None
    raise RateMismatch(
        f"raw signal {path} has no declared rate (pass one or add a {os.path.basename(sidecar)} sidecar)")


def import_signal(path, model_rate: int, declared_rate=None) -> np.ndarray:
    """Load a signal file as a mono float64 buffer at the model rate.

    No resampling happens here: a rate that differs from the model rate is
    an error, because off-time simulation reads one sample per step.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"RIFF":
        wave = read_wav(path)
        rate = wave.rate
        buf = wave.data.mean(axis=0) if wave.channels > 1 else wave.data[0]
    else:
        rate = _declared_rate(path, declared_rate)
        raw = np.fromfile(path, dtype="<f8")
        if not np.isfinite(raw).all():
            raise UnsupportedFormat(f"raw signal {path} contains non-finite samples")
        buf = raw
    if rate != model_rate:
        raise RateMismatch(
            f"signal {os.path.basename(path)} is at {rate} Hz but the model runs at {model_rate} Hz")
    return np.ascontiguousarray(buf, dtype=np.float64)
