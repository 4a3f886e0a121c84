"""Minimal RIFF/WAVE reading and writing.

Writes 32-bit float (format tag 3, with a fact chunk) or 16-bit PCM
(format tag 1).  Reads PCM 8/16/24-bit, float32/float64, and the extensible
wrapper around either.  Everything is little-endian, as the container
dictates.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyChannelSet, UnsupportedFormat

# Peak target for optional normalization: -1 dBFS.
NORMALIZE_PEAK = 10.0 ** (-1.0 / 20.0)

_TAG_PCM = 1
_TAG_FLOAT = 3
_TAG_EXTENSIBLE = 0xFFFE


@dataclass
class WaveInfo:
    """What a write did: geometry plus scaling and clipping bookkeeping."""
    frames: int
    channels: int
    rate: int
    fmt: str            # "float32" or "pcm16"
    peak: float         # largest |sample| before any scaling
    scale: float        # gain applied (1.0 unless normalize)
    clipped: int        # samples outside [-1, 1] at conversion time


def _as_matrix(channels) -> np.ndarray:
    arr = np.asarray(channels, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ValueError(f"channel data must be 1- or 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyChannelSet("no channels to write")
    return arr


def write_wav(path, rate: int, channels, fmt: str = "float32",
              normalize: bool = False) -> WaveInfo:
    """Write channels (each one row) interleaved; returns a WaveInfo.

    normalize rescales so the loudest sample sits at -1 dBFS; silence is
    left untouched.  For pcm16, samples still outside [-1, 1] are clamped
    and counted in the returned info.
    """
    data = _as_matrix(channels)
    n_ch, frames = data.shape
    peak = float(np.max(np.abs(data))) if data.size else 0.0
    scale = 1.0
    if normalize and peak > 0.0:
        scale = NORMALIZE_PEAK / peak
        data = data * scale

    if fmt == "float32":
        payload = np.ascontiguousarray(data.T, dtype="<f4").tobytes()
        clipped = 0
        blob = _assemble(_TAG_FLOAT, 32, rate, n_ch, frames, payload)
    elif fmt == "pcm16":
        clipped = int(np.count_nonzero(np.abs(data) > 1.0))
        ints = np.clip(np.rint(data * 32767.0), -32768, 32767).astype("<i2")
        payload = np.ascontiguousarray(ints.T).tobytes()
        blob = _assemble(_TAG_PCM, 16, rate, n_ch, frames, payload)
    else:
        raise UnsupportedFormat(f"unknown sample format {fmt!r} (want float32 or pcm16)")

    if hasattr(path, "write"):
        path.write(blob)
    else:
        with open(path, "wb") as fh:
            fh.write(blob)
    return WaveInfo(frames, n_ch, int(rate), fmt, peak, scale, clipped)


def _assemble(tag: int, bits: int, rate: int, n_ch: int, frames: int,
              payload: bytes) -> bytes:
    block = n_ch * bits // 8
    if tag == _TAG_FLOAT:
        # Non-PCM formats carry cbSize=0 and a fact chunk with the frame count.
        fmt_chunk = struct.pack("<4sIHHIIHHH", b"fmt ", 18, tag, n_ch,
                                rate, rate * block, block, bits, 0)
        fact = struct.pack("<4sII", b"fact", 4, frames)
    else:
        fmt_chunk = struct.pack("<4sIHHIIHH", b"fmt ", 16, tag, n_ch,
                                rate, rate * block, block, bits)
        fact = b""
    data_chunk = struct.pack("<4sI", b"data", len(payload)) + payload
    if len(payload) % 2:
        data_chunk += b"\x00"
    body = b"WAVE" + fmt_chunk + fact + data_chunk
    return struct.pack("<4sI", b"RIFF", len(body)) + body


@dataclass
class WaveData:
    rate: int
    data: np.ndarray    # (channels, frames) float64 in [-1, 1] nominal range
    format_tag: int
    bits: int

    @property
    def frames(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[0]


def read_wav(source) -> WaveData:
    """Read a RIFF/WAVE file (path, file object, or bytes) into float64."""
    if isinstance(source, (bytes, bytearray)):
        blob = bytes(source)
    elif hasattr(source, "read"):
        blob = source.read()
    else:
        with open(source, "rb") as fh:
            blob = fh.read()

    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise UnsupportedFormat("not a RIFF/WAVE file")

    tag = bits = n_ch = rate = None
    payload = None
    pos = 12
    while pos + 8 <= len(blob):
        cid, size = struct.unpack_from("<4sI", blob, pos)
        pos += 8
        body = blob[pos:pos + size]
        if cid == b"fmt ":
            if size < 16:
                raise UnsupportedFormat("fmt chunk too short")
            tag, n_ch, rate, _, _, bits = struct.unpack_from("<HHIIHH", body, 0)
            if tag == _TAG_EXTENSIBLE:
                if size < 40:
                    raise UnsupportedFormat("extensible fmt chunk too short")
                tag = struct.unpack_from("<H", body, 24)[0]
        elif cid == b"data":
            payload = body
        pos += size + (size & 1)

    if tag is None or payload is None:
        raise UnsupportedFormat("missing fmt or data chunk")
    if n_ch < 1:
        raise UnsupportedFormat("file declares zero channels")

    if tag == _TAG_PCM and bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    elif tag == _TAG_PCM and bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8)
        raw = raw[:len(raw) - len(raw) % 3].reshape(-1, 3)
        ints = (raw[:, 0].astype(np.int32)
                | (raw[:, 1].astype(np.int32) << 8)
                | (raw[:, 2].astype(np.int32) << 16))
        ints = (ints ^ 0x800000) - 0x800000  # sign-extend 24 -> 32 bits
        samples = ints.astype(np.float64) / 8388608.0
    elif tag == _TAG_PCM and bits == 8:
        samples = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif tag == _TAG_FLOAT and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    elif tag == _TAG_FLOAT and bits == 64:
        samples = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    else:
        raise UnsupportedFormat(f"format tag {tag} with {bits} bits is not supported")

    frames = len(samples) // n_ch
    data = samples[:frames * n_ch].reshape(frames, n_ch).T.copy()
    return WaveData(int(rate), data, int(tag), int(bits))
