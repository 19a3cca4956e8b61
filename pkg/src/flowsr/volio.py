"""Binary volume file format for velocity datasets.

Layout (all little-endian), version 1:

====== ====== =======================================================
offset size   field
====== ====== =======================================================
0      4      magic ``FLW4``
4      2      version (u16) = 1
6      2      channel layout code (u16) = 1: magnitude, u, v, w
8      4      m (u32), voxels along x
12     4      n (u32), voxels along y
16     4      s (u32), voxels along z
20     4      frame_count (u32)
24     8      venc (f64), cm/s
32     24     spacing (f64 x 3), mm per axis
56     ...    payload: frame_count x 4 channels x (m*n*s) float32
              samples, x fastest then y then z; channels in layout
              order; frames consecutive
====== ====== =======================================================

Writes are atomic (temp file in the target directory, then rename), so an
interrupted run never leaves a truncated file that parses.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import FormatError
from .volume import (
    AcquisitionParams,
    Grid3,
    ScalarVolume,
    VelocityDataset,
    VelocityFrame,
)

__all__ = ["MAGIC", "VERSION", "HEADER_SIZE", "save_dataset", "load_dataset"]

MAGIC = b"FLW4"
VERSION = 1
LAYOUT_MAG_UVW = 1
_HEADER = struct.Struct("<4sHH4I4d")
HEADER_SIZE = _HEADER.size  # 56
_CHANNELS = ("magnitude", "u", "v", "w")


def _channel_bytes(vol) -> bytes:
    return np.asarray(vol.data, dtype="<f4").ravel(order="F").tobytes()


def save_dataset(ds: VelocityDataset, path) -> None:
    """Write a dataset to ``path`` atomically in the version-1 format.

    Samples are stored as float32; values must survive that cast finitely.
    """
    grid = ds.grid
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        LAYOUT_MAG_UVW,
        grid.m,
        grid.n,
        grid.s,
        len(ds.frames),
        ds.params.venc,
        *grid.spacing,
    )
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=".flw4-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            for frame in ds.frames:
                for ch in _CHANNELS:
                    fh.write(_channel_bytes(getattr(frame, ch)))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load_dataset(path) -> VelocityDataset:
    """Read a version-1 volume file, validating header and payload strictly."""
    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < HEADER_SIZE:
        raise FormatError(
            f"file truncated inside the {HEADER_SIZE}-byte header: only {len(raw)} bytes"
        )
    magic, version, layout, m, n, s, frame_count, venc, sx, sy, sz = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at offset 4, expected {VERSION}")
    if layout != LAYOUT_MAG_UVW:
        raise FormatError(f"unknown channel layout code {layout} at offset 6")
    if min(m, n, s) < 1:
        raise FormatError(f"invalid dims {(m, n, s)} at offset 8")
    if frame_count < 1:
        raise FormatError(f"invalid frame count {frame_count} at offset 20")
    if not (np.isfinite(venc) and venc > 0):
        raise FormatError(f"invalid venc {venc} at offset 24")
    if not all(np.isfinite(v) and v > 0 for v in (sx, sy, sz)):
        raise FormatError(f"invalid spacing {(sx, sy, sz)} at offset 32")

    voxels = m * n * s
    expected = HEADER_SIZE + frame_count * len(_CHANNELS) * voxels * 4
    if len(raw) < expected:
        raise FormatError(
            f"payload truncated: expected {expected} bytes, file ends at offset {len(raw)}"
        )
    if len(raw) > expected:
        raise FormatError(
            f"trailing data: expected {expected} bytes, file has {len(raw)} "
            f"(extra starts at offset {expected})"
        )

    grid = Grid3(m, n, s, (sx, sy, sz))
    samples = np.frombuffer(raw, dtype="<f4", offset=HEADER_SIZE)
    samples = samples.reshape(frame_count, len(_CHANNELS), voxels)

    frames = []
    for f_idx in range(frame_count):
        vols = {}
        for c_idx, ch in enumerate(_CHANNELS):
            flat = samples[f_idx, c_idx].astype(np.float64)
            if not np.isfinite(flat).all():
                offset = HEADER_SIZE + (f_idx * len(_CHANNELS) + c_idx) * voxels * 4
                raise FormatError(
                    f"non-finite samples in frame {f_idx} channel {ch} "
                    f"(payload block at offset {offset})"
                )
            vols[ch] = ScalarVolume(grid, flat.reshape(grid.dims, order="F"))
        frames.append(VelocityFrame(**vols))

    params = AcquisitionParams(venc=venc, frame_count=frame_count)
    return VelocityDataset(params, tuple(frames))
