import struct

import numpy as np
import pytest

from flowsr import FormatError, Grid3, load_dataset, load_external, poiseuille_phantom, save_dataset
from flowsr.volio import HEADER_SIZE, MAGIC, VERSION


@pytest.fixture
def dataset():
    return poiseuille_phantom(
        Grid3(6, 6, 4, (1.5, 1.5, 2.0)),
        radius_voxels=2,
        vmax_per_frame=[80.0, 55.0],
        venc=130.0,
        magnitude_out=0.1,
    )


def _write(tmp_path, raw: bytes, name="vol.flw4"):
    path = tmp_path / name
    path.write_bytes(raw)
    return path


class TestRoundTrip:
    def test_values_survive_as_float32(self, tmp_path, dataset):
        path = tmp_path / "ds.flw4"
        save_dataset(dataset, path)
        back = load_dataset(path)
        assert back.grid == dataset.grid
        assert back.params.venc == dataset.params.venc
        assert len(back.frames) == len(dataset.frames)
        for f1, f2 in zip(dataset.frames, back.frames):
            for ch in ("magnitude", "u", "v", "w"):
                expected = f1.channel(ch).data.astype(np.float32).astype(np.float64)
                assert np.array_equal(f2.channel(ch).data, expected)

    def test_save_load_save_bit_identical(self, tmp_path, dataset):
        p1, p2 = tmp_path / "a.flw4", tmp_path / "b.flw4"
        save_dataset(dataset, p1)
        save_dataset(load_dataset(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_no_temp_files_left(self, tmp_path, dataset):
        save_dataset(dataset, tmp_path / "ds.flw4")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["ds.flw4"]

    def test_load_external_alias(self, tmp_path, dataset):
        path = tmp_path / "ds.flw4"
        save_dataset(dataset, path)
        back = load_external(path)
        assert back.grid == dataset.grid

    def test_venc_governs_downstream(self, tmp_path, dataset):
        path = tmp_path / "ds.flw4"
        save_dataset(dataset, path)
        assert load_dataset(path).params.venc == 130.0


def _header(magic=MAGIC, version=VERSION, layout=1, dims=(2, 2, 2), frames=1,
            venc=100.0, spacing=(1.0, 1.0, 1.0)):
    return struct.pack("<4sHH4I4d", magic, version, layout, *dims, frames, venc, *spacing)


def _payload(dims=(2, 2, 2), frames=1, value=1.0):
    count = frames * 4 * int(np.prod(dims))
    return np.full(count, value, dtype="<f4").tobytes()


class TestCorruptFiles:
    def test_truncated_header(self, tmp_path):
        path = _write(tmp_path, b"FLW4\x01")
        with pytest.raises(FormatError, match="header"):
            load_dataset(path)

    def test_bad_magic(self, tmp_path):
        raw = _header(magic=b"NOPE") + _payload()
        with pytest.raises(FormatError, match="offset 0"):
            load_dataset(_write(tmp_path, raw))

    def test_bad_version(self, tmp_path):
        raw = _header(version=9) + _payload()
        with pytest.raises(FormatError, match="offset 4"):
            load_dataset(_write(tmp_path, raw))

    def test_bad_layout(self, tmp_path):
        raw = _header(layout=7) + _payload()
        with pytest.raises(FormatError, match="offset 6"):
            load_dataset(_write(tmp_path, raw))

    def test_zero_dims(self, tmp_path):
        raw = _header(dims=(0, 2, 2)) + _payload()
        with pytest.raises(FormatError, match="offset 8"):
            load_dataset(_write(tmp_path, raw))

    def test_zero_frames(self, tmp_path):
        raw = _header(frames=0) + _payload(frames=0)
        with pytest.raises(FormatError, match="offset 20"):
            load_dataset(_write(tmp_path, raw))

    def test_bad_venc(self, tmp_path):
        raw = _header(venc=-5.0) + _payload()
        with pytest.raises(FormatError, match="offset 24"):
            load_dataset(_write(tmp_path, raw))

    def test_bad_spacing(self, tmp_path):
        raw = _header(spacing=(1.0, 0.0, 1.0)) + _payload()
        with pytest.raises(FormatError, match="offset 32"):
            load_dataset(_write(tmp_path, raw))

    def test_truncated_payload_names_offset(self, tmp_path):
        raw = _header() + _payload()[:-8]
        expected_end = HEADER_SIZE + 4 * 8 * 4
        with pytest.raises(FormatError, match=f"ends at offset {expected_end - 8}"):
            load_dataset(_write(tmp_path, raw))

    def test_trailing_garbage(self, tmp_path):
        raw = _header() + _payload() + b"xx"
        with pytest.raises(FormatError, match="trailing data"):
            load_dataset(_write(tmp_path, raw))

    def test_nonfinite_sample_names_frame_and_channel(self, tmp_path):
        samples = np.full(4 * 8, 1.0, dtype="<f4")
        samples[8] = np.inf  # first sample of channel u
        raw = _header() + samples.tobytes()
        with pytest.raises(FormatError, match="frame 0 channel u"):
            load_dataset(_write(tmp_path, raw))
