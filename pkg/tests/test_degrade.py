import numpy as np
import pytest

from flowsr import (
    CalibrationError,
    ComplexVolume,
    DegradationConfig,
    Grid3,
    GridMismatchError,
    ParameterError,
    ScalarVolume,
    apply_SH,
    apply_SH_adjoint,
    calibrate_noise,
    crop_kspace,
    degrade_dataset,
    forward_fft,
    gaussian_spectrum,
    ideal_lowpass_spectrum,
    inverse_fft,
    poiseuille_phantom,
    synthesize_complex,
)

from conftest import random_complex, rel_err

# (hr dims, rates) pairs covering odd dims and mixed rates
SH_CONFIGS = [
    ((8, 8, 8), (2, 2, 2)),
    ((8, 4, 4), (2, 2, 2)),
    ((9, 3, 3), (3, 1, 1)),
    ((6, 10, 4), (2, 2, 2)),
    ((15, 4, 6), (5, 2, 3)),
    ((4, 4, 4), (1, 1, 1)),
    ((8, 6, 4), (2, 3, 2)),
    ((12, 9, 5), (4, 3, 5)),
]


def _kernels(hr, d):
    grid = Grid3(*hr)
    yield ideal_lowpass_spectrum(grid, d)
    yield gaussian_spectrum(grid, tuple(dim / rate for dim, rate in zip(hr, d)))


class TestApplySH:
    def test_identity_when_trivial(self, rng):
        g = Grid3(4, 4, 4)
        x = random_complex(g, rng)
        kernel = ideal_lowpass_spectrum(g, (1, 1, 1))
        assert rel_err(apply_SH(x, kernel, (1, 1, 1)).data, x.data) < 1e-13
        assert rel_err(apply_SH_adjoint(x, kernel, (1, 1, 1)).data, x.data) < 1e-13

    def test_linearity(self, rng):
        g = Grid3(8, 4, 4)
        d = (2, 2, 2)
        kernel = ideal_lowpass_spectrum(g, d)
        x, y = random_complex(g, rng), random_complex(g, rng)
        a, b = 0.3 - 1.1j, 2.0 + 0.5j
        combo = apply_SH(ComplexVolume(g, a * x.data + b * y.data), kernel, d)
        split = a * apply_SH(x, kernel, d).data + b * apply_SH(y, kernel, d).data
        assert rel_err(combo.data, split) < 1e-12

    @pytest.mark.parametrize("hr,d", SH_CONFIGS)
    def test_crop_pipeline_equals_sqrt_d_times_sh(self, hr, d, rng):
        grid = Grid3(*hr)
        lr = grid.decimated(d)
        kernel = ideal_lowpass_spectrum(grid, d)
        for _ in range(3):
            x = random_complex(grid, rng)
            via_crop = inverse_fft(crop_kspace(forward_fft(x), lr))
            via_sh = np.sqrt(np.prod(d)) * apply_SH(x, kernel, d).data
            assert rel_err(via_crop.data, via_sh) < 1e-10

    @pytest.mark.parametrize("hr,d", SH_CONFIGS)
    def test_adjoint_identity(self, hr, d, rng):
        grid = Grid3(*hr)
        lr = grid.decimated(d)
        for kernel in _kernels(hr, d):
            for _ in range(20):
                x = random_complex(grid, rng)
                y = random_complex(lr, rng)
                lhs = np.vdot(y.data, apply_SH(x, kernel, d).data)
                rhs = np.vdot(apply_SH_adjoint(y, kernel, d).data, x.data)
                assert abs(lhs - rhs) / abs(rhs) < 1e-12

    def test_adjoint_of_zero_is_zero(self):
        lr = Grid3(2, 2, 2)
        kernel = ideal_lowpass_spectrum(Grid3(4, 4, 4), (2, 2, 2))
        out = apply_SH_adjoint(ComplexVolume(lr, np.zeros(lr.dims, complex)), kernel, (2, 2, 2))
        assert np.all(out.data == 0)

    def test_divisibility_enforced(self, rng):
        g = Grid3(6, 6, 6)
        kernel = ideal_lowpass_spectrum(g, (2, 2, 2))
        with pytest.raises(GridMismatchError):
            apply_SH(random_complex(g, rng), kernel, (4, 2, 2))

    def test_kernel_grid_must_match(self, rng):
        x = random_complex(Grid3(8, 8, 8), rng)
        kernel = ideal_lowpass_spectrum(Grid3(4, 4, 4), (2, 2, 2))
        with pytest.raises(GridMismatchError):
            apply_SH(x, kernel, (2, 2, 2))
        with pytest.raises(GridMismatchError):
            apply_SH_adjoint(x, kernel, (2, 2, 2))


class TestCalibration:
    def test_reference_sigma_value(self):
        g = Grid3(4, 4, 4)
        cal = calibrate_noise(ScalarVolume(g, np.ones(g.dims)), 15.0)
        assert abs(cal.sigma - 10 ** (-0.75) / np.sqrt(2)) < 1e-15
        assert abs(cal.sigma - 0.1257) < 1e-4

    def test_sigma_scales_with_peak(self, rng):
        g = Grid3(4, 4, 4)
        mag = ScalarVolume(g, rng.random(g.dims))
        one = calibrate_noise(mag, 15.0)
        two = calibrate_noise(ScalarVolume(g, 2.0 * mag.data), 15.0)
        assert abs(two.sigma - 2.0 * one.sigma) < 1e-15

    def test_high_target_drives_sigma_to_zero(self):
        g = Grid3(2, 2, 2)
        cal = calibrate_noise(ScalarVolume(g, np.ones(g.dims)), 300.0)
        assert cal.sigma < 1e-14

    def test_all_zero_magnitude_rejected(self):
        g = Grid3(2, 2, 2)
        with pytest.raises(CalibrationError):
            calibrate_noise(ScalarVolume(g, np.zeros(g.dims)), 15.0)

    def test_nonfinite_target_rejected(self):
        g = Grid3(2, 2, 2)
        with pytest.raises(ParameterError):
            calibrate_noise(ScalarVolume(g, np.ones(g.dims)), np.inf)

    def test_achieved_close_to_target_on_large_volume(self):
        g = Grid3(32, 32, 32)
        cal = calibrate_noise(ScalarVolume(g, np.ones(g.dims)), 15.0, seed=3)
        assert abs(cal.achieved_psnr_db - 15.0) < 0.5

    def test_achieved_mean_over_seeds(self):
        g = Grid3(16, 16, 16)
        vals = [
            calibrate_noise(ScalarVolume(g, np.ones(g.dims)), 15.0, seed=s).achieved_psnr_db
            for s in range(10)
        ]
        assert abs(np.mean(vals) - 15.0) < 0.1


def _phantom(dims=(16, 16, 16), frames=2, vmax=100.0):
    return poiseuille_phantom(
        Grid3(*dims), radius_voxels=0.3 * dims[0], vmax_per_frame=[vmax] * frames, venc=150.0
    )


def _frame_signal(frame, channel, venc):
    return synthesize_complex(frame.magnitude, frame.channel(channel), venc)


class TestDegradeDataset:
    def test_noiseless_identity_at_rate_one(self):
        hr = _phantom()
        lr, cal = degrade_dataset(hr, DegradationConfig(d=(1, 1, 1)))
        assert cal.sigma == 0.0
        for f_hr, f_lr in zip(hr.frames, lr.frames):
            for ch in ("magnitude", "u", "v", "w"):
                assert rel_err(f_lr.channel(ch).data, f_hr.channel(ch).data) < 1e-10

    @pytest.mark.parametrize("kernel_kind", ["ideal", "gaussian"])
    def test_noiseless_equals_scaled_sh(self, kernel_kind):
        hr = _phantom()
        d = (2, 2, 2)
        cfg = DegradationConfig(d=d, kernel=kernel_kind)
        lr, _ = degrade_dataset(hr, cfg)
        kernel = cfg.kernel_spectrum(hr.grid)
        venc = hr.params.venc
        for f_hr, f_lr in zip(hr.frames, lr.frames):
            for ch in ("u", "v", "w"):
                expected = np.sqrt(8.0) * apply_SH(_frame_signal(f_hr, ch, venc), kernel, d).data
                got = f_lr.magnitude.data * np.exp(1j * np.pi * f_lr.channel(ch).data / venc)
                if ch != "u":
                    # non-u channels reuse the u magnitude; compare velocity via phase
                    got = np.abs(expected) * np.exp(1j * np.pi * f_lr.channel(ch).data / venc)
                assert rel_err(got, expected) < 1e-9

    def test_seeded_runs_are_bit_identical(self):
        hr = _phantom()
        cfg = DegradationConfig(d=(2, 2, 2), noise_psnr_db=15.0, rng_seed=99)
        lr1, cal1 = degrade_dataset(hr, cfg)
        lr2, cal2 = degrade_dataset(hr, cfg)
        assert cal1.sigma == cal2.sigma
        for f1, f2 in zip(lr1.frames, lr2.frames):
            for ch in ("magnitude", "u", "v", "w"):
                assert np.array_equal(f1.channel(ch).data, f2.channel(ch).data)

    def test_noise_streams_differ_per_frame_and_channel(self):
        hr = _phantom(frames=2)
        cfg = DegradationConfig(d=(2, 2, 2), noise_psnr_db=15.0, rng_seed=5)
        lr, _ = degrade_dataset(hr, cfg)
        f0, f1 = lr.frames
        assert not np.array_equal(f0.u.data, f0.v.data)
        assert not np.array_equal(f0.u.data, f1.u.data)

    def test_noise_statistics(self):
        # rate 1 keeps the full grid: the added complex noise is the output
        # signal minus the clean signal
        g = Grid3(32, 32, 32)
        hr = poiseuille_phantom(g, radius_voxels=10, vmax_per_frame=[100.0], venc=150.0)
        cfg = DegradationConfig(d=(1, 1, 1), noise_psnr_db=15.0, rng_seed=11)
        lr, cal = degrade_dataset(hr, cfg)
        venc = hr.params.venc
        clean = _frame_signal(hr.frames[0], "u", venc).data
        noisy = lr.frames[0].magnitude.data * np.exp(1j * np.pi * lr.frames[0].u.data / venc)
        noise = noisy - clean
        assert abs(noise.mean()) < 4 * cal.sigma / np.sqrt(g.voxel_count)
        for comp in (noise.real, noise.imag):
            assert abs(comp.var() - cal.sigma**2) / cal.sigma**2 < 0.05

    def test_achieved_psnr_recorded(self):
        hr = _phantom()
        lr, cal = degrade_dataset(hr, DegradationConfig(d=(2, 2, 2), noise_psnr_db=15.0))
        assert cal.target_psnr_db == 15.0
        assert np.isfinite(cal.achieved_psnr_db)

    def test_aliasing_in_ground_truth_propagates(self):
        g = Grid3(8, 8, 8)
        with pytest.raises(ParameterError):
            # phantom construction already rejects vmax >= venc
            poiseuille_phantom(g, radius_voxels=3, vmax_per_frame=[150.0], venc=150.0)

    def test_divisibility_error(self):
        hr = _phantom(dims=(6, 6, 6))
        with pytest.raises(GridMismatchError):
            degrade_dataset(hr, DegradationConfig(d=(4, 1, 1)))


class TestDegradationConfig:
    def test_rejects_bad_kernel(self):
        with pytest.raises(ParameterError):
            DegradationConfig(d=(2, 2, 2), kernel="box")

    def test_rejects_bad_rates(self):
        with pytest.raises(ParameterError):
            DegradationConfig(d=(0, 2, 2))

    def test_kernel_spectrum_default_fwhm(self):
        cfg = DegradationConfig(d=(2, 2, 2), kernel="gaussian")
        spec = cfg.kernel_spectrum(Grid3(8, 8, 8))
        assert abs(spec.values[2, 0, 0] - 0.5) < 1e-12  # half gain at L/2 bins
