"""Acquisition degradation: filter + decimate, its adjoint, and noisy simulation.

The low-resolution acquisition of a high-resolution complex signal x is
modeled as ``y = S H x + n``: circular convolution H (a pointwise multiply
in the unitary Fourier domain), decimation S keeping voxel 0 of every
``d``-block per axis, and white complex Gaussian noise n.

Simulated datasets follow the measurement chain per frame and velocity
channel: synthesize the complex signal from magnitude + velocity, transform
to k-space, add calibrated noise, truncate the high frequencies, transform
back, and re-extract magnitude and velocity.  Under the unitary convention
the truncation pipeline equals ``sqrt(d) * S H`` with the ideal low-pass
kernel, which the tests pin down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, GridMismatchError, ParameterError
from .spectral import (
    KernelSpectrum,
    crop_kspace,
    fftn_unitary,
    forward_fft,
    gaussian_spectrum,
    ideal_lowpass_spectrum,
    ifftn_unitary,
    inverse_fft,
)
from .volume import (
    AcquisitionParams,
    ComplexVolume,
    Grid3,
    ScalarVolume,
    VelocityDataset,
    VelocityFrame,
    extract_velocity,
    synthesize_complex,
)

__all__ = [
    "DegradationConfig",
    "NoiseCalibration",
    "apply_SH",
    "apply_SH_adjoint",
    "calibrate_noise",
    "degrade_dataset",
]

KERNEL_KINDS = ("ideal", "gaussian")
CHANNELS = ("u", "v", "w")


@dataclass(frozen=True)
class DegradationConfig:
    """Degradation settings: decimation rates, kernel choice, noise target, seed.

    ``noise_psnr_db = None`` means noiseless.  ``gaussian_fwhm_bins`` only
    applies to the gaussian kernel and defaults to the low-res dims (response
    halved at the edge of the retained box).
    """

    d: tuple[int, int, int]
    kernel: str = "ideal"
    gaussian_fwhm_bins: tuple[float, float, float] | None = None
    noise_psnr_db: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        d = tuple(int(v) for v in self.d)
        if len(d) != 3 or min(d) < 1:
            raise ParameterError(f"decimation rates must be 3 ints >= 1, got {self.d}")
        object.__setattr__(self, "d", d)
        if self.kernel not in KERNEL_KINDS:
            raise ParameterError(f"kernel must be one of {KERNEL_KINDS}, got {self.kernel!r}")
        if self.noise_psnr_db is not None and not np.isfinite(self.noise_psnr_db):
            raise ParameterError("noise_psnr_db must be finite when present")

    def kernel_spectrum(self, hr: Grid3) -> KernelSpectrum:
        """Concrete kernel spectrum for a given high-resolution grid."""
        if self.kernel == "ideal":
            return ideal_lowpass_spectrum(hr, self.d)
        fwhm = self.gaussian_fwhm_bins
        if fwhm is None:
            fwhm = tuple(dim / rate for dim, rate in zip(hr.dims, self.d))
        return gaussian_spectrum(hr, fwhm)


@dataclass(frozen=True)
class NoiseCalibration:
    """Noise level chosen for a target PSNR and the PSNR actually measured."""

    sigma: float
    achieved_psnr_db: float
    target_psnr_db: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "achieved_psnr_db", float(self.achieved_psnr_db))
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")


def _check_kernel_and_rates(x_grid: Grid3, kernel: KernelSpectrum, d) -> tuple[int, int, int]:
    if kernel.grid.dims != x_grid.dims:
        raise GridMismatchError(
            f"kernel grid {kernel.grid.dims} != volume grid {x_grid.dims}"
        )
    d = tuple(int(v) for v in d)
    for dim, rate, axis in zip(x_grid.dims, d, "xyz"):
        if rate < 1 or dim % rate:
            raise GridMismatchError(
                f"decimation rate {rate} invalid for axis {axis} of dims {x_grid.dims}"
            )
    return d


def apply_SH(x: ComplexVolume, kernel: KernelSpectrum, d: tuple[int, int, int]) -> ComplexVolume:
    """Filter a high-res volume by the kernel, then keep every d-th voxel (offset 0)."""
    d = _check_kernel_and_rates(x.grid, kernel, d)
    filtered = ifftn_unitary(kernel.values * fftn_unitary(x.data))
    return ComplexVolume(x.grid.decimated(d), filtered[:: d[0], :: d[1], :: d[2]])


def apply_SH_adjoint(
    y: ComplexVolume, kernel: KernelSpectrum, d: tuple[int, int, int]
) -> ComplexVolume:
    """Adjoint of :func:`apply_SH`: zero-insertion upsampling then conjugate filtering.

    Implemented spectrally: the unitary spectrum of the zero-upsampled volume
    is the low-res spectrum tiled over alias blocks, scaled by 1/sqrt(d).
    """
    d = tuple(int(v) for v in d)
    hr_dims = tuple(dim * rate for dim, rate in zip(y.grid.dims, d))
    if kernel.grid.dims != hr_dims:
        raise GridMismatchError(
            f"kernel grid {kernel.grid.dims} != upsampled grid {hr_dims}"
        )
    spec_up = np.tile(fftn_unitary(y.data), d) / np.sqrt(np.prod(d))
    out = ifftn_unitary(np.conj(kernel.values) * spec_up)
    return ComplexVolume(y.grid.scaled(d), out)


def calibrate_noise(
    clean_lr_magnitude: ScalarVolume, target_psnr_db: float, seed: int = 0
) -> NoiseCalibration:
    """Choose the k-space noise std that hits a target PSNR on the LR image.

    PSNR is defined on the complex low-res image with peak equal to the
    maximum clean magnitude: adding i.i.d. complex Gaussian noise of std
    ``sigma`` per real/imaginary component (unitary transforms preserve it
    between k-space and image space) gives per-voxel noise power
    ``2 sigma^2``, so ``sigma = peak * 10**(-target/20) / sqrt(2)``.

    The achieved value is measured on one seeded realization; it differs from
    the target only through the sampled noise power.
    """
    if not np.isfinite(target_psnr_db):
        raise ParameterError(f"target PSNR must be finite, got {target_psnr_db}")
    peak = float(clean_lr_magnitude.data.max())
    if peak <= 0:
        raise CalibrationError("cannot calibrate noise against an all-zero magnitude")
    sigma = peak * 10.0 ** (-target_psnr_db / 20.0) / np.sqrt(2.0)
    rng = np.random.default_rng(seed)
    shape = clean_lr_magnitude.grid.dims
    noise = sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    mse = float(np.mean(np.abs(noise) ** 2))
    achieved = 10.0 * np.log10(peak**2 / mse)
    return NoiseCalibration(sigma=sigma, achieved_psnr_db=achieved, target_psnr_db=target_psnr_db)


def _channel_rng(seed: int, frame: int, channel: int) -> np.random.Generator:
    # SeedSequence splitting keeps (frame, channel) streams independent;
    # XOR-style mixing would collide for permuted index pairs.
    return np.random.default_rng([seed, frame, channel])


def _complex_noise(shape, sigma: float, rng: np.random.Generator) -> np.ndarray:
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _degrade_ideal(
    signal: ComplexVolume, lr: Grid3, sigma: float, rng: np.random.Generator | None
) -> ComplexVolume:
    # literal protocol: noise over the full HR k-space, then truncation;
    # equals sqrt(d) * S H + white LR noise for the ideal kernel
    if sigma == 0 and lr.dims == signal.grid.dims:
        # exact identity; a transform round trip would turn zero-magnitude
        # voxels into numerical junk with arbitrary phase
        return signal
    spec = forward_fft(signal)
    data = spec.data
    if sigma > 0 and rng is not None:
        data = data + _complex_noise(data.shape, sigma, rng)
    return inverse_fft(crop_kspace(ComplexVolume(spec.grid, data), lr))


def _degrade_kernel(
    signal: ComplexVolume,
    kernel: KernelSpectrum,
    d: tuple[int, int, int],
    sigma: float,
    rng: np.random.Generator | None,
) -> ComplexVolume:
    # general kernels: sqrt(d) * S H, then white noise on the LR k-space so
    # the noise stays white per the forward model (a subsample after the
    # filter would otherwise fold kernel-shaped noise)
    clean = apply_SH(signal, kernel, d)
    data = np.sqrt(np.prod(d)) * clean.data
    if sigma > 0 and rng is not None:
        spec = fftn_unitary(data) + _complex_noise(data.shape, sigma, rng)
        data = ifftn_unitary(spec)
    return ComplexVolume(clean.grid, data)


def degrade_dataset(
    hr: VelocityDataset, cfg: DegradationConfig
) -> tuple[VelocityDataset, NoiseCalibration]:
    """Simulate the low-resolution acquisition of a high-resolution dataset.

    Per frame and velocity channel: synthesize the complex signal, add
    calibrated complex Gaussian k-space noise, apply the kernel and
    decimation, return to image space, and extract magnitude and velocity.
    Noise streams are split per (frame, channel) from ``cfg.rng_seed``; a
    fixed seed reproduces the dataset bit-for-bit.

    The noise std is calibrated once against the global peak of the
    noiseless LR magnitudes over all frames and channels, so one noise level
    serves the whole dataset.  The stored LR magnitude comes from the u
    channel (channel magnitudes differ only through noise and ringing).
    Note the pipeline scales amplitudes by sqrt(d) relative to a bare
    ``S H``; velocities, living in the phase, are unaffected.

    Returns the LR dataset and the calibration used (sigma 0 and an
    infinite achieved PSNR when ``cfg.noise_psnr_db`` is None).
    """
    d = cfg.d
    lr_grid = hr.grid.decimated(d)
    venc = hr.params.venc
    kernel = None if cfg.kernel == "ideal" else cfg.kernel_spectrum(hr.grid)

    def run_channel(frame: VelocityFrame, ch: str, sigma: float, rng) -> ComplexVolume:
        sig = synthesize_complex(frame.magnitude, frame.channel(ch), venc)
        if kernel is None:
            return _degrade_ideal(sig, lr_grid, sigma, rng)
        return _degrade_kernel(sig, kernel, d, sigma, rng)

    if cfg.noise_psnr_db is None:
        cal = NoiseCalibration(sigma=0.0, achieved_psnr_db=np.inf, target_psnr_db=None)
    else:
        peak_volume = None
        peak = -1.0
        for frame in hr.frames:
            for ch in CHANNELS:
                clean_mag = np.abs(run_channel(frame, ch, 0.0, None).data)
                if float(clean_mag.max()) > peak:
                    peak = float(clean_mag.max())
                    peak_volume = clean_mag
        if peak <= 0:
            raise CalibrationError("noiseless LR magnitude is zero everywhere")
        cal = calibrate_noise(
            ScalarVolume(lr_grid, peak_volume), cfg.noise_psnr_db, seed=cfg.rng_seed
        )

    lr_frames = []
    for f_idx, frame in enumerate(hr.frames):
        out: dict[str, ScalarVolume] = {}
        for c_idx, ch in enumerate(CHANNELS):
            rng = _channel_rng(cfg.rng_seed, f_idx, c_idx)
            lr_sig = run_channel(frame, ch, cal.sigma, rng)
            mag, vel = extract_velocity(lr_sig, venc)
            out[ch] = vel
            if ch == "u":
                out["magnitude"] = mag
        lr_frames.append(
            VelocityFrame(magnitude=out["magnitude"], u=out["u"], v=out["v"], w=out["w"])
        )

    params = AcquisitionParams(
        venc=venc, frame_count=hr.params.frame_count, frame_interval=hr.params.frame_interval
    )
    return VelocityDataset(params, tuple(lr_frames)), cal
