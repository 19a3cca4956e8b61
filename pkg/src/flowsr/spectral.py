"""Unitary 3D Fourier transforms, kernel spectra, k-space crop/pad, alias folding.

Frequency conventions, fixed once here and reused by every other module:

* Unitary normalization: forward and inverse transforms each carry 1/sqrt(N),
  so Parseval holds exactly and decimation/filtering adjoints stay clean.
* DC-first (unshifted) bin ordering on all spectra.
* The retained low-frequency box of an axis of high-res length M cropped to
  low-res length L keeps bins ``[0, ceil(L/2) - 1]`` and ``[M - floor(L/2),
  M - 1]``.  Signals are complex-valued, so no Hermitian symmetry is assumed
  or enforced.
* Subsampling by rate ``d`` per axis keeps voxel index 0 of every block, and
  folds the spectrum so that low-res bin ``kappa`` aliases high-res bins
  ``kappa + b * L`` for block index ``b in [0, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import GridMismatchError, ParameterError
from .volume import ComplexVolume, Grid3

__all__ = [
    "FourierEngine",
    "KernelSpectrum",
    "FoldedSpectrum",
    "forward_fft",
    "inverse_fft",
    "fftn_unitary",
    "ifftn_unitary",
    "retained_axis_indices",
    "ideal_lowpass_spectrum",
    "gaussian_spectrum",
    "crop_kspace",
    "zero_pad_kspace",
    "fold_spectrum",
]


def fftn_unitary(a: np.ndarray) -> np.ndarray:
    """Forward unitary 3D DFT of a raw array, DC-first ordering."""
    return scipy.fft.fftn(a, norm="ortho")


def ifftn_unitary(a: np.ndarray) -> np.ndarray:
    """Inverse unitary 3D DFT of a raw array."""
    return scipy.fft.ifftn(a, norm="ortho")


def forward_fft(x: ComplexVolume) -> ComplexVolume:
    """Unitary 3D DFT of a volume; the spectrum keeps the volume's grid."""
    return ComplexVolume(x.grid, fftn_unitary(x.data))


def inverse_fft(X: ComplexVolume) -> ComplexVolume:
    """Exact inverse of :func:`forward_fft`."""
    return ComplexVolume(X.grid, ifftn_unitary(X.data))


class FourierEngine:
    """Transform frontend holding per-instance state.

    The contract is one engine per worker thread: instances are cheap, and
    the ``workers`` setting (threads used inside a single transform) is
    private to each.  Transforms are unitary in both directions.
    """

    def __init__(self, workers: int | None = None):
        self.workers = workers

    def forward(self, x: ComplexVolume) -> ComplexVolume:
        return ComplexVolume(x.grid, scipy.fft.fftn(x.data, norm="ortho", workers=self.workers))

    def inverse(self, X: ComplexVolume) -> ComplexVolume:
        return ComplexVolume(X.grid, scipy.fft.ifftn(X.data, norm="ortho", workers=self.workers))


@dataclass(frozen=True, eq=False)
class KernelSpectrum:
    """Per-frequency multipliers of the convolution operator, DC-first.

    ``values`` has the high-resolution grid's shape.  Applying the operator
    to a volume is a pointwise multiply of its unitary spectrum by ``values``.
    """

    grid: Grid3
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != self.grid.dims:
            raise GridMismatchError(
                f"kernel values shape {vals.shape} != grid dims {self.grid.dims}"
            )
        if not np.isfinite(vals).all():
            raise ParameterError("kernel spectrum must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class FoldedSpectrum:
    """Aliased sub-blocks of a kernel spectrum under decimation.

    ``blocks[bx, by, bz]`` is the low-res-sized volume of kernel values at
    high-res bins ``(kx + bx*ml, ky + by*nl, kz + bz*sl)``; ``gram`` is the
    per-low-res-bin sum of squared magnitudes over all blocks.
    """

    lr_grid: Grid3
    d: tuple[int, int, int]
    blocks: np.ndarray = field(repr=False)  # (dr, dc, ds, ml, nl, sl) complex
    gram: np.ndarray = field(repr=False)  # (ml, nl, sl) real


def _check_divisible(hr: Grid3, d: tuple[int, int, int]) -> tuple[int, int, int]:
    d = tuple(int(v) for v in d)
    if len(d) != 3 or min(d) < 1:
        raise ParameterError(f"decimation rates must be 3 ints >= 1, got {d}")
    for dim, rate, axis in zip(hr.dims, d, "xyz"):
        if dim % rate:
            raise GridMismatchError(
                f"decimation rate {rate} does not divide axis {axis} of dims {hr.dims}"
            )
    return d


def retained_axis_indices(hr_dim: int, lr_dim: int) -> np.ndarray:
    """High-res bin indices kept when an axis is cropped from hr_dim to lr_dim.

    ceil(lr_dim/2) nonnegative frequencies and floor(lr_dim/2) negative ones,
    in the order the low-res spectrum stores them.
    """
    if lr_dim > hr_dim:
        raise ParameterError(f"cannot retain {lr_dim} bins from an axis of {hr_dim}")
    lo = (lr_dim + 1) // 2
    hi = lr_dim - lo
    return np.concatenate([np.arange(lo), np.arange(hr_dim - hi, hr_dim)])


def _box_indices(hr: Grid3, lr: Grid3):
    return tuple(retained_axis_indices(h, l) for h, l in zip(hr.dims, lr.dims))


def ideal_lowpass_spectrum(hr: Grid3, d: tuple[int, int, int]) -> KernelSpectrum:
    """0/1 spectrum keeping exactly the retained low-frequency box for rate ``d``."""
    d = _check_divisible(hr, d)
    lr_dims = tuple(dim // rate for dim, rate in zip(hr.dims, d))
    values = np.zeros(hr.dims)
    ix, iy, iz = (retained_axis_indices(h, l) for h, l in zip(hr.dims, lr_dims))
    values[np.ix_(ix, iy, iz)] = 1.0
    return KernelSpectrum(hr, values)


def gaussian_spectrum(hr: Grid3, fwhm_bins: tuple[float, float, float]) -> KernelSpectrum:
    """Separable Gaussian frequency response, unit gain at DC.

    ``fwhm_bins`` is the full width at half maximum of the response along
    each axis, measured in frequency bins; widening it without bound tends
    to the all-pass (identity) spectrum.
    """
    fwhm = tuple(float(v) for v in fwhm_bins)
    if len(fwhm) != 3 or min(fwhm) <= 0:
        raise ParameterError(f"fwhm must be 3 positive values, got {fwhm_bins}")
    axes = []
    for dim, width in zip(hr.dims, fwhm):
        k = np.fft.fftfreq(dim, d=1.0 / dim)  # signed bin index, DC-first
        axes.append(np.exp(-4.0 * np.log(2.0) * (k / width) ** 2))
    values = axes[0][:, None, None] * axes[1][None, :, None] * axes[2][None, None, :]
    return KernelSpectrum(hr, values)


def crop_kspace(X: ComplexVolume, lr: Grid3) -> ComplexVolume:
    """Copy the retained low-frequency box of a spectrum into an LR-sized spectrum."""
    for h, l, axis in zip(X.grid.dims, lr.dims, "xyz"):
        if l > h:
            raise ParameterError(f"crop target exceeds source on axis {axis}: {l} > {h}")
    ix, iy, iz = _box_indices(X.grid, lr)
    return ComplexVolume(lr, X.data[np.ix_(ix, iy, iz)])


def zero_pad_kspace(X: ComplexVolume, hr: Grid3) -> ComplexVolume:
    """Adjoint of :func:`crop_kspace`: place the box back, zeros elsewhere."""
    for h, l, axis in zip(hr.dims, X.grid.dims, "xyz"):
        if l > h:
            raise ParameterError(f"pad target smaller than source on axis {axis}: {h} < {l}")
    out = np.zeros(hr.dims, dtype=np.complex128)
    ix, iy, iz = _box_indices(hr, X.grid)
    out[np.ix_(ix, iy, iz)] = X.data
    return ComplexVolume(hr, out)


def fold_blocks(values: np.ndarray, d: tuple[int, int, int]) -> np.ndarray:
    """Rearrange an HR-shaped array into its (dr, dc, ds, ml, nl, sl) alias blocks."""
    dr, dc, ds = d
    mh, nh, sh = values.shape
    ml, nl, sl = mh // dr, nh // dc, sh // ds
    # axis split f -> (b, kappa) with f = b * L + kappa
    return values.reshape(dr, ml, dc, nl, ds, sl).transpose(0, 2, 4, 1, 3, 5)


def unfold_blocks(blocks: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fold_blocks`."""
    dr, dc, ds, ml, nl, sl = blocks.shape
    return blocks.transpose(0, 3, 1, 4, 2, 5).reshape(dr * ml, dc * nl, ds * sl)


def fold_spectrum(spec: KernelSpectrum, d: tuple[int, int, int]) -> FoldedSpectrum:
    """Partition a kernel spectrum into its decimation alias blocks.

    Block ``b`` holds the kernel value at high-res bin ``kappa + b * L`` per
    axis for every low-res bin ``kappa`` (a pure re-indexing of the spectrum),
    and ``gram`` accumulates ``sum_b |block_b|^2``.
    """
    d = _check_divisible(spec.grid, d)
    lr = spec.grid.decimated(d)
    blocks = np.ascontiguousarray(fold_blocks(spec.values, d))
    gram = np.abs(blocks) ** 2
    gram = gram.sum(axis=(0, 1, 2))
    blocks.setflags(write=False)
    gram.setflags(write=False)
    return FoldedSpectrum(lr, d, blocks, gram)
