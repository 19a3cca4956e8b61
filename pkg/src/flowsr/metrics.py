"""Flow-region evaluation metrics: masked PSNR and mean relative velocity error.

Metrics are strictly mask-local: voxels outside the mask never influence a
value.  PSNR is reported per velocity component; the relative error treats
the three components as one vector field and normalizes by the peak masked
reference speed (per-voxel normalization is available but explodes where the
reference flow vanishes).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, MaskError, ParameterError
from .volume import Grid3, ScalarVolume, VelocityDataset, VelocityFrame

__all__ = [
    "FlowMask",
    "EvalRecord",
    "EvalReport",
    "make_mask",
    "psnr",
    "mean_relative_error",
    "evaluate",
]

CSV_HEADER = ("frame", "channel", "method", "metric", "value")


@dataclass(frozen=True, eq=False)
class FlowMask:
    """Boolean voxel selection on a grid; at least one voxel must be set."""

    grid: Grid3
    voxels: np.ndarray = field(repr=False)

    def __post_init__(self):
        vox = np.array(self.voxels, dtype=bool, copy=True)
        if vox.shape != self.grid.dims:
            raise GridMismatchError(f"mask shape {vox.shape} != grid dims {self.grid.dims}")
        if not vox.any():
            raise MaskError("flow mask is empty")
        vox.setflags(write=False)
        object.__setattr__(self, "voxels", vox)

    @property
    def count(self) -> int:
        return int(self.voxels.sum())


def make_mask(magnitude: ScalarVolume, threshold_fraction: float = 0.1) -> FlowMask:
    """Mask of voxels whose magnitude reaches a fraction of the peak magnitude."""
    if not 0 < threshold_fraction < 1:
        raise ParameterError(
            f"threshold_fraction must be in (0, 1), got {threshold_fraction}"
        )
    peak = float(magnitude.data.max())
    if peak <= 0:
        raise MaskError("magnitude is zero everywhere; no flow region to mask")
    return FlowMask(magnitude.grid, magnitude.data >= threshold_fraction * peak)


def psnr(
    est: ScalarVolume, ref: ScalarVolume, mask: FlowMask, peak: float | None = None
) -> float:
    """Peak signal-to-noise ratio in dB over the masked voxels.

    ``peak`` defaults to the maximum |ref| inside the mask and must be
    positive.  Identical inputs return ``inf`` (the sentinel for a zero MSE).
    """
    if est.grid.dims != ref.grid.dims or est.grid.dims != mask.grid.dims:
        raise GridMismatchError("est, ref and mask must share one grid")
    sel = mask.voxels
    if peak is None:
        peak = float(np.abs(ref.data[sel]).max())
    if not peak > 0:
        raise ParameterError(f"peak must be > 0, got {peak}")
    mse = float(np.mean((est.data[sel] - ref.data[sel]) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


def _speed(frame: VelocityFrame, sel: np.ndarray) -> np.ndarray:
    return np.sqrt(frame.u.data[sel] ** 2 + frame.v.data[sel] ** 2 + frame.w.data[sel] ** 2)


def mean_relative_error(
    est: VelocityFrame, ref: VelocityFrame, mask: FlowMask, per_voxel_norm: bool = False
) -> float:
    """Mean relative velocity-vector error in percent over the masked voxels.

    The error at a voxel is the Euclidean norm of the (u, v, w) difference.
    By default it is normalized by the peak masked reference speed; with
    ``per_voxel_norm`` each voxel is normalized by its own reference speed
    instead (voxels with zero reference speed are excluded).
    """
    if est.grid.dims != ref.grid.dims or est.grid.dims != mask.grid.dims:
        raise GridMismatchError("est, ref and mask must share one grid")
    sel = mask.voxels
    diff = np.sqrt(
        (est.u.data[sel] - ref.u.data[sel]) ** 2
        + (est.v.data[sel] - ref.v.data[sel]) ** 2
        + (est.w.data[sel] - ref.w.data[sel]) ** 2
    )
    ref_speed = _speed(ref, sel)
    if per_voxel_norm:
        nonzero = ref_speed > 0
        if not nonzero.any():
            raise ParameterError("reference speed is zero at every masked voxel")
        return 100.0 * float(np.mean(diff[nonzero] / ref_speed[nonzero]))
    peak = float(ref_speed.max())
    if peak <= 0:
        raise ParameterError("peak reference speed over the mask is zero")
    return 100.0 * float(np.mean(diff) / peak)


@dataclass(frozen=True)
class EvalRecord:
    frame: int
    channel: str
    method: str
    metric: str
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class EvalReport:
    """Flat list of metric records plus aggregation and CSV serialization."""

    records: tuple[EvalRecord, ...]

    def values(self, method: str, metric: str, channel: str | None = None) -> list[float]:
        return [
            r.value
            for r in self.records
            if r.method == method and r.metric == metric and (channel is None or r.channel == channel)
        ]

    def mean(self, method: str, metric: str, channel: str | None = None) -> float:
        vals = self.values(method, metric, channel)
        if not vals:
            raise ParameterError(f"no records for method={method!r} metric={metric!r}")
        return float(np.mean(vals))

    def to_csv(self) -> str:
        """CSV with header ``frame,channel,method,metric,value`` (LF endings)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow([r.frame, r.channel, r.method, r.metric, repr(r.value)])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "EvalReport":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ParameterError(f"unexpected CSV header {header}")
        records = tuple(
            EvalRecord(int(row[0]), row[1], row[2], row[3], float(row[4])) for row in reader
        )
        return EvalReport(records)


def evaluate(
    sr: VelocityDataset,
    ref: VelocityDataset,
    baseline: VelocityDataset | None = None,
    mask_threshold: float = 0.1,
    masks: list[FlowMask] | None = None,
    sr_method: str = "fsr",
    baseline_method: str = "trilinear",
) -> EvalReport:
    """Score reconstructions against a reference inside per-frame flow masks.

    Masks come from thresholding the reference magnitude frame by frame
    unless explicit ``masks`` are supplied.  Every frame yields one PSNR
    record per velocity channel and method, plus one relative-error record
    per method (channel ``all``).  PSNR uses the frame's peak masked
    reference speed as the shared peak for all three channels, so channels
    with no reference flow stay well-defined and methods remain comparable.
    """
    candidates = [(sr_method, sr)] + ([(baseline_method, baseline)] if baseline is not None else [])
    for name, ds in candidates:
        if len(ds.frames) != len(ref.frames):
            raise GridMismatchError(f"{name} frame count differs from reference")
        if ds.grid.dims != ref.grid.dims:
            raise GridMismatchError(f"{name} grid differs from reference")
    if masks is not None and len(masks) != len(ref.frames):
        raise GridMismatchError("need one mask per frame")

    records = []
    for f_idx, ref_frame in enumerate(ref.frames):
        mask = masks[f_idx] if masks is not None else make_mask(ref_frame.magnitude, mask_threshold)
        sel = mask.voxels
        peak_speed = float(_speed(ref_frame, sel).max())
        if peak_speed <= 0:
            raise ParameterError(f"frame {f_idx}: reference flow is zero inside the mask")
        for method, ds in candidates:
            frame = ds.frames[f_idx]
            for ch in ("u", "v", "w"):
                records.append(
                    EvalRecord(
                        frame=f_idx,
                        channel=ch,
                        method=method,
                        metric="psnr_db",
                        value=psnr(frame.channel(ch), ref_frame.channel(ch), mask, peak=peak_speed),
                    )
                )
            records.append(
                EvalRecord(
                    frame=f_idx,
                    channel="all",
                    method=method,
                    metric="mre_percent",
                    value=mean_relative_error(frame, ref_frame, mask),
                )
            )
    return EvalReport(tuple(records))
