"""Flat key=value run configuration for end-to-end experiments.

The format is a diff-able text file: one ``key = value`` per line, ``#``
comments and blank lines ignored, keys unordered, unknown keys rejected.
``none`` (case-insensitive) clears optional values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config_text", "format_config_text"]

PHANTOMS = ("poiseuille", "helix")
KERNELS = ("ideal", "gaussian")
PRIORS = ("trilinear", "zero-fill")
BASELINES = ("trilinear", "tricubic")


def _parse_triple(text: str, kind, key: str):
    parts = [p.strip() for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 3 comma-separated values, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs besides its output directory."""

    phantom: str = "poiseuille"
    dims: tuple[int, int, int] = (64, 64, 64)
    frames: int = 5
    venc: float = 150.0
    vmax: float = 120.0
    radius: float = 0.0  # voxels; 0 picks 0.35 * smallest transverse dim
    axis: str = "z"
    magnitude_in: float = 1.0
    magnitude_out: float = 0.0
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    factor: tuple[int, int, int] = (4, 4, 4)
    kernel: str = "ideal"
    kernel_fwhm: tuple[float, float, float] | None = None
    noise_psnr: float | None = 15.0
    seed: int = 1234
    tau: float = 0.01
    prior: str = "trilinear"
    baseline: str = "trilinear"
    mask_threshold: float = 0.1

    def __post_init__(self):
        if self.phantom not in PHANTOMS:
            raise ConfigError(f"phantom must be one of {PHANTOMS}, got {self.phantom!r}")
        if self.kernel not in KERNELS:
            raise ConfigError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.prior not in PRIORS:
            raise ConfigError(f"prior must be one of {PRIORS}, got {self.prior!r}")
        if self.baseline not in BASELINES:
            raise ConfigError(f"baseline must be one of {BASELINES}, got {self.baseline!r}")
        if self.axis not in ("x", "y", "z"):
            raise ConfigError(f"axis must be x, y or z, got {self.axis!r}")
        if min(self.dims) < 1 or min(self.factor) < 1:
            raise ConfigError("dims and factor entries must be >= 1")
        for dim, rate in zip(self.dims, self.factor):
            if dim % rate:
                raise ConfigError(f"factor {self.factor} does not divide dims {self.dims}")
        if self.frames < 1:
            raise ConfigError(f"frames must be >= 1, got {self.frames}")
        if not self.venc > 0:
            raise ConfigError(f"venc must be > 0, got {self.venc}")
        if not 0 < abs(self.vmax) < self.venc:
            raise ConfigError(f"vmax must satisfy 0 < |vmax| < venc, got {self.vmax}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if not 0 < self.mask_threshold < 1:
            raise ConfigError(f"mask_threshold must be in (0, 1), got {self.mask_threshold}")

    def effective_radius(self) -> float:
        if self.radius > 0:
            return self.radius
        trans = [d for i, d in enumerate(self.dims) if i != "xyz".index(self.axis)]
        return 0.35 * min(trans)


_TRIPLE_INT = {"dims", "factor"}
_TRIPLE_FLOAT = {"spacing", "kernel_fwhm"}
_OPTIONAL = {"kernel_fwhm", "noise_psnr"}
_INT = {"frames", "seed"}
_FLOAT = {"venc", "vmax", "radius", "magnitude_in", "magnitude_out", "noise_psnr", "tau", "mask_threshold"}


def parse_config_text(text: str) -> RunConfig:
    """Parse a key=value config document into a validated RunConfig."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key in _OPTIONAL and raw.lower() == "none":
            values[key] = None
        elif key in _TRIPLE_INT:
            values[key] = _parse_triple(raw, int, key)
        elif key in _TRIPLE_FLOAT:
            values[key] = _parse_triple(raw, float, key)
        elif key in _INT:
            try:
                values[key] = int(raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
        elif key in _FLOAT:
            try:
                values[key] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
        else:
            values[key] = raw
    return RunConfig(**values)


def format_config_text(cfg: RunConfig) -> str:
    """Serialize a RunConfig so that parsing it back reproduces the run."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            rendered = "none"
        elif isinstance(value, tuple):
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"
