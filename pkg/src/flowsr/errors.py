"""Exception types raised across the package."""


class FlowSRError(Exception):
    """Base class for all flowsr errors."""


class ParameterError(FlowSRError, ValueError):
    """An argument is outside its documented domain (e.g. venc <= 0)."""


class GridMismatchError(FlowSRError, ValueError):
    """Volumes that must share a grid (or a divisibility relation) do not."""


class AliasingError(FlowSRError, ValueError):
    """Velocity magnitude reaches or exceeds the encoding limit.

    Carries the number of offending voxels in ``voxel_count``.
    """

    def __init__(self, voxel_count: int, venc: float):
        self.voxel_count = voxel_count
        self.venc = venc
        super().__init__(
            f"{voxel_count} voxel(s) with |velocity| >= venc ({venc:g}); "
            "aliased input cannot be synthesized"
        )


class CalibrationError(FlowSRError, ValueError):
    """Noise calibration is impossible (e.g. all-zero magnitude)."""


class MaskError(FlowSRError, ValueError):
    """A flow mask is empty or otherwise unusable for metrics."""


class SizeGuardError(FlowSRError, ValueError):
    """A dense-oracle build would exceed the allocation guard."""


class FormatError(FlowSRError):
    """A volume file is malformed; message states the failing byte offset."""


class ConfigError(FlowSRError, ValueError):
    """A run configuration file or flag set fails validation."""
