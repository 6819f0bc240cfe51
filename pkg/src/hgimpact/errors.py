"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """A parameter table, config file, or cross-reference is missing or inconsistent."""


class IngestError(PipelineError):
    """Input data is structurally unusable (duplicates, dangling references)."""


class OutsideDomainError(PipelineError):
    """A plant location falls outside the simulation grid."""

    def __init__(self, plant_id: str, lat: float, lon: float):
        self.plant_id = plant_id
        self.lat = lat
        self.lon = lon
        super().__init__(
            f"plant {plant_id} at ({lat:.4f}, {lon:.4f}) lies outside the grid domain"
        )


class CflError(PipelineError):
    """The solver step exceeds the stable limit; carries the maximal stable dt."""

    def __init__(self, dt_s: float, dt_max_s: float):
        self.dt_s = dt_s
        self.dt_max_s = dt_max_s
        super().__init__(
            f"dt={dt_s:g} s violates the stability limit; maximal stable dt is {dt_max_s:g} s"
        )


class StageError(PipelineError):
    """Wraps an error raised inside one pipeline stage with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
