"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`MetaBackscatterError`, so callers (and the CLI) can catch model
failures without swallowing programming errors.
"""


class MetaBackscatterError(Exception):
    """Base class for all package errors."""

    kind = "error"


class GeometryError(MetaBackscatterError, ValueError):
    """A geometry or material violates its physical invariants."""

    kind = "invalid_geometry"

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CalibrationRangeError(MetaBackscatterError, ValueError):
    """An environmental state lies outside the calibrated range."""

    kind = "out_of_calibration"


class ModelValidityError(MetaBackscatterError):
    """The requested evaluation falls outside the model's validity domain."""

    kind = "model_validity"


class ModelSingularityError(MetaBackscatterError):
    """A network composition hit a pole (e.g. a parallel pair summing to zero)."""

    kind = "model_singularity"


class NoResonanceError(MetaBackscatterError):
    """No reflection dip could be located inside the band."""

    kind = "no_resonance"


class NoTagDetectedError(MetaBackscatterError):
    """A measured spectrum shows no usable resonance."""

    kind = "no_tag_detected"


class LinkInfeasibleError(MetaBackscatterError):
    """The link budget cannot reach the requested SNR."""

    kind = "link_infeasible"


class GridMismatchError(MetaBackscatterError, ValueError):
    """Two spectra that must share a frequency grid do not."""

    kind = "grid_mismatch"


class SearchError(MetaBackscatterError):
    """A design search produced no valid candidate."""

    kind = "search_failed"


class ConfigError(MetaBackscatterError, ValueError):
    """Configuration failed validation; carries every violation found."""

    kind = "config_invalid"

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
