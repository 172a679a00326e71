"""Exception types raised across the package."""


class ClustCVError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(ClustCVError, ValueError):
    pass


class UnsupportedError(ClustCVError, ValueError):
    """Input is valid in general but not for this operation (e.g. missing data)."""


class DegenerateCovarianceError(ClustCVError, ValueError):
    pass


class MissingClassError(ClustCVError, ValueError):
    """A class label has no training rows."""

    def __init__(self, missing):
        self.missing = sorted(int(g) for g in missing)
        super().__init__(f"classes without training rows: {self.missing}")


class InvalidIntervalError(ClustCVError, ValueError):
    pass


class InfeasibleConfigurationError(ClustCVError, RuntimeError):
    pass
