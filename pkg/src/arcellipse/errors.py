"""Exception types raised across the detector."""


class DetectorError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedFormatError(DetectorError):
    """Image file is not an 8-bit graymap or 8-bit gray/true-color PNG."""


class CorruptFileError(DetectorError):
    """Image file header and payload disagree."""


class TooSmallError(DetectorError):
    """Image is below the 8x8 minimum required for detection."""


class EmptyRegionError(DetectorError):
    """An operation received an empty pixel region."""


class DegenerateRegionError(DetectorError):
    """Support region collapsed to a point (rectangle terminals coincide)."""


class SingularFitError(DetectorError):
    """Scatter matrix is rank-deficient (too few or collinear points)."""


class NonEllipseError(DetectorError):
    """Conic fit converged to a hyperbola, parabola or degenerate conic."""


class AtCenterError(DetectorError):
    """Normal direction is undefined at the ellipse center."""


class InsufficientSamplesError(DetectorError):
    """Not enough measurements to fit a trend."""
