"""Ellipse detection from arc-support line segments.

The detector extracts line segments whose support regions curve, links them
into groups along latent curves, generates initial ellipses locally (salient
groups) and globally (constrained group pairs) with a superposition-friendly
direct least-squares fit, collapses duplicates by hierarchical mean-shift
clustering, and verifies candidates by inlier ratio and angular coverage.
"""

from .config import Config
from .errors import (AtCenterError, CorruptFileError, DegenerateRegionError,
                     DetectorError, EmptyRegionError, InsufficientSamplesError,
                     NonEllipseError, SingularFitError, TooSmallError,
                     UnsupportedFormatError)
from .fitting import (EllipseGeom, NormTransform, ScatterMatrix,
                      accumulate_scatter, ellipse_normal, fit_ellipse,
                      fit_points, image_norm, merge_scatter, perimeter_approx,
                      rosin_distance)
from .image_io import (GradientMap, GrayImage, compute_gradient_map,
                       gaussian_downscale, load_grayscale, write_pgm)
from .pipeline import PipelineStats, detect
from .verification import Detection

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Detection",
    "EllipseGeom",
    "GradientMap",
    "GrayImage",
    "NormTransform",
    "PipelineStats",
    "ScatterMatrix",
    "accumulate_scatter",
    "compute_gradient_map",
    "detect",
    "ellipse_normal",
    "fit_ellipse",
    "fit_points",
    "gaussian_downscale",
    "image_norm",
    "load_grayscale",
    "merge_scatter",
    "perimeter_approx",
    "rosin_distance",
    "write_pgm",
    "DetectorError",
    "UnsupportedFormatError",
    "CorruptFileError",
    "TooSmallError",
    "EmptyRegionError",
    "DegenerateRegionError",
    "SingularFitError",
    "NonEllipseError",
    "AtCenterError",
    "InsufficientSamplesError",
]
