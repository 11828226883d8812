"""Small angle helpers shared by every stage.

One convention package-wide: the image y axis points down, angles are in
degrees, measured from +x with atan2(y, x), and stored in [0, 360) unless a
signed difference is wanted.
"""

from __future__ import annotations

import math

import numpy as np


def norm_deg(angle):
    """Map an angle (scalar or array) into [0, 360)."""
    return np.mod(angle, 360.0)


def wrap_deg(angle):
    """Map a signed angular difference into (-180, 180]."""
    wrapped = np.mod(angle, 360.0)
    return np.where(wrapped > 180.0, wrapped - 360.0, wrapped)


def wrap_deg_scalar(angle: float) -> float:
    wrapped = angle % 360.0
    return wrapped - 360.0 if wrapped > 180.0 else wrapped


def circular_mean_deg(angles_deg) -> float:
    """Mean direction of a set of angles; result in [0, 360)."""
    rad = np.radians(np.asarray(angles_deg, dtype=float))
    s = float(np.sin(rad).sum())
    c = float(np.cos(rad).sum())
    return math.degrees(math.atan2(s, c)) % 360.0


def unit_vector_deg(angle_deg: float) -> np.ndarray:
    rad = math.radians(angle_deg)
    return np.array([math.cos(rad), math.sin(rad)])
