"""Detector configuration.

Only ``t_r`` and ``t_ac_deg`` are meant to be tuned per application; the
remaining knobs are intrinsic and ship with fixed defaults that work across
a wide variety of images.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Config:
    # Arc segment extraction
    t_ai_deg: float = 2.25        # min angle interval between sub-region angles
    alpha_deg: float = 22.5       # level-line / normal angle tolerance
    scale: float = 0.8            # pre-detection downscale ratio
    quant_threshold: float = 5.22  # gradient magnitude quantization floor
    min_region_pixels: int = 10
    region_density: float = 0.7   # pixel density floor inside the region rectangle
    min_ls_length: float = 5.0    # segments shorter than this are noise

    # Group linking
    link_window_factor: float = 8.0    # statistical window side = factor * epsilon
    link_extension_factor: float = 0.5  # window center offset past the terminal

    # Initial ellipse generation
    t_ss: float = 0.25            # saliency floor for single-group fits
    epsilon_px: float = 2.0       # inlier distance tolerance
    rho_d_px: float = -6.0        # region-restriction slack (-3 * epsilon)
    local_branch: bool = True     # fit salient single groups as well as pairs

    # Clustering
    center_bandwidth_frac: float = 0.005   # of the image diagonal
    orientation_bandwidth_deg: float = 10.0
    axes_bandwidth_frac: float = 0.04      # of the partition's median semi-major
    near_circle_ratio: float = 0.95        # b/a above this: orientation wildcard
    mean_shift_max_iter: int = 20

    # Verification
    t_r: float = 0.6              # inlier count must reach t_r * perimeter
    t_ac_deg: float = 165.0       # angular coverage floor, degrees
    coverage_bin_deg: float = 2.0
    coverage_min_run: int = 2     # bins; isolated specks are discarded
    goodness_buckets: int = 100

    # Reporting
    polarity_mode: str = "all"    # all | positive | negative

    def bandwidth_floor(self) -> float:
        return 2.0 * self.epsilon_px
