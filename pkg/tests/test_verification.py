import math

import numpy as np

from arcellipse.candidates import InitialEllipse
from arcellipse.clustering import CandidateSet, hierarchical_cluster
from arcellipse.config import Config
from arcellipse.fitting import (EllipseGeom, image_norm, perimeter_approx,
                                with_polarity)
from arcellipse.image_io import compute_gradient_map
from arcellipse.verification import (_collect_band, angular_coverage,
                                     collect_support_inliers, goodness,
                                     verify_candidates)

from helpers import single_ellipse_image, working_geom


def prepared_scene(a=90.0, ratio=0.6, phi=25.0, coverage=360.0):
    cfg = Config()
    img, gt = single_ellipse_image(a, ratio, phi, coverage)
    from arcellipse.image_io import gaussian_downscale
    work = gaussian_downscale(img, cfg.scale)
    gmap = compute_gradient_map(work, cfg.quant_threshold)
    return cfg, gmap, working_geom(gt, cfg.scale)


def candidate_set(geoms):
    cs = CandidateSet()
    for i, g in enumerate(geoms):
        cs.candidates.append(g)
        cs.members.append([i])
    cs.n_center_modes = len(geoms)
    cs.n_orientation_modes = [1] * len(geoms)
    cs.n_axes_modes = {(i, 0): 1 for i in range(len(geoms))}
    return cs


# --- inlier collection -----------------------------------------------------------

def test_collect_count_tracks_perimeter():
    cfg, gmap, truth = prepared_scene()
    inliers = collect_support_inliers(truth, gmap, cfg.epsilon_px, cfg.alpha_deg)
    b = perimeter_approx(truth)
    # Ridge pixels: about one per unit of boundary arc length (digitized
    # curves carry 1.0..1.42 pixels per unit length).
    assert 0.9 * b <= len(inliers) <= 1.45 * b


def test_collect_missed_band_has_no_inliers():
    cfg, gmap, truth = prepared_scene()
    from dataclasses import replace
    # Concentric but 5 tolerances smaller: the band misses the boundary.
    inner = replace(truth, a=truth.a - 5 * cfg.epsilon_px,
                    b=truth.b - 5 * cfg.epsilon_px)
    inliers = collect_support_inliers(inner, gmap, cfg.epsilon_px, cfg.alpha_deg)
    assert len(inliers) == 0


def test_collect_inverted_polarity_rejected():
    cfg, gmap, truth = prepared_scene()
    flipped = with_polarity(truth, -truth.polarity)
    inliers = collect_support_inliers(flipped, gmap, cfg.epsilon_px, cfg.alpha_deg)
    assert len(inliers) == 0


def test_collect_unspecified_polarity_tries_both():
    cfg, gmap, truth = prepared_scene()
    neutral = with_polarity(truth, 0)
    signed = collect_support_inliers(truth, gmap, cfg.epsilon_px, cfg.alpha_deg)
    unsigned = collect_support_inliers(neutral, gmap, cfg.epsilon_px, cfg.alpha_deg)
    assert len(unsigned) >= len(signed)


def test_collect_respects_claimed_mask():
    cfg, gmap, truth = prepared_scene()
    claimed = np.zeros((gmap.height, gmap.width), dtype=bool)
    first = collect_support_inliers(truth, gmap, cfg.epsilon_px, cfg.alpha_deg)
    claimed[first[:, 1], first[:, 0]] = True
    second = collect_support_inliers(truth, gmap, cfg.epsilon_px, cfg.alpha_deg,
                                     claimed)
    assert len(second) == 0


# --- angular coverage ---------------------------------------------------------------

def test_coverage_full_boundary():
    e = EllipseGeom(0, 0, 60, 35, 20)
    pts = e.boundary_points(np.arange(0.0, 360.0, 0.5))
    assert angular_coverage(pts, e) == 360.0


def test_coverage_half_boundary():
    e = EllipseGeom(0, 0, 60, 35, 0)
    pts = e.boundary_points(np.arange(0.0, 180.0, 0.25))
    cov = angular_coverage(pts, e)
    assert abs(cov - 180.0) <= 2.0


def test_coverage_single_speck_excluded():
    e = EllipseGeom(0, 0, 60, 35, 0)
    pts = e.boundary_points(np.array([45.0]))
    assert angular_coverage(pts, e) == 0.0


def test_coverage_empty():
    e = EllipseGeom(0, 0, 60, 35, 0)
    assert angular_coverage(np.empty((0, 2)), e) == 0.0


def test_coverage_counts_only_runs():
    e = EllipseGeom(0, 0, 60, 35, 0)
    # Two adjacent occupied bins (a run of 2) plus one isolated bin.
    pts = e.boundary_points(np.array([40.5, 41.5, 42.5, 43.5, 181.0]))
    cov = angular_coverage(pts, e)
    assert abs(cov - 4.0) < 1e-9


# --- goodness -----------------------------------------------------------------------

def test_goodness_ideal_ellipse_close_to_one():
    cfg, gmap, truth = prepared_scene()
    assert goodness(truth, gmap, cfg) >= 0.9


def test_goodness_zero_without_inliers():
    cfg, gmap, truth = prepared_scene()
    from dataclasses import replace
    off = replace(truth, cx=truth.cx + 40.0)
    assert goodness(off, gmap, cfg) <= 0.05


def test_goodness_matches_formula():
    cfg, gmap, truth = prepared_scene()
    support = _collect_band(truth, gmap, cfg.epsilon_px, cfg.alpha_deg)
    strict = support.strict(cfg.epsilon_px / 2.0)
    b = perimeter_approx(truth)
    cov = angular_coverage(strict.pixels, truth, cfg.coverage_bin_deg,
                           cfg.coverage_min_run)
    expected = math.sqrt(min(1.0, int(strict.ridge.sum()) / b) * cov / 360.0)
    assert abs(goodness(truth, gmap, cfg) - expected) < 1e-12


def test_goodness_arithmetic_quarter_inliers_half_coverage():
    # sqrt(0.25 * 0.5) with the stated clamp
    assert abs(math.sqrt(min(1.0, 0.25) * (180.0 / 360.0)) - 0.3536) < 5e-5


# --- verification -------------------------------------------------------------------

def test_verify_admits_ideal_candidate():
    cfg, gmap, truth = prepared_scene()
    norm = image_norm(gmap.width, gmap.height)
    dets = verify_candidates(candidate_set([truth]), gmap, cfg, norm)
    assert len(dets) == 1
    d = dets[0]
    assert d.inlier_ratio >= cfg.t_r
    assert d.coverage_deg >= cfg.t_ac_deg
    assert math.hypot(d.geom.cx - truth.cx, d.geom.cy - truth.cy) < 1.0


def test_verify_rejects_quarter_arc():
    cfg, gmap, truth = prepared_scene(coverage=90.0)
    norm = image_norm(gmap.width, gmap.height)
    dets = verify_candidates(candidate_set([truth]), gmap, cfg, norm)
    assert dets == []


def test_verify_duplicates_starved_by_masking():
    cfg, gmap, truth = prepared_scene()
    from dataclasses import replace
    near_dup = replace(truth, cx=truth.cx + 0.3, a=truth.a + 0.4)
    norm = image_norm(gmap.width, gmap.height)
    dets = verify_candidates(candidate_set([truth, near_dup]), gmap, cfg, norm)
    assert len(dets) == 1


def test_verify_output_order_nonincreasing_buckets():
    cfg, gmap, truth = prepared_scene(coverage=360.0)
    from dataclasses import replace
    weak = replace(truth, cx=truth.cx + 1.2, b=truth.b - 1.0)
    norm = image_norm(gmap.width, gmap.height)
    dets = verify_candidates(candidate_set([weak, truth]), gmap, cfg, norm)
    buckets = [min(cfg.goodness_buckets - 1, int(d.goodness * cfg.goodness_buckets))
               for d in dets]
    assert buckets == sorted(buckets, reverse=True)


def test_verify_refit_never_lowers_inliers_on_clean_input():
    cfg, gmap, truth = prepared_scene()
    from dataclasses import replace
    rough = replace(truth, a=truth.a + 1.0, b=truth.b - 0.8)
    norm = image_norm(gmap.width, gmap.height)
    base = collect_support_inliers(rough, gmap, cfg.epsilon_px, cfg.alpha_deg)
    dets = verify_candidates(candidate_set([rough]), gmap, cfg, norm)
    assert len(dets) == 1
    assert dets[0].inlier_count >= len(base)


def test_verify_admission_soundness_remeasured():
    cfg, gmap, truth = prepared_scene()
    norm = image_norm(gmap.width, gmap.height)
    dets = verify_candidates(candidate_set([truth]), gmap, cfg, norm)
    for d in dets:
        inliers = collect_support_inliers(d.geom, gmap, cfg.epsilon_px,
                                          cfg.alpha_deg)
        assert len(inliers) >= cfg.t_r * perimeter_approx(d.geom)
        band = _collect_band(d.geom, gmap, cfg.epsilon_px, cfg.alpha_deg)
        cov = angular_coverage(band.pixels, d.geom, cfg.coverage_bin_deg,
                               cfg.coverage_min_run)
        assert cov >= cfg.t_ac_deg
