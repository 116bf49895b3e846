import json
import os

import numpy as np
import pytest

from hilbertlab import entropy as en
from hilbertlab.errors import TruncationError

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


@pytest.fixture(scope="module")
def disc_forms(solved):
    sol, fld = solved("disc", 1 / 64)
    return (sol, fld,
            en.make_volume_form(sol.domain, sol, fld, "blaschke"),
            en.make_volume_form(sol.domain, sol, None, "busemann"))


class TestBallVolume:
    def test_zero_radius(self, disc_forms):
        sol, _, vb, _ = disc_forms
        assert en.ball_volume(sol.domain, vb, (0.0, 0.0), 0.0) == 0.0

    def test_disc_matches_hyperbolic_area(self, disc_forms):
        sol, _, vb, _ = disc_forms
        bv = en.BallVolumes(vb, (0.0, 0.0))
        for r in (0.5, 1.0, 1.5):
            v = bv.volume(r)
            exact = 2.0 * np.pi * (np.cosh(r) - 1.0)
            assert abs(v / exact - 1.0) <= 0.05

    def test_monotone_in_radius(self, disc_forms):
        sol, _, _, vu = disc_forms
        bv = en.BallVolumes(vu, (0.0, 0.0))
        rs = np.linspace(0.2, bv.r_max, 12)
        vols = [bv.volume(r) for r in rs]
        assert np.all(np.diff(vols) >= 0.0)

    def test_truncation_error_carries_r_max(self, disc_forms):
        sol, _, vb, _ = disc_forms
        bv = en.BallVolumes(vb, (0.0, 0.0))
        with pytest.raises(TruncationError) as err:
            bv.volume(bv.r_max + 0.5)
        assert err.value.r_max == pytest.approx(bv.r_max)

    def test_bishop_comparison(self, disc_forms):
        # Blaschke ball volumes never exceed hyperbolic ones by > 5%
        sol, _, vb, _ = disc_forms
        bv = en.BallVolumes(vb, (0.0, 0.0))
        for r in np.linspace(0.3, bv.r_max - 0.05, 8):
            assert bv.volume(r) <= 1.05 * 2.0 * np.pi * (np.cosh(r) - 1.0)

    def test_square_ball_ratio_golden(self, solved):
        with open(os.path.join(FIXTURES, "golden_constants.json")) as fh:
            gold = json.load(fh)
        sol, _ = solved("square", 1 / 64)
        form = en.make_volume_form(sol.domain, sol, None, "busemann")
        bv = en.BallVolumes(form, (0.0, 0.0))
        ratio = bv.volume(2.0) / bv.volume(1.0)
        assert ratio == pytest.approx(gold["square_ball_ratio_R2_R1_busemann_h64"],
                                      rel=1e-10)


class TestUniformity:
    def test_busemann_is_one_by_construction(self, disc_forms):
        sol, _, _, vu = disc_forms
        assert en.uniformity_constant(sol.domain, vu) <= 1.0 + 1e-3

    def test_disc_blaschke(self, disc_forms):
        sol, _, vb, _ = disc_forms
        assert en.uniformity_constant(sol.domain, vb) <= 1.1

    def test_square_blaschke_golden(self, solved):
        with open(os.path.join(FIXTURES, "golden_constants.json")) as fh:
            gold = json.load(fh)
        sol, fld = solved("square", 1 / 64)
        form = en.make_volume_form(sol.domain, sol, fld, "blaschke")
        k = en.uniformity_constant(sol.domain, form)
        assert k == pytest.approx(gold["square_uniformity_K_blaschke_h64"],
                                  rel=1e-8)
        assert np.isfinite(k) and k > 1.0


class TestEntropyEstimate:
    def test_needs_three_radii(self, disc_forms):
        sol, _, vb, _ = disc_forms
        with pytest.raises(ValueError):
            en.entropy_estimate(sol.domain, vb, (0.0, 0.0), [0.5, 1.0])

    def test_log_volume_nondecreasing(self, disc_forms):
        sol, _, _, vu = disc_forms
        est = en.entropy_estimate(sol.domain, vu, (0.0, 0.0),
                                  np.arange(0.6, 1.8, 0.2))
        assert np.all(np.diff(np.log(est.volumes)) >= 0.0)

    def test_form_drift_small(self, disc_forms):
        # blaschke vs busemann slopes agree on a common moderate window
        sol, _, vb, vu = disc_forms
        radii = np.arange(0.8, 1.65, 0.2)
        s1 = en.entropy_estimate(sol.domain, vb, (0.0, 0.0), radii).full_slope
        s2 = en.entropy_estimate(sol.domain, vu, (0.0, 0.0), radii).full_slope
        assert abs(s1 - s2) <= 0.05

    def test_base_point_drift_cell_sums(self, disc_forms):
        sol, _, _, vu = disc_forms
        radii = np.arange(0.8, 1.65, 0.2)
        s1 = en.entropy_estimate(sol.domain, vu, (0.0, 0.0), radii).full_slope
        s2 = en.entropy_estimate(sol.domain, vu, (0.15, 0.1), radii).full_slope
        assert abs(s1 - s2) <= 0.05


class TestResolvedEstimator:
    def test_disc_quadrature_matches_closed_form(self):
        from hilbertlab import fixtures as fx
        dom = fx.unit_disc()
        for r in (1.0, 3.0, 5.0):
            v = en.resolved_ball_volume(dom, (0.0, 0.0), r)
            assert v == pytest.approx(2.0 * (np.cosh(r) - 1.0), rel=1e-6)

    def test_disc_slope_near_one(self):
        from hilbertlab import fixtures as fx
        est = en.entropy_estimate_resolved(fx.unit_disc(), (0.0, 0.0),
                                           np.arange(4.5, 5.51, 0.25))
        assert 0.85 <= est.slope <= 1.05

    def test_triangle_polynomial_growth(self):
        from hilbertlab import fixtures as fx
        est = en.entropy_estimate_resolved(fx.standard_triangle(), (0.0, 0.0),
                                           np.arange(4.5, 5.51, 0.25))
        assert est.slope <= 0.6


class TestInclusion:
    def test_disc_no_violations(self, solved):
        sol, fld = solved("disc", 1 / 64)
        viol = en.ball_inclusion_check(sol.domain, sol, fld, (0.0, 0.0),
                                       1.0, 40, seed=3)
        assert viol == 0

    def test_square_no_violations(self, solved):
        sol, fld = solved("square", 1 / 64)
        viol = en.ball_inclusion_check(sol.domain, sol, fld, (0.0, 0.0),
                                       1.5, 40, seed=3)
        assert viol == 0

    def test_base_point_trivially_included(self, solved):
        sol, fld = solved("disc", 1 / 64)
        from hilbertlab.chords import blaschke_distance_upper
        assert blaschke_distance_upper(sol, fld, (0.0, 0.0), (0.0, 0.0)) <= 1.0
