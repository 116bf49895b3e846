import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbertlab.errors import (ChartError, CollinearityError,
                               DegenerateConfigError, SpecParseError)
from hilbertlab.projective import (Chord, ConvexDomain, ProjectivePoint,
                                   convex_hull, cross_ratio)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


class TestProjectivePoint:
    def test_unit_norm_and_sign(self):
        p = ProjectivePoint([3.0, 0.0, -4.0])
        assert np.linalg.norm(p.coords) == pytest.approx(1.0, abs=1e-15)
        assert p.coords[0] > 0

    def test_sign_convention_first_nonzero(self):
        p = ProjectivePoint([0.0, -2.0, 1.0])
        assert p.coords[0] == 0.0
        assert p.coords[1] > 0

    @given(st.tuples(finite, finite, finite).filter(
        lambda t: np.linalg.norm(t) > 1e-3))
    def test_normalization_idempotent(self, coords):
        p = ProjectivePoint(coords)
        q = ProjectivePoint(p.coords)
        assert np.array_equal(p.coords, q.coords)

    def test_zero_rejected(self):
        with pytest.raises(DegenerateConfigError):
            ProjectivePoint([0.0, 0.0, 0.0])

    def test_chart_of_infinite_point(self):
        with pytest.raises(ChartError):
            ProjectivePoint([1.0, 0.0, 0.0]).chart


class TestCrossRatio:
    def test_defining_normalization(self):
        # chart points 0, 1, infinity, t on the x-axis
        t = 0.7
        pts = [ProjectivePoint([0, 0, 1]), ProjectivePoint([1, 0, 1]),
               ProjectivePoint([1, 0, 0]), ProjectivePoint([t, 0, 1])]
        assert cross_ratio(*pts) == pytest.approx(t, abs=1e-14)

    def test_affine_formula(self):
        r = 0.3
        pts = [ProjectivePoint([v, 0, 1]) for v in (-1.0, 0.0, 1.0, r)]
        assert cross_ratio(*pts) == pytest.approx((1 + r) / (1 - r), abs=1e-13)

    def _mobius_oracle(self, lams):
        """Map sending (l1, l2, l3) to (0, 1, inf), evaluated at l4."""
        l1, l2, l3, l4 = lams
        return ((l4 - l1) * (l2 - l3)) / ((l4 - l3) * (l2 - l1))

    def test_against_mobius_oracle(self, rng):
        for _ in range(50):
            p = rng.uniform(-3, 3, 2)
            q = rng.uniform(-3, 3, 2)
            if np.linalg.norm(q - p) < 0.5:
                continue
            lams = rng.uniform(-4, 4, 4)
            if np.abs(np.subtract.outer(lams, lams)
                      + np.eye(4)).min() < 1e-2:
                continue
            pts = [ProjectivePoint([*(p + lam * (q - p)), 1.0]) for lam in lams]
            expect = self._mobius_oracle(lams)
            assert cross_ratio(*pts) == pytest.approx(expect, abs=1e-12 * max(1, abs(expect)))

    def test_collinearity_rejected(self):
        pts = [ProjectivePoint([0, 0, 1]), ProjectivePoint([1, 0, 1]),
               ProjectivePoint([2.0, 0.5, 1]), ProjectivePoint([3, 0, 1])]
        with pytest.raises(CollinearityError):
            cross_ratio(*pts)

    def test_coincident_rejected(self):
        pts = [ProjectivePoint([0, 0, 1]), ProjectivePoint([0, 0, 1]),
               ProjectivePoint([1, 0, 1]), ProjectivePoint([2, 0, 1])]
        with pytest.raises(DegenerateConfigError):
            cross_ratio(*pts)

    @given(st.integers(0, 10 ** 6))
    def test_projective_invariance(self, seed):
        rng = np.random.default_rng(seed)
        g = rng.uniform(-1, 1, (3, 3)) + 2.0 * np.eye(3)
        if abs(np.linalg.det(g)) < 0.3:
            return
        lams = np.array([0.0, 1.0, 2.5, rng.uniform(3.0, 6.0)])
        p, q = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        if np.linalg.norm(q - p) < 0.5:
            return
        raw = [np.array([*(p + lam * (q - p)), 1.0]) for lam in lams]
        pts = [ProjectivePoint(v) for v in raw]
        imgs = [ProjectivePoint(g @ v) for v in raw]
        assert cross_ratio(*imgs) == pytest.approx(cross_ratio(*pts), abs=1e-9)


class TestConvexDomain:
    def test_contains_disc(self):
        disc = ConvexDomain.ellipse((0, 0), (1, 1))
        assert disc.contains((0.0, 0.0)) == "inside"
        assert disc.contains((1.0, 0.0)) == "boundary"
        assert disc.contains((2.0, 0.0)) == "outside"

    def test_contains_chart_error(self):
        disc = ConvexDomain.ellipse((0, 0), (1, 1))
        with pytest.raises(ChartError):
            disc.contains(ProjectivePoint([1.0, 0.0, 0.0]))

    def test_chord_through_disc(self):
        disc = ConvexDomain.ellipse((0, 0), (1, 1))
        ch = disc.chord_through((0.0, 0.0), (0.5, 0.0))
        assert ch.a == pytest.approx([-1.0, 0.0], abs=1e-12)
        assert ch.b == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_chord_through_square_diagonal(self):
        sq = ConvexDomain.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
        ch = sq.chord_through((0.0, 0.0), (0.3, 0.3))
        assert ch.a == pytest.approx([-1.0, -1.0], abs=1e-12)
        assert ch.b == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_chord_symmetry_unordered(self, rng):
        sq = ConvexDomain.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
        for _ in range(20):
            x, y = rng.uniform(-0.8, 0.8, (2, 2))
            if np.linalg.norm(x - y) < 1e-3:
                continue
            assert (sq.chord_through(x, y).unordered_endpoints()
                    == sq.chord_through(y, x).unordered_endpoints())

    def test_chord_against_bisection_oracle(self, rng):
        poly = ConvexDomain.polygon([(-1, -0.5), (0.3, -1), (1, 0.2),
                                     (0.4, 1), (-0.8, 0.6)])
        for _ in range(25):
            x = rng.uniform(-0.3, 0.3, 2)
            y = rng.uniform(-0.3, 0.3, 2)
            if poly.contains(x) != "inside" or poly.contains(y) != "inside":
                continue
            if np.linalg.norm(x - y) < 1e-2:
                continue
            ch = poly.chord_through(x, y)
            d = (y - x) / np.linalg.norm(y - x)
            # bisection march on the indicator function
            for direction, expect in ((d, ch.b), (-d, ch.a)):
                lo, hi = 0.0, 4.0
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if poly.contains(x + mid * direction) == "outside":
                        hi = mid
                    else:
                        lo = mid
                assert x + lo * direction == pytest.approx(expect, abs=1e-9)

    def test_ellipse_chord_on_conic(self, rng):
        ell = ConvexDomain.ellipse((0.1, -0.2), (0.9, 0.5), rotation=0.4)
        for _ in range(20):
            x = rng.uniform(-0.2, 0.2, 2) + np.array([0.1, -0.2])
            y = rng.uniform(-0.2, 0.2, 2) + np.array([0.1, -0.2])
            if np.linalg.norm(x - y) < 1e-2:
                continue
            ch = ell.chord_through(x, y)
            for e in (ch.a, ch.b):
                z = (e - ell.center) @ ell._rot / ell.semi_axes
                assert z @ z == pytest.approx(1.0, abs=1e-10)

    def test_hull_reduces_and_dedupes(self):
        dom = ConvexDomain.hull([(0, 0), (1, 0), (1, 1), (0, 1),
                                 (0.5, 0.5), (1, 0), (0.2, 0.9)])
        assert dom.kind == "polygon"
        assert len(dom.vertices) == 4

    def test_collinear_hull_degenerate(self):
        with pytest.raises(DegenerateConfigError):
            ConvexDomain.hull([(0, 0), (1, 1), (2, 2)])

    def test_normalization_centers_and_fits(self):
        tri = ConvexDomain.polygon([(0, 0), (1, 0), (0, 1)], normalize=True)
        assert tri.centroid == pytest.approx([0.0, 0.0], abs=1e-12)
        lo, hi = tri.bbox()
        assert max(np.abs(lo).max(), np.abs(hi).max()) == pytest.approx(1.0, abs=1e-12)

    def test_spec_round_trip(self, tmp_path):
        import json
        spec = {"type": "ellipse", "center": [0.0, 0.0],
                "semi_axes": [1.0, 0.5], "rotation_rad": 0.3}
        path = tmp_path / "dom.json"
        path.write_text(json.dumps(spec))
        dom = ConvexDomain.from_json(path, normalize=False)
        assert dom.to_spec()["semi_axes"] == [1.0, 0.5]

    def test_spec_errors_name_key(self):
        with pytest.raises(SpecParseError) as err:
            ConvexDomain.from_spec({"type": "polygon"})
        assert err.value.key == "vertices"
        with pytest.raises(SpecParseError):
            ConvexDomain.from_spec({"type": "pentagon"})


class TestChordParametrization:
    def test_param_roundtrip(self):
        disc = ConvexDomain.ellipse((0, 0), (1, 1))
        ch = disc.chord_through((0.0, 0.0), (0.5, 0.0))
        for t in (-1.2, 0.0, 0.7):
            assert ch.param_of(ch.point_at(t)) == pytest.approx(t, abs=1e-12)

    def test_velocity_matches_difference(self):
        disc = ConvexDomain.ellipse((0, 0), (1, 1))
        ch = disc.chord_through((0.0, 0.0), (0.3, 0.2))
        eps = 1e-6
        v = ch.velocity_at(0.4)
        fd = (ch.point_at(0.4 + eps) - ch.point_at(0.4 - eps)) / (2 * eps)
        assert v == pytest.approx(fd, abs=1e-8)


def test_monotone_chain_matches_known_square():
    pts = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 1), (0.5, 1.7)]
    hull = convex_hull(pts)
    assert sorted(map(tuple, hull)) == [(0, 0), (0, 2), (2, 0), (2, 2)]
