import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbertlab.errors import ContainmentError, DegenerateConfigError
from hilbertlab.hilbert import (HilbertBall, ball_membership, finsler_length,
                                geodesic_sample, hilbert_distance,
                                hilbert_distance_many, hilbert_norm,
                                metric_field_rows)
from hilbertlab.projective import ConvexDomain


@pytest.fixture(scope="module")
def disc():
    return ConvexDomain.ellipse((0, 0), (1, 1))


@pytest.fixture(scope="module")
def square():
    return ConvexDomain.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])


class TestDistance:
    def test_klein_closed_form(self, disc):
        d = hilbert_distance(disc, (0.0, 0.0), (0.5, 0.0))
        assert d == pytest.approx(np.arctanh(0.5), abs=1e-13)

    def test_coincident_points(self, square):
        assert hilbert_distance(square, (0.2, 0.1), (0.2, 0.1)) == 0.0

    def test_square_against_edge_oracle(self, square):
        # brute-force oracle: intersect the diagonal line with each edge
        # explicitly, then evaluate the cross-ratio in the line coordinate
        x = np.array([0.0, 0.0])
        y = np.array([0.5, 0.5])
        d = (y - x) / np.linalg.norm(y - x)
        hits = []
        verts = square.vertices
        for k in range(4):
            p, q = verts[k], verts[(k + 1) % 4]
            e = q - p
            mat = np.column_stack([d, -e])
            if abs(np.linalg.det(mat)) < 1e-14:
                continue
            t, s = np.linalg.solve(mat, p - x)
            if -1e-12 <= s <= 1 + 1e-12:
                hits.append(t)
        ta, tb = min(hits), max(hits)
        sigma = np.linalg.norm(y - x)
        cr = ((sigma - ta) * tb) / ((tb - sigma) * (-ta))
        expect = 0.5 * np.log(abs(cr))
        assert hilbert_distance(square, x, y) == pytest.approx(expect, abs=1e-12)

    def test_outside_raises(self, disc):
        with pytest.raises(ContainmentError):
            hilbert_distance(disc, (0.0, 0.0), (1.5, 0.0))

    @given(st.integers(0, 10 ** 6))
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        square = ConvexDomain.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
        x, y, z = rng.uniform(-0.9, 0.9, (3, 2))
        dxz = hilbert_distance(square, x, z)
        dxy = hilbert_distance(square, x, y)
        dyz = hilbert_distance(square, y, z)
        assert dxz <= dxy + dyz + 1e-9

    def test_symmetry(self, square, rng):
        for _ in range(20):
            x, y = rng.uniform(-0.9, 0.9, (2, 2))
            assert (hilbert_distance(square, x, y)
                    == pytest.approx(hilbert_distance(square, y, x), abs=1e-12))

    def test_projective_invariance(self, square, rng):
        for _ in range(10):
            g = rng.uniform(-0.2, 0.2, (3, 3)) + np.diag([1.0, 1.0, 2.0])
            img = square.transform(g)
            x, y = rng.uniform(-0.7, 0.7, (2, 2))
            xh = g @ np.array([*x, 1.0])
            yh = g @ np.array([*y, 1.0])
            gx, gy = xh[:2] / xh[2], yh[:2] / yh[2]
            assert (hilbert_distance(img, gx, gy)
                    == pytest.approx(hilbert_distance(square, x, y), abs=1e-9))

    def test_chord_additivity_exact(self, disc):
        a = np.array([-0.4, 0.1])
        b = np.array([0.6, 0.3])
        m = a + 0.37 * (b - a)
        assert (hilbert_distance(disc, a, m) + hilbert_distance(disc, m, b)
                == pytest.approx(hilbert_distance(disc, a, b), abs=1e-12))

    def test_vectorized_matches_scalar(self, square, rng):
        o = np.array([0.1, -0.2])
        pts = rng.uniform(-0.8, 0.8, (40, 2))
        many = hilbert_distance_many(square, o, pts)
        for p, d in zip(pts, many):
            assert d == pytest.approx(hilbert_distance(square, o, p), abs=1e-12)


class TestNorm:
    def test_disc_center_unit(self, disc):
        for v in ((1.0, 0.0), (0.3, -0.7)):
            assert hilbert_norm(disc, (0.0, 0.0), v) == pytest.approx(
                np.linalg.norm(v), abs=1e-12)

    def test_disc_radial_closed_form(self, disc):
        r = 0.5
        f = hilbert_norm(disc, (r, 0.0), (1.0, 0.0))
        assert f == pytest.approx(1.0 / (1.0 - r * r), abs=1e-12)
        assert f == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_zero_vector_rejected(self, disc):
        with pytest.raises(DegenerateConfigError):
            hilbert_norm(disc, (0.0, 0.0), (0.0, 0.0))

    def test_homogeneous_degree_one(self, square):
        f1 = hilbert_norm(square, (0.2, 0.3), (0.4, -0.1))
        f2 = hilbert_norm(square, (0.2, 0.3), (2.0, -0.5))
        assert f2 == pytest.approx(5.0 * f1, abs=1e-12)

    def test_finite_difference_oracle(self, rng):
        domains = [ConvexDomain.ellipse((0, 0), (1, 0.7)),
                   ConvexDomain.polygon([(-1, -0.5), (0.3, -1), (1, 0.2),
                                         (0.4, 1), (-0.8, 0.6)])]
        s = 1e-5
        for dom in domains:
            for _ in range(15):
                x = rng.uniform(-0.2, 0.2, 2)
                if dom.contains(x) != "inside":
                    continue
                th = rng.uniform(0, 2 * np.pi)
                v = np.array([np.cos(th), np.sin(th)])
                f = hilbert_norm(dom, x, v)
                fd = hilbert_distance(dom, x, x + s * v) / s
                assert fd == pytest.approx(f, rel=1e-4)


class TestBallsAndGeodesics:
    def test_ball_trivial(self, disc):
        assert ball_membership(disc, (0.0, 0.0), 1.0, (0.0, 0.0))
        eps = 1e-6
        assert not ball_membership(disc, (0.0, 0.0),
                                   np.arctanh(0.5) - eps, (0.5, 0.0))

    def test_ball_matches_level_set(self, square, rng):
        ball = HilbertBall(square, np.array([0.0, 0.0]), 0.8)
        pts = rng.uniform(-0.9, 0.9, (100, 2))
        ind = ball.contains_many(pts)
        direct = np.array([hilbert_distance(square, (0.0, 0.0), p) <= 0.8
                           for p in pts])
        assert np.array_equal(ind, direct)

    def test_geodesic_endpoints(self, disc):
        pts = geodesic_sample(disc, (0.0, 0.0), (0.6, 0.1), 2)
        assert pts[0] == pytest.approx([0.0, 0.0])
        assert pts[-1] == pytest.approx([0.6, 0.1])

    def test_geodesic_equal_artanh_increments(self, disc):
        pts = geodesic_sample(disc, (-0.6, 0.0), (0.6, 0.0), 7)
        ts = np.arctanh(pts[:, 0])
        steps = np.diff(ts)
        assert np.allclose(steps, steps[0], atol=1e-12)

    def test_geodesic_equal_hilbert_spacing(self, square):
        x, y = (-0.4, 0.25), (0.55, -0.3)
        pts = geodesic_sample(square, x, y, 9)
        total = hilbert_distance(square, x, y)
        for k in range(8):
            d = hilbert_distance(square, pts[k], pts[k + 1])
            assert d == pytest.approx(total / 8, abs=1e-9)

    def test_geodesic_k_too_small(self, disc):
        with pytest.raises(DegenerateConfigError):
            geodesic_sample(disc, (0, 0), (0.5, 0), 1)


class TestNormDistanceConsistency:
    def test_disc_integral(self, disc):
        x, y = (0.0, 0.0), (0.62, 0.31)
        assert finsler_length(disc, x, y) == pytest.approx(
            hilbert_distance(disc, x, y), abs=1e-8)

    def test_square_integral(self, square):
        x, y = (-0.3, -0.5), (0.62, 0.31)
        assert finsler_length(square, x, y) == pytest.approx(
            hilbert_distance(square, x, y), abs=1e-6)


def test_metric_field_rows(square):
    rows = metric_field_rows(square, 16)
    assert len(rows) > 100
    x, y, f1, f2, fd = rows[0]
    assert f1 > 0 and f2 > 0 and fd > 0
