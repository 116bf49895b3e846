"""Projective primitives: homogeneous points, cross-ratios, convex domains.

Everything lives in one fixed affine chart x3 = 1. Domains loaded through
`ConvexDomain.from_spec` are projectively normalized at load time (centroid
to the origin, isotropic scale into the box [-1, 1]^2); the applied chart
map is kept on the domain so group elements can be conjugated coherently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (ChartError, CollinearityError, ContainmentError,
                     DegenerateConfigError, SpecParseError)

COLLINEARITY_TOL = 1e-9
BOUNDARY_TOL = 1e-10


def _as_homogeneous(p):
    """Coerce a ProjectivePoint, 3-vector, or chart pair to a 3-vector."""
    if isinstance(p, ProjectivePoint):
        return p.coords
    a = np.asarray(p, dtype=float)
    if a.shape == (3,):
        return a
    if a.shape == (2,):
        return np.array([a[0], a[1], 1.0])
    raise DegenerateConfigError(f"cannot interpret {p!r} as a projective point")


def as_chart(p):
    """Chart coordinates (x, y) of a point; raises ChartError at infinity."""
    v = _as_homogeneous(p)
    if abs(v[2]) < 1e-14 * np.linalg.norm(v):
        raise ChartError("point lies at infinity of the chart x3 = 1")
    return np.array([v[0] / v[2], v[1] / v[2]])


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of RP^2, stored as a unit 3-vector with a sign convention.

    Normalization: unit Euclidean norm, first nonzero coordinate positive.
    It is idempotent, so points can be compared componentwise.
    """

    coords: np.ndarray

    def __init__(self, coords):
        v = np.asarray(coords, dtype=float).reshape(3)
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise DegenerateConfigError("homogeneous coordinates must be nonzero and finite")
        if abs(n - 1.0) > 4e-16:     # keep normalization bitwise idempotent
            v = v / n
        for c in v:
            if c != 0.0:
                if c < 0.0:
                    v = -v
                break
        object.__setattr__(self, "coords", v)

    @classmethod
    def from_chart(cls, x, y):
        return cls([x, y, 1.0])

    @property
    def chart(self):
        return as_chart(self.coords)

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)


def normalized_triple_product(a, b, c):
    """|det| of the three unit-normalized homogeneous vectors."""
    m = np.stack([_as_homogeneous(a), _as_homogeneous(b), _as_homogeneous(c)])
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    return abs(np.linalg.det(m))


def cross_ratio(x1, x2, x3, x4, tol=COLLINEARITY_TOL):
    """Cross-ratio of four collinear points, normalized so (0,1,inf,t) -> t.

    Works projectively (points at infinity of the chart are fine): on the
    line through x1 and x3, each point is [u + lambda * w]; the cross-ratio
    is lambda4 / lambda2.
    """
    vs = [_as_homogeneous(p) for p in (x1, x2, x3, x4)]
    vs = [v / np.linalg.norm(v) for v in vs]
    for i in range(4):
        for j in range(i + 1, 4):
            if np.linalg.norm(np.cross(vs[i], vs[j])) < 1e-12:
                raise DegenerateConfigError(f"points {i + 1} and {j + 1} coincide")
    u, w = vs[0], vs[2]
    for v in (vs[1], vs[3]):
        if normalized_triple_product(u, w, v) > tol:
            raise CollinearityError(
                f"points not collinear: triple product {normalized_triple_product(u, w, v):.3e}")
    basis = np.stack([u, w], axis=1)            # 3x2
    lam = []
    for v in (vs[1], vs[3]):
        ab, *_ = np.linalg.lstsq(basis, v, rcond=None)
        if abs(ab[0]) < 1e-14:
            lam.append(np.inf)
        else:
            lam.append(ab[1] / ab[0])
    lam2, lam4 = lam
    if np.isinf(lam2):
        raise DegenerateConfigError("x2 coincides with x3 on the line")
    if np.isinf(lam4):
        raise DegenerateConfigError("x4 coincides with x3 on the line")
    if abs(lam2) < 1e-300:
        raise DegenerateConfigError("x2 coincides with x1 on the line")
    return float(lam4 / lam2)


@dataclass(frozen=True)
class Chord:
    """A maximal open segment of a domain, with lifted endpoints.

    Lifts carry third coordinate 1 so that the Hilbert-arclength
    parametrization x(t) = mid + tanh(t) * (p - q)/2 holds exactly
    (t = 0 at the chart midpoint, t -> +inf toward p).
    """

    a: np.ndarray     # chart endpoint reached as t -> -inf
    b: np.ndarray     # chart endpoint reached as t -> +inf

    @property
    def lift_e1(self):
        return np.array([self.b[0], self.b[1], 1.0])

    @property
    def lift_e2(self):
        return np.array([self.a[0], self.a[1], 1.0])

    @property
    def midpoint(self):
        return 0.5 * (self.a + self.b)

    @property
    def halfspan(self):
        return 0.5 * (self.b - self.a)

    def point_at(self, t):
        """Chart point at Hilbert-arclength parameter t (vectorized)."""
        t = np.asarray(t, dtype=float)
        lam = np.tanh(t)
        return self.midpoint + np.multiply.outer(lam, self.halfspan)

    def velocity_at(self, t):
        """d/dt of point_at (vectorized)."""
        t = np.asarray(t, dtype=float)
        s = 1.0 / np.cosh(t) ** 2
        return np.multiply.outer(s, self.halfspan)

    def param_of(self, x):
        """Hilbert-arclength parameter of a chart point on the chord."""
        x = as_chart(x)
        d = self.b - self.a
        lam2 = 2.0 * np.dot(x - self.midpoint, d) / np.dot(d, d)
        lam2 = np.clip(lam2, -1.0 + 1e-15, 1.0 - 1e-15)
        return float(np.arctanh(lam2))

    def unordered_endpoints(self):
        return frozenset((tuple(np.round(self.a, 12)), tuple(np.round(self.b, 12))))


def _polygon_area_centroid(verts):
    x, y = verts[:, 0], verts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    area = 0.5 * cr.sum()
    cx = ((x + xn) * cr).sum() / (6.0 * area)
    cy = ((y + yn) * cr).sum() / (6.0 * area)
    return area, np.array([cx, cy])


def convex_hull(points):
    """Andrew's monotone chain. Returns CCW hull vertices, collinear dropped."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        return np.array(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 1e-14:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


class ConvexDomain:
    """A bounded proper convex open domain in the chart x3 = 1.

    kind is 'polygon' (CCW extremal vertices) or 'ellipse' (center,
    semi-axes, rotation). Hull input is reduced to a polygon at load.
    Immutable after construction; all query methods are pure.
    """

    def __init__(self, kind, *, vertices=None, center=None, semi_axes=None,
                 rotation=0.0, chart_transform=None):
        self.kind = kind
        if chart_transform is None:
            chart_transform = np.eye(3)
        self.chart_transform = np.asarray(chart_transform, dtype=float)
        if kind == "polygon":
            verts = np.asarray(vertices, dtype=float)
            if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
                raise SpecParseError("polygon needs at least 3 planar vertices", key="vertices")
            hull = convex_hull(verts)
            if hull.shape[0] != verts.shape[0]:
                # input had duplicate or non-extremal vertices; hull result stands
                pass
            if hull.shape[0] < 3:
                raise DegenerateConfigError("polygon vertices are collinear")
            self.vertices = hull
            area, c = _polygon_area_centroid(hull)
            self._area, self._centroid = area, c
            # inward half-plane data: n . x <= off, |n| = 1
            e = np.roll(hull, -1, axis=0) - hull
            n = np.stack([e[:, 1], -e[:, 0]], axis=1)
            n /= np.linalg.norm(n, axis=1, keepdims=True)
            self._normals = n
            self._offsets = np.einsum("ij,ij->i", n, hull)
        elif kind == "ellipse":
            self.center = np.asarray(center, dtype=float).reshape(2)
            self.semi_axes = np.asarray(semi_axes, dtype=float).reshape(2)
            if np.any(self.semi_axes <= 0):
                raise SpecParseError("ellipse semi-axes must be positive", key="semi_axes")
            self.rotation = float(rotation)
            c, s = np.cos(self.rotation), np.sin(self.rotation)
            self._rot = np.array([[c, -s], [s, c]])
            self._area = np.pi * self.semi_axes.prod()
            self._centroid = self.center
        else:
            raise SpecParseError(f"unknown domain kind {kind!r}", key="type")

    # ---------------------------------------------------------------- loading

    @classmethod
    def polygon(cls, vertices, normalize=False):
        dom = cls("polygon", vertices=vertices)
        return dom._normalized() if normalize else dom

    @classmethod
    def ellipse(cls, center, semi_axes, rotation=0.0, normalize=False):
        dom = cls("ellipse", center=center, semi_axes=semi_axes, rotation=rotation)
        return dom._normalized() if normalize else dom

    @classmethod
    def hull(cls, points, normalize=False):
        pts = np.asarray(points, dtype=float)
        h = convex_hull(pts)
        if h.shape[0] < 3:
            raise DegenerateConfigError("hull input degenerate")
        return cls.polygon(h, normalize=normalize)

    @classmethod
    def from_spec(cls, spec, normalize=True):
        """Build from the JSON domain-spec dictionary."""
        if "type" not in spec:
            raise SpecParseError("missing 'type'", key="type")
        t = spec["type"]
        try:
            if t == "polygon":
                return cls.polygon(spec["vertices"], normalize=normalize)
            if t == "ellipse":
                return cls.ellipse(spec["center"], spec["semi_axes"],
                                   spec.get("rotation_rad", 0.0), normalize=normalize)
            if t == "hull":
                return cls.hull(spec["points"], normalize=normalize)
        except KeyError as exc:
            raise SpecParseError(f"missing key {exc.args[0]!r} for type {t!r}",
                                 key=exc.args[0]) from exc
        raise SpecParseError(f"unknown domain type {t!r}", key="type")

    @classmethod
    def from_json(cls, path, normalize=True):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                spec = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecParseError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_spec(spec, normalize=normalize)

    def to_spec(self):
        if self.kind == "polygon":
            return {"type": "polygon", "vertices": self.vertices.tolist()}
        return {"type": "ellipse", "center": self.center.tolist(),
                "semi_axes": self.semi_axes.tolist(), "rotation_rad": self.rotation}

    def _normalized(self):
        """Translate centroid to origin, isotropic scale into [-1, 1]^2."""
        c = self._centroid
        if self.kind == "polygon":
            shifted = self.vertices - c
            scale = 1.0 / np.abs(shifted).max()
            m = np.array([[scale, 0.0, -scale * c[0]],
                          [0.0, scale, -scale * c[1]],
                          [0.0, 0.0, 1.0]])
            return ConvexDomain("polygon", vertices=shifted * scale,
                                chart_transform=m @ self.chart_transform)
        # ellipse: centered at origin; bound via axis-aligned extent of the
        # rotated ellipse, max_x = sqrt((a cos r)^2 + (b sin r)^2) etc.
        a, b = self.semi_axes
        cr, sr = np.cos(self.rotation), np.sin(self.rotation)
        ext = max(np.hypot(a * cr, b * sr), np.hypot(a * sr, b * cr))
        scale = 1.0 / ext
        m = np.array([[scale, 0.0, -scale * c[0]],
                      [0.0, scale, -scale * c[1]],
                      [0.0, 0.0, 1.0]])
        return ConvexDomain("ellipse", center=(0.0, 0.0),
                            semi_axes=self.semi_axes * scale, rotation=self.rotation,
                            chart_transform=m @ self.chart_transform)

    # ---------------------------------------------------------------- queries

    @property
    def area(self):
        return self._area

    @property
    def centroid(self):
        return self._centroid.copy()

    @property
    def boundary_exponent(self):
        """p with u ~ -dist^(1/p) at the boundary: 2 for smooth strictly
        convex boundaries (square-root), 3 for polygon edges (cube-root,
        exact on the simplex)."""
        return 2 if self.kind == "ellipse" else 3

    def bbox(self):
        if self.kind == "polygon":
            return self.vertices.min(axis=0), self.vertices.max(axis=0)
        a, b = self.semi_axes
        cr, sr = np.cos(self.rotation), np.sin(self.rotation)
        ex = np.hypot(a * cr, b * sr)
        ey = np.hypot(a * sr, b * cr)
        e = np.array([ex, ey])
        return self.center - e, self.center + e

    def boundary_signed_margin(self, pts):
        """Positive inside, negative outside; linear-scale proxy near
        the boundary (exact half-plane distance for polygons)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "polygon":
            s = self._offsets[None, :] - pts @ self._normals.T
            return s.min(axis=1)
        y = (pts - self.center) @ self._rot
        q = np.hypot(y[:, 0] / self.semi_axes[0], y[:, 1] / self.semi_axes[1])
        # approximate euclidean margin: (1 - q) * local radius
        rad = np.where(q > 1e-12, np.hypot(y[:, 0], y[:, 1]) / np.maximum(q, 1e-12),
                       self.semi_axes.min())
        return (1.0 - q) * rad

    def contains(self, p, tol=BOUNDARY_TOL):
        """Classify a point as 'inside' / 'boundary' / 'outside'."""
        x = as_chart(p)
        m = float(self.boundary_signed_margin(x[None, :])[0])
        if m > tol:
            return "inside"
        if m < -tol:
            return "outside"
        return "boundary"

    def ray_boundary_distance(self, x, d):
        """Distance(s) t > 0 with x + t*d on the boundary, for interior x.

        Vectorized: x (n,2) with d (2,) or (n,2). Exact per edge / conic.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = np.asarray(d, dtype=float)
        if d.ndim == 1:
            d = np.broadcast_to(d, x.shape)
        if self.kind == "ellipse":
            y = (x - self.center) @ self._rot / self.semi_axes
            e = d @ self._rot / self.semi_axes
            a = np.einsum("ij,ij->i", e, e)
            b = np.einsum("ij,ij->i", y, e)
            c = np.einsum("ij,ij->i", y, y) - 1.0
            disc = np.sqrt(np.maximum(b * b - a * c, 0.0))
            return (-b + disc) / a
        num = self._offsets[None, :] - x @ self._normals.T
        den = d @ self._normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(den > 1e-15, num / den, np.inf)
        return t.min(axis=1)

    def chord_through(self, x, y):
        """The chord of the line through interior points x and y.

        Endpoints ordered so the points appear a, x, y, b along the segment.
        """
        xc, yc = as_chart(x), as_chart(y)
        for label, p in (("x", xc), ("y", yc)):
            if self.contains(p) == "outside":
                raise ContainmentError(f"point {label}={p} lies outside the closed domain")
        d = yc - xc
        n = np.linalg.norm(d)
        if n < 1e-14:
            raise DegenerateConfigError("chord_through needs two distinct points")
        d = d / n
        t_fwd = float(self.ray_boundary_distance(xc[None, :], d)[0])
        t_bwd = float(self.ray_boundary_distance(xc[None, :], -d)[0])
        a = xc - t_bwd * d
        b = xc + t_fwd * d
        return Chord(a=a, b=b)

    def sample_boundary(self, n):
        """n boundary points (polygon: per-edge subdivision; ellipse: angles)."""
        if self.kind == "ellipse":
            th = 2.0 * np.pi * np.arange(n) / n
            circ = np.stack([self.semi_axes[0] * np.cos(th),
                             self.semi_axes[1] * np.sin(th)], axis=1)
            return circ @ self._rot.T + self.center
        m = len(self.vertices)
        per = max(1, n // m)
        pts = []
        for i in range(m):
            p, q = self.vertices[i], self.vertices[(i + 1) % m]
            for k in range(per):
                pts.append(p + (q - p) * k / per)
        return np.array(pts)

    def transform(self, g):
        """Image domain under a projective map g (3x3), as polygon/conic.

        Polygons map vertex-wise; ellipses map through 64 boundary samples
        followed by a conic re-fit is avoided: an ellipse maps to an ellipse
        only under affine maps, so general g returns the hull of mapped
        boundary samples (adequate for the invariance property tests).
        """
        g = np.asarray(g, dtype=float)
        if self.kind == "polygon":
            vh = np.column_stack([self.vertices, np.ones(len(self.vertices))])
            im = vh @ g.T
            if np.any(np.abs(im[:, 2]) < 1e-12):
                raise ChartError("image vertex at infinity of the chart")
            return ConvexDomain.polygon(im[:, :2] / im[:, 2:3])
        bd = self.sample_boundary(256)
        vh = np.column_stack([bd, np.ones(len(bd))])
        im = vh @ g.T
        if np.any(np.abs(im[:, 2]) < 1e-12):
            raise ChartError("image point at infinity of the chart")
        return ConvexDomain.hull(im[:, :2] / im[:, 2:3])

    def __repr__(self):
        if self.kind == "polygon":
            return f"ConvexDomain(polygon, {len(self.vertices)} vertices)"
        return (f"ConvexDomain(ellipse, axes={tuple(self.semi_axes)}, "
                f"rot={self.rotation:.3f})")
