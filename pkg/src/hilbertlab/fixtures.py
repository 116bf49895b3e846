"""Reference domains, exact solutions, and group fixtures used throughout.

The closed forms here are the calibration oracles: the hyperboloid over
the disc, its anisotropic rescaling over ellipses, and the cube-root
product solution over the triangle (the simplex cone affine sphere).
"""

from __future__ import annotations

import numpy as np

from .projective import ConvexDomain

TRIANGLE_CONSTANT = np.sqrt(3.0)   # c in u = -c (l1 l2 l3)^(1/3); c^6 = 27


def unit_disc() -> ConvexDomain:
    return ConvexDomain.ellipse((0.0, 0.0), (1.0, 1.0))


def ellipse_fixture(b: float = 0.6) -> ConvexDomain:
    return ConvexDomain.ellipse((0.0, 0.0), (1.0, b))


def unit_square() -> ConvexDomain:
    return ConvexDomain.polygon([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)])


def standard_triangle(normalize: bool = True) -> ConvexDomain:
    """Triangle (0,0), (1,0), (0,1); normalized into the unit box by default."""
    return ConvexDomain.polygon([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
                                normalize=normalize)


def disc_exact_u(x, y):
    """Hyperboloid potential on the unit disc."""
    return -np.sqrt(np.maximum(1.0 - np.asarray(x) ** 2 - np.asarray(y) ** 2, 0.0))


def ellipse_exact_u(x, y, a, b):
    """u = -(ab)^(1/3) sqrt(1 - x^2/a^2 - y^2/b^2)."""
    q = 1.0 - (np.asarray(x) / a) ** 2 - (np.asarray(y) / b) ** 2
    return -(a * b) ** (1.0 / 3.0) * np.sqrt(np.maximum(q, 0.0))


def triangle_exact_u_raw(x, y, c=TRIANGLE_CONSTANT):
    """u = -c (x y (1 - x - y))^(1/3) on the raw triangle (0,0),(1,0),(0,1)."""
    w = np.asarray(x) * np.asarray(y) * (1.0 - np.asarray(x) - np.asarray(y))
    return -c * np.cbrt(np.maximum(w, 0.0))


def triangle_exact_u(domain: ConvexDomain, x, y, c=TRIANGLE_CONSTANT):
    """Exact solution on a load-normalized standard triangle.

    The normalization x' = s(x - x0) rescales solutions by s^(2/3):
    u'(x') = s^(2/3) u(x0 + x'/s).
    """
    m = domain.chart_transform
    s = m[0, 0]
    x0 = -m[0, 2] / s
    y0 = -m[1, 2] / s
    return s ** (2.0 / 3.0) * triangle_exact_u_raw(
        x0 + np.asarray(x) / s, y0 + np.asarray(y) / s, c=c)


def klein_tensor(x, y):
    """Hyperbolic (Klein model) metric tensor components on the unit disc."""
    s = 1.0 - np.asarray(x) ** 2 - np.asarray(y) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        g11 = 1.0 / s + x * x / s ** 2
        g12 = x * y / s ** 2
        g22 = 1.0 / s + y * y / s ** 2
    return g11, g12, g22


# --------------------------------------------------------------- group side

SIMPLEX_CHART = np.array([[1.0, 0.0, 0.0],
                          [0.0, 1.0, 0.0],
                          [1.0, 1.0, 1.0]])
"""Conjugator taking the coordinate-axes triangle of RP^2 into the chart
x3 = 1 as the bounded simplex with vertices (0,0), (1,0), (0,1)."""

DISC_CHART = np.array([[0.0, 1.0, 0.0],
                       [1.0, 0.0, -1.0],
                       [1.0, 0.0, 1.0]])
"""Conjugator taking the definite binary quadratic forms (coordinates
p, q, r for p x^2 + q xy + r y^2, cone q^2 - 4pr < 0) to the unit disc:
(p, q, r) -> (q, p - r, p + r) turns the discriminant into X^2+Y^2-Z^2."""


def conjugate(m, c):
    return c @ np.asarray(m, dtype=float) @ np.linalg.inv(c)


def triangle_group_element(lams=(4.0, 1.0, 0.25), domain: ConvexDomain | None = None):
    """diag(lams) conjugated to act on the chart simplex (and its
    load-normalization if a normalized triangle domain is supplied)."""
    m = conjugate(np.diag(lams), SIMPLEX_CHART)
    if domain is not None:
        m = conjugate(m, domain.chart_transform)
    return m


def disc_group_element(a: float):
    """Image of diag(a, 1/a) under the deg-2 irreducible rep, acting on
    the unit disc (hyperbolic translation of length 2 log a)."""
    from .spectrum import iota3
    return conjugate(iota3(a, 0.0, 0.0, 1.0 / a), DISC_CHART)
