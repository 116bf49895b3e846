"""Exact Hilbert distance, Finsler norm, balls and geodesics.

All operations reduce to boundary-ray intersections on the ConvexDomain,
so they are exact up to the conic/edge intersection arithmetic (no grids).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContainmentError, DegenerateConfigError
from .projective import ConvexDomain, as_chart


def hilbert_distance(domain: ConvexDomain, x, y) -> float:
    """d^H(x, y) = 1/2 log |[a, x, b, y]| with a, b the chord endpoints."""
    xc, yc = as_chart(x), as_chart(y)
    sigma = np.linalg.norm(yc - xc)
    if sigma < 1e-15:
        return 0.0
    for label, p in (("x", xc), ("y", yc)):
        if domain.contains(p) == "outside":
            raise ContainmentError(f"{label}={p} outside the closed domain")
    d = (yc - xc) / sigma
    tb = float(domain.ray_boundary_distance(xc[None, :], -d)[0])   # to a
    tf = float(domain.ray_boundary_distance(xc[None, :], d)[0])    # to b
    # cross ratio [a, x, b, y] in the line coordinate s (a=-tb, x=0, b=tf, y=sigma)
    cr = ((sigma + tb) * tf) / ((tf - sigma) * tb)
    return 0.5 * float(np.log(abs(cr)))


def hilbert_distance_many(domain: ConvexDomain, o, pts) -> np.ndarray:
    """Vectorized d^H from one base point to many chart points."""
    oc = as_chart(o)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    diff = pts - oc[None, :]
    sigma = np.linalg.norm(diff, axis=1)
    out = np.zeros(len(pts))
    mask = sigma > 1e-15
    if not mask.any():
        return out
    d = diff[mask] / sigma[mask, None]
    base = np.broadcast_to(oc, d.shape)
    tf = domain.ray_boundary_distance(base, d)
    tb = domain.ray_boundary_distance(base, -d)
    s = sigma[mask]
    cr = ((s + tb) * tf) / ((tf - s) * tb)
    out[mask] = 0.5 * np.log(np.abs(cr))
    return out


def hilbert_norm(domain: ConvexDomain, x, v) -> float:
    """Finsler norm F(x, v) = (|v|/2)(1/t+ + 1/t-), first-order calibrated."""
    xc = as_chart(x)
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv < 1e-300:
        raise DegenerateConfigError("hilbert_norm needs a nonzero vector")
    if domain.contains(xc) != "inside":
        raise ContainmentError(f"x={xc} is not interior")
    vh = v / nv
    tp = float(domain.ray_boundary_distance(xc[None, :], vh)[0])
    tm = float(domain.ray_boundary_distance(xc[None, :], -vh)[0])
    return 0.5 * nv * (1.0 / tp + 1.0 / tm)


def hilbert_norm_many(domain: ConvexDomain, pts, v) -> np.ndarray:
    """F(x, v) for many x and a single direction v (vectorized)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    vh = v / nv
    tp = domain.ray_boundary_distance(pts, vh)
    tm = domain.ray_boundary_distance(pts, -vh)
    return 0.5 * nv * (1.0 / tp + 1.0 / tm)


@dataclass(frozen=True)
class HilbertBall:
    """Metric ball B^H(center, radius) with an exact membership test."""

    domain: ConvexDomain
    center: np.ndarray
    radius: float

    def __contains__(self, x):
        return hilbert_distance(self.domain, self.center, x) <= self.radius

    def contains_many(self, pts):
        return hilbert_distance_many(self.domain, self.center, pts) <= self.radius


def ball_membership(domain: ConvexDomain, o, radius: float, x) -> bool:
    if radius < 0:
        raise DegenerateConfigError("ball radius must be >= 0")
    return hilbert_distance(domain, o, x) <= radius


def geodesic_sample(domain: ConvexDomain, x, y, k: int) -> np.ndarray:
    """k points from x to y equally spaced in Hilbert arclength.

    Straight segments are geodesics; equal spacing in the chord parameter t.
    """
    if k < 2:
        raise DegenerateConfigError("geodesic_sample needs k >= 2")
    xc, yc = as_chart(x), as_chart(y)
    if np.linalg.norm(yc - xc) < 1e-15:
        return np.tile(xc, (k, 1))
    chord = domain.chord_through(xc, yc)
    tx, ty = chord.param_of(xc), chord.param_of(yc)
    ts = np.linspace(tx, ty, k)
    pts = chord.point_at(ts)
    pts[0], pts[-1] = xc, yc      # endpoints exact
    return pts


def finsler_length(domain: ConvexDomain, x, y, nodes: int = 64) -> float:
    """Gauss-Legendre quadrature of F along the straight segment x -> y."""
    xc, yc = as_chart(x), as_chart(y)
    v = yc - xc
    if np.linalg.norm(v) < 1e-15:
        return 0.0
    s, w = np.polynomial.legendre.leggauss(nodes)
    lam = 0.5 * (s + 1.0)
    pts = xc[None, :] + lam[:, None] * v[None, :]
    f = hilbert_norm_many(domain, pts, v)
    return float(0.5 * np.sum(w * f))


def metric_field_rows(domain: ConvexDomain, n: int):
    """Rows (x, y, F_e1, F_e2, F_diag) on a regular n x n grid of the bbox.

    Grid points outside the open domain are skipped.
    """
    lo, hi = domain.bbox()
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    margins = domain.boundary_signed_margin(pts)
    pts = pts[margins > 1e-9]
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    dg = np.array([1.0, 1.0]) / np.sqrt(2.0)
    f1 = hilbert_norm_many(domain, pts, e1)
    f2 = hilbert_norm_many(domain, pts, e2)
    fd = hilbert_norm_many(domain, pts, dg)
    return [(p[0], p[1], a, b, c) for p, a, b, c in zip(pts, f1, f2, fd)]
