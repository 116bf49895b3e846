"""Blaschke metric extraction from the affine-sphere embedding.

At each node the second-derivative vectors of the embedding xi are
expressed in the moving frame (d1 xi, d2 xi, xi) by a 3x3 solve; the
xi-coefficient is the metric. All derivative vectors are assembled by the
Leibniz rule from partials of w = -u, which are themselves chain-ruled out
of finite differences of the smooth variable z = (-u)^p (p the domain's
boundary exponent). Differencing the embedding or the metric directly is
hopeless near the boundary where they blow up like inverse powers of the
margin: measured 6-11% against the disc oracle, against well under 1% via
z. The same applies one order higher to the Gauss curvature, so the
Brioschi formula is evaluated pointwise with every metric derivative it
needs assembled algebraically from z-differences; only z itself is ever
differenced on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameDegeneracyError
from .grids import SolverGrid, erode_mask
from .monge_ampere import MongeAmpereSolution

FRAME_COND_LIMIT = 1e12


def _d1(f, axis, h):
    out = np.full_like(f, np.nan)
    if axis == 0:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    else:
        out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * h)
    return out


def _d2(f, axis, h):
    out = np.full_like(f, np.nan)
    if axis == 0:
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h ** 2
    else:
        out[:, 1:-1] = (f[:, 2:] - 2.0 * f[:, 1:-1] + f[:, :-2]) / h ** 2
    return out


@dataclass
class BlaschkeField:
    """Per-node 2x2 Blaschke tensor and its Gauss curvature."""

    grid: SolverGrid
    hb: np.ndarray            # (n+1, n+1, 3): h11, h12, h22; NaN off-mask
    kappa: np.ndarray         # (n+1, n+1); NaN off the curvature mask
    mask: np.ndarray          # where hb is defined
    kappa_mask: np.ndarray

    def quadratic_form(self, mask, v):
        """h_B(v, v) over the masked nodes for a fixed direction v."""
        t = self.hb[mask]
        return t[:, 0] * v[0] ** 2 + 2.0 * t[:, 1] * v[0] * v[1] + t[:, 2] * v[1] ** 2

    def sqrt_det(self):
        """sqrt(det h_B) per node (Blaschke area density), NaN off-mask."""
        det = self.hb[..., 0] * self.hb[..., 2] - self.hb[..., 1] ** 2
        with np.errstate(invalid="ignore"):
            return np.sqrt(np.where(self.mask, det, np.nan))

    def eigenvalue_range(self, mask=None):
        m = self.mask if mask is None else (self.mask & mask)
        t = self.hb[m]
        mean = 0.5 * (t[:, 0] + t[:, 2])
        rad = np.sqrt(0.25 * (t[:, 0] - t[:, 2]) ** 2 + t[:, 1] ** 2)
        return float((mean - rad).min()), float((mean + rad).max())


class _WPartials:
    """Partials of w = -u up to the mixed fourth order, via z = w^p.

    z carries the boundary degeneracy as a simple zero, so its centered
    differences have uniformly bounded relative error; everything singular
    is reconstructed through the chain rule for w = z^(1/p).
    """

    __slots__ = ("w", "x", "y", "xx", "xy", "yy",
                 "xxx", "xxy", "xyy", "yyy", "xxyy")

    def __init__(self, solution: MongeAmpereSolution):
        g = solution.grid
        h = g.h
        p = float(g.domain.boundary_exponent)
        u = solution.u
        z = np.where(g.inside, np.power(-u, p), 0.0)   # z = 0 on the boundary
        zx, zy = _d1(z, 0, h), _d1(z, 1, h)
        zxx, zyy = _d2(z, 0, h), _d2(z, 1, h)
        zxy = _d1(zx, 1, h)
        zxxx, zxxy = _d1(zxx, 0, h), _d1(zxx, 1, h)
        zxyy, zyyy = _d1(zyy, 0, h), _d1(zyy, 1, h)
        zxxyy = _d2(zyy, 0, h)
        with np.errstate(invalid="ignore", divide="ignore"):
            zin = np.where(g.inside, z, np.nan)
            q = 1.0 / p
            g1 = q * np.power(zin, q - 1.0)
            g2 = q * (q - 1.0) * np.power(zin, q - 2.0)
            g3 = q * (q - 1.0) * (q - 2.0) * np.power(zin, q - 3.0)
            g4 = q * (q - 1.0) * (q - 2.0) * (q - 3.0) * np.power(zin, q - 4.0)
            self.w = np.where(g.inside, -u, np.nan)
            self.x = g1 * zx
            self.y = g1 * zy
            self.xx = g2 * zx * zx + g1 * zxx
            self.xy = g2 * zx * zy + g1 * zxy
            self.yy = g2 * zy * zy + g1 * zyy
            self.xxx = g3 * zx ** 3 + 3.0 * g2 * zx * zxx + g1 * zxxx
            self.xxy = (g3 * zx * zx * zy + g2 * (2.0 * zx * zxy + zxx * zy)
                        + g1 * zxxy)
            self.xyy = (g3 * zx * zy * zy + g2 * (2.0 * zy * zxy + zyy * zx)
                        + g1 * zxyy)
            self.yyy = g3 * zy ** 3 + 3.0 * g2 * zy * zyy + g1 * zyyy
            self.xxyy = (g4 * zx * zx * zy * zy
                         + g3 * (zxx * zy * zy + 4.0 * zx * zy * zxy + zx * zx * zyy)
                         + g2 * (zxx * zyy + 2.0 * zxy * zxy
                                 + 2.0 * zx * zxyy + 2.0 * zy * zxxy)
                         + g1 * zxxyy)


def frame_and_second_vectors(solution: MongeAmpereSolution, mask, wp=None):
    """Frames M = [d1 xi, d2 xi, xi] and vectors (dxx, dxy, dyy) xi at nodes."""
    g = solution.grid
    if wp is None:
        wp = _WPartials(solution)
    idx = np.argwhere(mask)
    I, J = idx[:, 0], idx[:, 1]
    n = len(I)
    P = np.stack([g.X[I, J], g.Y[I, J], np.ones(n)], axis=1)
    e1 = np.zeros((n, 3)); e1[:, 0] = 1.0
    e2 = np.zeros((n, 3)); e2[:, 1] = 1.0
    wI = wp.w[I, J]
    wx, wy = wp.x[I, J], wp.y[I, J]
    r = 1.0 / wI
    rx = -wx / wI ** 2
    ry = -wy / wI ** 2
    rxx = -wp.xx[I, J] / wI ** 2 + 2.0 * wx * wx / wI ** 3
    ryy = -wp.yy[I, J] / wI ** 2 + 2.0 * wy * wy / wI ** 3
    rxy = -wp.xy[I, J] / wI ** 2 + 2.0 * wx * wy / wI ** 3
    xi = P * r[:, None]
    d1xi = e1 * r[:, None] + P * rx[:, None]
    d2xi = e2 * r[:, None] + P * ry[:, None]
    dxx = 2.0 * e1 * rx[:, None] + P * rxx[:, None]
    dyy = 2.0 * e2 * ry[:, None] + P * ryy[:, None]
    dxy = e1 * ry[:, None] + e2 * rx[:, None] + P * rxy[:, None]
    M = np.stack([d1xi, d2xi, xi], axis=2)
    return idx, M, (dxx, dxy, dyy), (d1xi, d2xi, xi)


def blaschke_from_embedding(solution: MongeAmpereSolution) -> BlaschkeField:
    """Extract h_B by the bundle decomposition; also emits Gauss curvature."""
    g = solution.grid
    wp = _WPartials(solution)
    mask = g.eroded(1)
    idx, M, rhs_vecs, _ = frame_and_second_vectors(solution, mask, wp)
    conds = np.linalg.cond(M)
    if np.any(conds > FRAME_COND_LIMIT):
        k = int(np.argmax(conds))
        raise FrameDegeneracyError(
            f"frame condition {conds[k]:.2e} at node {tuple(idx[k])}")
    rhs = np.stack(rhs_vecs, axis=2)
    sol = np.linalg.solve(M, rhs)
    hb = np.full(g.X.shape + (3,), np.nan)
    I, J = idx[:, 0], idx[:, 1]
    hb[I, J, 0] = sol[:, 2, 0]
    hb[I, J, 1] = sol[:, 2, 1]
    hb[I, J, 2] = sol[:, 2, 2]
    kappa, kmask = gauss_curvature(solution, wp)
    return BlaschkeField(grid=g, hb=hb, kappa=kappa, mask=mask, kappa_mask=kmask)


def gauss_curvature(solution: MongeAmpereSolution, wp: _WPartials | None = None):
    """Brioschi curvature of h_B = D^2 u / (-u), assembled pointwise.

    The metric components and every derivative the Brioschi determinants
    need (E_x, ..., E_yy, G_xx, F_xy) are exact rational expressions in the
    w-partials; the only grid differencing happens inside _WPartials on the
    smooth variable z.
    """
    if wp is None:
        wp = _WPartials(solution)
    w = wp.w
    with np.errstate(invalid="ignore", divide="ignore"):
        E = -wp.xx / w
        F = -wp.xy / w
        G = -wp.yy / w
        Ex = -wp.xxx / w + wp.xx * wp.x / w ** 2
        Ey = -wp.xxy / w + wp.xx * wp.y / w ** 2
        Gx = -wp.xyy / w + wp.yy * wp.x / w ** 2
        Gy = -wp.yyy / w + wp.yy * wp.y / w ** 2
        Fx = -wp.xxy / w + wp.xy * wp.x / w ** 2
        Fy = -wp.xyy / w + wp.xy * wp.y / w ** 2
        Eyy = (-wp.xxyy / w + (2.0 * wp.xxy * wp.y + wp.xx * wp.yy) / w ** 2
               - 2.0 * wp.xx * wp.y ** 2 / w ** 3)
        Gxx = (-wp.xxyy / w + (2.0 * wp.xyy * wp.x + wp.yy * wp.xx) / w ** 2
               - 2.0 * wp.yy * wp.x ** 2 / w ** 3)
        Fxy = (-wp.xxyy / w + (wp.xxy * wp.y + wp.xyy * wp.x + wp.xy * wp.xy) / w ** 2
               - 2.0 * wp.xy * wp.x * wp.y / w ** 3)
        m11 = -0.5 * Eyy + Fxy - 0.5 * Gxx
        a12, a13 = 0.5 * Ex, Fx - 0.5 * Ey
        a21, a23 = Fy - 0.5 * Gx, F
        a31, a32 = 0.5 * Gy, F
        detA = (m11 * (E * G - F * F) - a12 * (a21 * G - a23 * a31)
                + a13 * (a21 * a32 - E * a31))
        b12, b13 = 0.5 * Ey, 0.5 * Gx
        detB = -b12 * (b12 * G - F * b13) + b13 * (b12 * F - E * b13)
        kappa = (detA - detB) / (E * G - F * F) ** 2
    kmask = erode_mask(solution.grid.inside, 2) & np.isfinite(kappa)
    kappa = np.where(kmask, kappa, np.nan)
    return kappa, kmask


def unimodularity_check(solution: MongeAmpereSolution,
                        fld: BlaschkeField | None = None,
                        mask=None) -> float:
    """sup |det(frame) - 1| for an h-orthonormal frame of T Omega + L.

    The frame is (w1, w2, xi) with w1, w2 Gram-Schmidt orthonormal for h_B
    inside the tangent image and xi the unit section of the line factor;
    unit determinant is the affine-sphere volume normalization.
    """
    if fld is None:
        fld = blaschke_from_embedding(solution)
    g = solution.grid
    if mask is None:
        mask = fld.mask & g.eroded(3)
        if not mask.any():
            mask = fld.mask
    idx, M, _, (d1xi, d2xi, xi) = frame_and_second_vectors(solution, mask)
    I, J = idx[:, 0], idx[:, 1]
    h11 = fld.hb[I, J, 0]
    h12 = fld.hb[I, J, 1]
    h22 = fld.hb[I, J, 2]
    w1 = d1xi / np.sqrt(h11)[:, None]
    nrm2 = h22 - h12 * h12 / h11
    w2 = (d2xi - (h12 / h11)[:, None] * d1xi) / np.sqrt(nrm2)[:, None]
    frames = np.stack([w1, w2, xi], axis=2)
    det = np.abs(np.linalg.det(frames))
    return float(np.abs(det - 1.0).max())
