"""Monge-Ampere solver for the affine-sphere potential.

Solves det D^2 u = (-1/u)^4 with u = 0 on the boundary, the radial-graph
reduction of the hyperbolic affine sphere asymptotic to the cone over the
domain. The discrete residual is log det D^2 u + 4 log(-u) on a 9-point
stencil; a damped Newton iteration drives it to zero.

Boundary handling: arms of the stencil that leave the domain are cut at the
exact boundary crossing and carry the Dirichlet value 0 there, combined
with unequal-spacing (Shortley-Weller) second differences. Within a band of
fixed physical width along the boundary, second derivatives are instead
reconstructed through z = (-u)^p, which is smooth up to the boundary while
u itself degenerates like dist^(1/p) (p = 2 for smooth strictly convex
boundaries, 3 for polygon edges; the quadratic fit of z per stencil line
is exact on ellipses and near-exact on the simplex). Without this the cut
cells carry O(1) truncation and pollute the interior globally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CorruptSolutionError, SolverError
from .grids import DIRS, LINE_PAIRS, SolverGrid
from .projective import ConvexDomain

LAMBDA_MIN = 1e-10      # eigenvalue clamp inside the linearization
U_CEIL = -1e-12         # convexity barrier: u stays below this
DEFAULT_BAND = 0.08     # width of the v-reconstruction band, chart units


@dataclass
class MongeAmpereSolution:
    """Converged grid solution of the affine-sphere equation."""

    grid: SolverGrid
    u: np.ndarray                 # full (n+1, n+1) array, 0 outside interior
    residual_sup: float           # sup |residual| off a one-cell collar
    residual_sup_full: float
    iterations: int
    tol: float
    band_width: float
    residual_history: list = field(default_factory=list)

    @property
    def domain(self) -> ConvexDomain:
        return self.grid.domain

    @property
    def h(self) -> float:
        return self.grid.h

    def u_interior(self) -> np.ndarray:
        return self.u[self.grid.inside]

    def radial_field(self) -> np.ndarray:
        """r = 1/(-u) on interior nodes, 0 elsewhere."""
        out = np.zeros_like(self.u)
        ins = self.grid.inside
        out[ins] = 1.0 / (-self.u[ins])
        return out


class _Discretization:
    """Second-difference machinery shared by residual and Jacobian."""

    def __init__(self, grid: SolverGrid, band_width: float):
        self.grid = grid
        h = grid.h
        self.steps = (h, h, np.sqrt(2.0) * h, np.sqrt(2.0) * h)
        self.p = float(grid.domain.boundary_exponent)
        anycut = grid.nb < 0
        margins = grid.margin_of(grid.nodes_xy)
        if grid.domain.kind == "polygon":
            # cube-root edges make the plain u-differences strictly worse
            # everywhere; use the z-branch globally (exact on the simplex)
            sigma = np.ones(grid.n_interior)
        else:
            # blend weight of the z-branch: 1 inside the band, ramping to 0
            # across [band, 2*band] so the scheme (and its error field)
            # stays continuous; an abrupt switch leaves a kink that wrecks
            # the curvature post-processing
            sigma = np.clip((2.0 * band_width - margins) / band_width, 0.0, 1.0)
        self.sigma = np.empty((grid.n_interior, 4))
        for li, (kp, km) in enumerate(LINE_PAIRS):
            cut = anycut[:, kp] | anycut[:, km]
            self.sigma[:, li] = np.where(cut, 1.0, sigma)

    def line_derivatives(self, u):
        """Per-line second derivative D, partials wrt (u+, u-, u0), and
        extra Jacobian triplets from one-sided cubic fits.

        Lines are x, y, diag+, diag-; cut arms hold boundary value 0 at the
        crossing. The z-branch reconstructs a quadratic in z = (-u)^p and
        maps back through u'' = ((p-1) z'^2 - p z z'') / (p^2 z^(2-1/p)).
        At cut cells with two interior nodes available on the inward side,
        the quadratic is upgraded to a cubic fit of z, which removes the
        O(h) one-sided truncation (and is exact on the simplex, where z is
        a cubic polynomial); the second-inward dependency is returned as
        extra triplets for the Jacobian.
        """
        g = self.grid
        p = self.p
        vals = g.gather(u)
        D = np.empty((g.n_interior, 4))
        dDp = np.empty_like(D)
        dDm = np.empty_like(D)
        dD0 = np.empty_like(D)
        extras = []
        z0 = np.power(-u, p)
        dz0_du = -p * np.power(-u, p - 1.0)
        zall = np.power(-u, p)
        for li, (kp, km) in enumerate(LINE_PAIRS):
            s = self.steps[li]
            a = g.theta[:, kp] * s
            b = g.theta[:, km] * s
            vp = vals[:, kp]
            vm = vals[:, km]
            sg = self.sigma[:, li]
            # plain Shortley-Weller on u
            cp = 2.0 / (a * (a + b))
            cm = 2.0 / (b * (a + b))
            c0 = -2.0 / (a * b)
            Du = cp * vp + cm * vm + c0 * u
            # z-reconstruction branch (z = 0 at cut arms since u = 0 there)
            zp = np.power(-vp, p)
            zm = np.power(-vm, p)
            den_ab = a * b * (a + b)
            beta = (b * b * (zp - z0) - a * a * (zm - z0)) / den_ab
            gam = (b * (zp - z0) + a * (zm - z0)) / den_ab
            den = p * p * np.power(z0, 2.0 - 1.0 / p)
            bet_p = b * b / den_ab
            bet_m = -a * a / den_ab
            gam_p = b / den_ab
            gam_m = a / den_ab
            # beta/gamma sensitivities to (zp, zm, z0); cubic fit overrides
            wb = [bet_p, bet_m, -(bet_p + bet_m)]
            wg = [gam_p, gam_m, -(gam_p + gam_m)]
            extra_cols = np.full(g.n_interior, -1, dtype=np.int64)
            extra_w_b = np.zeros(g.n_interior)
            extra_w_g = np.zeros(g.n_interior)
            for cut_k, far_k, sign in ((kp, km, 1.0), (km, kp, -1.0)):
                cut = ((g.nb[:, cut_k] < 0) & (g.nb[:, far_k] >= 0)
                       & (g.nb2[:, far_k] >= 0))
                if not cut.any():
                    continue
                ids = np.where(cut)[0]
                aa = g.theta[ids, cut_k] * s          # crossing distance
                zn1 = zall[g.nb[ids, far_k]]
                zn2 = zall[g.nb2[ids, far_k]]
                # cubic f(t) = z0 + c1 t + c2 t^2 + c3 t^3 through
                # (aa, 0), (-s, zn1), (-2s, zn2); signed so +t points at cut_k
                V = np.stack([
                    np.stack([aa, aa ** 2, aa ** 3], axis=1),
                    np.stack([-s * np.ones_like(aa), s ** 2 * np.ones_like(aa),
                              -s ** 3 * np.ones_like(aa)], axis=1),
                    np.stack([-2 * s * np.ones_like(aa), 4 * s ** 2 * np.ones_like(aa),
                              -8 * s ** 3 * np.ones_like(aa)], axis=1)], axis=1)
                Vinv = np.linalg.inv(V)
                rhs = np.stack([-z0[ids], zn1 - z0[ids], zn2 - z0[ids]], axis=1)
                coef = np.einsum("nij,nj->ni", Vinv, rhs)
                beta[ids] = sign * coef[:, 0]
                gam[ids] = coef[:, 1]
                # weights of (c1, c2) wrt (z_far1, z_far2, z0)
                wb_f1 = sign * Vinv[:, 0, 1]
                wb_f2 = sign * Vinv[:, 0, 2]
                wb_0 = sign * (-Vinv[:, 0, :].sum(axis=1))
                wg_f1 = Vinv[:, 1, 1]
                wg_f2 = Vinv[:, 1, 2]
                wg_0 = -Vinv[:, 1, :].sum(axis=1)
                if sign > 0:   # far side is the minus arm
                    for arr, vnew in ((wb[1], wb_f1), (wg[1], wg_f1)):
                        arr[ids] = vnew
                    wb[0][ids] = 0.0
                    wg[0][ids] = 0.0
                else:          # far side is the plus arm
                    for arr, vnew in ((wb[0], wb_f1), (wg[0], wg_f1)):
                        arr[ids] = vnew
                    wb[1][ids] = 0.0
                    wg[1][ids] = 0.0
                wb[2][ids] = wb_0
                wg[2][ids] = wg_0
                extra_cols[ids] = g.nb2[ids, far_k]
                extra_w_b[ids] = wb_f2
                extra_w_g[ids] = wg_f2
            Dz = ((p - 1.0) * beta * beta - 2.0 * p * z0 * gam) / den
            two_p1 = 2.0 * (p - 1.0)
            dDz_dbeta = two_p1 * beta / den
            dDz_dgam = -2.0 * p * z0 / den
            dDz_dz0_direct = -2.0 * p * gam / den - (2.0 - 1.0 / p) * Dz / z0
            dDz_dzp = dDz_dbeta * wb[0] + dDz_dgam * wg[0]
            dDz_dzm = dDz_dbeta * wb[1] + dDz_dgam * wg[1]
            dDz_dz0 = dDz_dz0_direct + dDz_dbeta * wb[2] + dDz_dgam * wg[2]
            dzp_du = -p * np.power(-vp, p - 1.0)
            dzm_du = -p * np.power(-vm, p - 1.0)
            D[:, li] = sg * Dz + (1.0 - sg) * Du
            dDp[:, li] = sg * dDz_dzp * dzp_du + (1.0 - sg) * cp
            dDm[:, li] = sg * dDz_dzm * dzm_du + (1.0 - sg) * cm
            dD0[:, li] = sg * dDz_dz0 * dz0_du + (1.0 - sg) * c0
            has2 = extra_cols >= 0
            if has2.any():
                ids = np.where(has2)[0]
                cols2 = extra_cols[ids]
                dz2_du = dz0_du[cols2]
                val = (sg[ids] * (dDz_dbeta[ids] * extra_w_b[ids]
                                  + dDz_dgam[ids] * extra_w_g[ids]) * dz2_du)
                extras.append((li, ids, cols2, val))
        return D, dDp, dDm, dD0, extras


def _clamped_logdet(dxx, dyy, dxy):
    """log det of the clamped 2x2 Hessian and d(logdet)/dH coefficients.

    Clamped eigendirections contribute zero gradient, which keeps the
    Newton linearization consistent with the residual (otherwise the line
    search stalls wherever the discrete Hessian is indefinite).
    """
    m0 = 0.5 * (dxx + dyy)
    rad = np.sqrt(0.25 * (dxx - dyy) ** 2 + dxy ** 2)
    lam1 = m0 + rad
    lam2 = m0 - rad
    l1 = np.maximum(lam1, LAMBDA_MIN)
    l2 = np.maximum(lam2, LAMBDA_MIN)
    logdet = np.log(l1) + np.log(l2)
    g1 = np.where(lam1 > LAMBDA_MIN, 1.0 / l1, 0.0)
    g2 = np.where(lam2 > LAMBDA_MIN, 1.0 / l2, 0.0)
    safe = np.where(rad > 1e-300, rad, 1.0)
    c2t = np.where(rad > 1e-300, 0.5 * (dxx - dyy) / safe, 1.0)
    s2t = np.where(rad > 1e-300, dxy / safe, 0.0)
    a = 0.5 * (g1 + g2) + 0.5 * (g1 - g2) * c2t
    b = 0.5 * (g1 + g2) - 0.5 * (g1 - g2) * c2t
    c = 0.5 * (g1 - g2) * s2t
    return logdet, a, b, c


def _torsion_init(grid: SolverGrid) -> np.ndarray:
    """Start from a power of the torsion function (lap t = -2, t = 0 on
    the boundary).

    For smooth boundaries -sqrt(2 t) reproduces the exact hyperboloid on
    the disc. For polygons the solution leaves the boundary like a cube
    root, so -(alpha t)^(1/3) with alpha calibrated to satisfy the
    equation at the torsion maximum (where grad t = 0 and
    det D^2 u0 = (alpha/9)^(2/3)... reduces to alpha = 3/sqrt(det(-D^2 t))).
    """
    N = grid.n_interior
    rows, cols, data = [], [], []
    iis = np.arange(N)
    diag = np.zeros(N)
    axis_second = []
    for li, (kp, km) in enumerate(LINE_PAIRS[:2]):
        s = grid.h
        a = grid.theta[:, kp] * s
        b = grid.theta[:, km] * s
        cp = 2.0 / (a * (a + b))
        cm = 2.0 / (b * (a + b))
        mp = grid.nb[:, kp] >= 0
        mm = grid.nb[:, km] >= 0
        rows.append(iis[mp]); cols.append(grid.nb[mp, kp]); data.append(cp[mp])
        rows.append(iis[mm]); cols.append(grid.nb[mm, km]); data.append(cm[mm])
        diag += -2.0 / (a * b)
        axis_second.append((cp, cm, -2.0 / (a * b)))
    rows.append(iis); cols.append(iis); data.append(diag)
    L = sp.csr_matrix((np.concatenate(data),
                       (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    t = spla.spsolve(L, -2.0 * np.ones(N))
    t = np.maximum(t, 1e-12)
    if grid.domain.boundary_exponent == 2:
        return -np.sqrt(2.0 * t)
    # cube-root profile; calibrate at the torsion maximum
    k = int(np.argmax(t))
    vals = grid.gather(t)
    ds = []
    for li, (kp, km) in enumerate(LINE_PAIRS[:2]):
        cp, cm, c0 = axis_second[li]
        ds.append(cp[k] * vals[k, kp] + cm[k] * vals[k, km] + c0[k] * t[k])
    vpp = grid.gather(t)[k, 4] if grid.nb[k, 4] >= 0 else 0.0
    vmm = grid.gather(t)[k, 5] if grid.nb[k, 5] >= 0 else 0.0
    vpm = grid.gather(t)[k, 6] if grid.nb[k, 6] >= 0 else 0.0
    vmp = grid.gather(t)[k, 7] if grid.nb[k, 7] >= 0 else 0.0
    txy = (vpp + vmm - vpm - vmp) / (4.0 * grid.h ** 2)
    det_hess = ds[0] * ds[1] - txy ** 2
    alpha = 3.0 / np.sqrt(max(det_hess, 1e-12))
    return -np.power(alpha * t, 1.0 / 3.0)


def solve_monge_ampere(domain: ConvexDomain, grid_spacing: float,
                       tol: float = 1e-8, max_iter: int = 200,
                       band_width: float = DEFAULT_BAND) -> MongeAmpereSolution:
    """Damped Newton solve of the discrete affine-sphere equation.

    Deterministic given inputs. Raises SolverError (with the last residual)
    on non-convergence and ResolutionError for too-coarse grids.
    """
    grid = SolverGrid(domain, grid_spacing)
    disc = _Discretization(grid, band_width)
    u = _torsion_init(grid)
    N = grid.n_interior
    iis = np.arange(N)
    collar1 = grid.eroded(1)[grid.inside]

    def residual(uvec):
        D, dDp, dDm, dD0, extras = disc.line_derivatives(uvec)
        dxx, dyy = D[:, 0], D[:, 1]
        dxy = 0.5 * (D[:, 2] - D[:, 3])
        logdet, a, b, c = _clamped_logdet(dxx, dyy, dxy)
        return logdet + 4.0 * np.log(-uvec), (a, b, c), (dDp, dDm, dD0, extras)

    history = []
    stalls = 0
    it = 0
    res_off = np.inf
    for it in range(max_iter):
        G, (a, b, c), (dDp, dDm, dD0, extras) = residual(u)
        res_full = float(np.abs(G).max())
        res_off = float(np.abs(G[collar1]).max()) if collar1.any() else res_full
        history.append(res_off)
        if res_off <= tol:
            break
        # assemble J: dG = a dDxx + b dDyy + 2c dDxy, dDxy = (dD2 - dD3)/2
        weights = (a, b, c, -c)
        rows, cols, data = [], [], []
        diag = 4.0 / u
        for li, (kp, km) in enumerate(LINE_PAIRS):
            w = weights[li]
            mp = grid.nb[:, kp] >= 0
            mm = grid.nb[:, km] >= 0
            rows.append(iis[mp]); cols.append(grid.nb[mp, kp]); data.append((w * dDp[:, li])[mp])
            rows.append(iis[mm]); cols.append(grid.nb[mm, km]); data.append((w * dDm[:, li])[mm])
            diag = diag + w * dD0[:, li]
        for li, ids, cols2, val in extras:
            rows.append(ids); cols.append(cols2); data.append(weights[li][ids] * val)
        rows.append(iis); cols.append(iis); data.append(diag)
        J = sp.csr_matrix((np.concatenate(data),
                           (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
        delta = spla.spsolve(J, -G)
        if not np.all(np.isfinite(delta)):
            raise SolverError("Newton direction not finite", residual=res_off, iterations=it)
        # keep u strictly negative (fraction-to-boundary)
        t = 1.0
        crossing = (u + delta) >= U_CEIL
        if crossing.any():
            t = min(t, 0.9 * float(np.min((U_CEIL - u[crossing]) / delta[crossing])))
        nrm0 = np.linalg.norm(G)
        accepted = False
        for _ in range(40):
            unew = u + t * delta
            Gn, _, _ = residual(unew)
            if np.linalg.norm(Gn) < nrm0 * (1.0 - 1e-4 * t):
                u = unew
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # Picard-style fallback: forced damped step on the frozen
            # linearization; three consecutive failures abort
            stalls += 1
            if stalls >= 3:
                raise SolverError("Newton line search stalled", residual=res_off,
                                  iterations=it)
            t = 0.1
            crossing = (u + t * delta) >= U_CEIL
            if crossing.any():
                t = min(t, 0.9 * float(np.min((U_CEIL - u[crossing]) / (t * delta[crossing]))) * t)
            u = u + t * delta
        else:
            stalls = 0
    else:
        raise SolverError(f"no convergence in {max_iter} iterations",
                          residual=res_off, iterations=max_iter)

    G, _, _ = residual(u)
    res_full = float(np.abs(G).max())
    res_off = float(np.abs(G[collar1]).max()) if collar1.any() else res_full
    return MongeAmpereSolution(grid=grid, u=grid.to_full(u),
                               residual_sup=res_off, residual_sup_full=res_full,
                               iterations=it, tol=tol, band_width=band_width,
                               residual_history=history)


def embedding(solution: MongeAmpereSolution) -> np.ndarray:
    """Affine-sphere points xi = (x, y, 1)/(-u) per node, NaN outside."""
    g = solution.grid
    ins = g.inside
    ui = solution.u[ins]
    if np.any(ui >= 0.0):
        raise CorruptSolutionError("u >= 0 at an interior node")
    out = np.full(g.X.shape + (3,), np.nan)
    r = 1.0 / (-ui)
    out[ins, 0] = g.X[ins] * r
    out[ins, 1] = g.Y[ins] * r
    out[ins, 2] = r
    return out


def solution_checks(solution: MongeAmpereSolution) -> dict:
    """Invariant report: negativity, discrete convexity, residual."""
    g = solution.grid
    u = solution.u
    ins = g.inside
    h2 = g.h ** 2
    core = g.eroded(1)
    uxx = np.full(u.shape, np.nan)
    uyy = np.full(u.shape, np.nan)
    uxx[1:-1, :] = (u[2:, :] - 2 * u[1:-1, :] + u[:-2, :]) / h2
    uyy[:, 1:-1] = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) / h2
    return {
        "u_max_interior": float(u[ins].max()),
        "convexity_min_second_difference": float(min(uxx[core].min(), uyy[core].min())),
        "residual_sup": solution.residual_sup,
        "iterations": solution.iterations,
    }
