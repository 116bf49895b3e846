"""Uniform solver grids: masks, boundary-cut arm tables, interpolation."""

from __future__ import annotations

import numpy as np

from .errors import CollarError, ResolutionError
from .projective import ConvexDomain

# stencil directions: E, W, N, S, NE, SW, SE, NW (axis pairs then diagonals)
DIRS = np.array([(1, 0), (-1, 0), (0, 1), (0, -1),
                 (1, 1), (-1, -1), (1, -1), (-1, 1)])
LINE_PAIRS = ((0, 1), (2, 3), (4, 5), (6, 7))   # x, y, diag+, diag-
THETA_MIN = 1e-3


def erode_mask(mask: np.ndarray, k: int) -> np.ndarray:
    """k-fold erosion with the 3x3 (Chebyshev) structuring element."""
    out = mask.copy()
    for _ in range(k):
        nxt = out.copy()
        nxt[1:] &= out[:-1]; nxt[:-1] &= out[1:]
        nxt[:, 1:] &= out[:, :-1]; nxt[:, :-1] &= out[:, 1:]
        nxt[1:, 1:] &= out[:-1, :-1]; nxt[:-1, :-1] &= out[1:, 1:]
        nxt[1:, :-1] &= out[:-1, 1:]; nxt[:-1, 1:] &= out[1:, :-1]
        out = nxt
    return out


class SolverGrid:
    """Node grid over [-1, 1]^2 with exact boundary-crossing arm tables.

    Nodes sit at (-1 + i*h, -1 + j*h). Interior nodes are those strictly
    inside the domain; for each of the 8 stencil directions the table holds
    the neighbor's unknown index (or -1 when the arm crosses the boundary)
    and the crossing fraction theta in (0, 1].
    """

    def __init__(self, domain: ConvexDomain, h: float):
        self.domain = domain
        self.h = float(h)
        n = int(round(2.0 / h))
        if abs(n * h - 2.0) > 1e-12:
            raise ResolutionError(f"grid spacing {h} must divide the box [-1,1]^2 evenly")
        self.n = n
        xs = -1.0 + h * np.arange(n + 1)
        self.xs = xs
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        self.X, self.Y = X, Y
        lo, hi = domain.bbox()
        if lo.min() < -1.0 - 1e-9 or hi.max() > 1.0 + 1e-9:
            raise ResolutionError("domain bbox exceeds the normalized box [-1, 1]^2")

        pts = np.column_stack([X.ravel(), Y.ravel()])
        margins = domain.boundary_signed_margin(pts).reshape(X.shape)
        inside = margins > 1e-9
        self.inside = inside
        self.n_interior = int(inside.sum())
        # at least 20 interior nodes across the diameter
        span = max(inside.any(axis=1).sum(), inside.any(axis=0).sum())
        if span < 20:
            raise ResolutionError(
                f"only {span} interior nodes across the domain; need >= 20")
        self.idx_of = -np.ones(X.shape, dtype=np.int64)
        self.idx_of[inside] = np.arange(self.n_interior)
        self.nodes_ij = np.argwhere(inside)
        self.nodes_xy = np.column_stack([X[inside], Y[inside]])

        n1 = n + 1
        N = self.n_interior
        nb = np.full((N, 8), -1, dtype=np.int64)
        th = np.ones((N, 8))
        for k, (di, dj) in enumerate(DIRS):
            ii = self.nodes_ij[:, 0] + di
            jj = self.nodes_ij[:, 1] + dj
            ok = (ii >= 0) & (ii < n1) & (jj >= 0) & (jj < n1)
            nbk = np.full(N, -1, dtype=np.int64)
            nbk[ok] = self.idx_of[ii[ok], jj[ok]]
            nb[:, k] = nbk
            cut = nbk < 0
            if cut.any():
                step = np.array([di * h, dj * h])
                t = domain.ray_boundary_distance(self.nodes_xy[cut],
                                                 step / np.linalg.norm(step))
                th[cut, k] = np.clip(t / np.linalg.norm(step), THETA_MIN, 1.0)
        self.nb = nb
        self.theta = th
        # second neighbor along each direction (for one-sided cubic fits)
        nb2 = np.full((N, 8), -1, dtype=np.int64)
        for k in range(8):
            ok = nb[:, k] >= 0
            nb2[ok, k] = nb[nb[ok, k], k]
        self.nb2 = nb2
        self._erosions = {0: inside}

    def eroded(self, k: int) -> np.ndarray:
        if k not in self._erosions:
            self._erosions[k] = erode_mask(self.inside, k)
        return self._erosions[k]

    def margin_of(self, pts) -> np.ndarray:
        return self.domain.boundary_signed_margin(pts)

    def gather(self, u_flat: np.ndarray) -> np.ndarray:
        """Neighbor values per direction; cut arms contribute 0 (boundary data)."""
        vals = np.zeros((self.n_interior, 8))
        for k in range(8):
            m = self.nb[:, k] >= 0
            vals[m, k] = u_flat[self.nb[m, k]]
        return vals

    def to_full(self, u_flat: np.ndarray, fill=0.0) -> np.ndarray:
        out = np.full(self.X.shape, fill, dtype=float)
        out[self.inside] = u_flat
        return out


class GridInterpolator:
    """Local bicubic (tensor Lagrange) interpolation on a masked node field.

    A query is valid only when its full 4x4 stencil lies in the mask;
    invalid queries raise CollarError listing the offending points.
    """

    def __init__(self, grid: SolverGrid, field: np.ndarray, mask: np.ndarray):
        self.grid = grid
        self.field = np.where(mask, field, 0.0)
        self.mask = mask

    @staticmethod
    def _weights(frac):
        x = frac
        wm1 = -x * (x - 1.0) * (x - 2.0) / 6.0
        w0 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0
        w1 = -(x + 1.0) * x * (x - 2.0) / 2.0
        w2 = (x + 1.0) * x * (x - 1.0) / 6.0
        return np.stack([wm1, w0, w1, w2], axis=-1)

    def valid(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        g = self.grid
        fi = (pts[:, 0] + 1.0) / g.h
        fj = (pts[:, 1] + 1.0) / g.h
        i0 = np.floor(fi).astype(int)
        j0 = np.floor(fj).astype(int)
        ok = (i0 >= 1) & (i0 <= g.n - 2) & (j0 >= 1) & (j0 <= g.n - 2)
        out = np.zeros(len(pts), dtype=bool)
        idx = np.where(ok)[0]
        if len(idx) == 0:
            return out
        sten_ok = np.ones(len(idx), dtype=bool)
        for a in range(-1, 3):
            for b in range(-1, 3):
                sten_ok &= self.mask[i0[idx] + a, j0[idx] + b]
        out[idx] = sten_ok
        return out

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = self.valid(pts)
        if not ok.all():
            bad = pts[~ok]
            raise CollarError(
                f"{(~ok).sum()} query point(s) fall in the boundary collar",
                offending=[tuple(b) for b in bad[:8]])
        g = self.grid
        fi = (pts[:, 0] + 1.0) / g.h
        fj = (pts[:, 1] + 1.0) / g.h
        i0 = np.floor(fi).astype(int)
        j0 = np.floor(fj).astype(int)
        wx = self._weights(fi - i0)
        wy = self._weights(fj - j0)
        val = np.zeros(len(pts))
        for a in range(4):
            sl = self.field[i0 + a - 1]
            row = np.zeros(len(pts))
            for b in range(4):
                row += wy[:, b] * sl[np.arange(len(pts)), j0 + b - 1]
            val += wx[:, a] * row
        return val
