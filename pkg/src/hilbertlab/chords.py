"""Chord profiles, the chord identity, slope bounds, and comparison audits.

Along a chord with lifted endpoints e1, e2 the affine sphere restricted to
the chord plane is e^(t + alpha(t)) e1 + e^(-t + alpha(t)) e2; matching
third coordinates against the radial graph gives
    alpha(t) = log r(x(t)) - log(e^t + e^-t),   r = 1/(-u),
with x(t) the Hilbert-arclength parametrization of the chord. The identity
alpha'' - alpha'^2 + 1 = h_B(dx/dt, dx/dt) is the quantity audited here,
together with the slope bound and the comparison of distances it implies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .blaschke import BlaschkeField
from .errors import BarrierBlowupError, CollarError, DegenerateConfigError
from .grids import GridInterpolator
from .hilbert import hilbert_distance, hilbert_norm_many
from .monge_ampere import MongeAmpereSolution
from .projective import Chord, ConvexDomain, as_chart

GRAPH_OFFSETS = [(1, 0), (0, 1), (1, 1), (1, -1),
                 (2, 1), (1, 2), (2, -1), (1, -2)]
N_RATIO_DIRECTIONS = 16
SLOPE_SLACK = 0.02


@dataclass
class ChordProfile:
    """Sampled alpha and its derivatives along a chord, plus h_B(dx,dx)."""

    chord: Chord
    ts: np.ndarray
    alpha: np.ndarray
    alpha_p: np.ndarray
    alpha_pp: np.ndarray
    hb_chord: np.ndarray
    dt_used: np.ndarray = field(default=None, repr=False)

    def identity_residual(self):
        return (self.alpha_pp - self.alpha_p ** 2 + 1.0) - self.hb_chord


class FieldSampler:
    """Bicubic samplers for r = 1/(-u) and the Blaschke tensor."""

    def __init__(self, solution: MongeAmpereSolution, fld: BlaschkeField):
        self.solution = solution
        self.fld = fld
        g = solution.grid
        self.grid = g
        self._r = GridInterpolator(g, solution.radial_field(), g.inside)
        hb = np.where(fld.mask[..., None], fld.hb, 0.0)
        self._h11 = GridInterpolator(g, hb[..., 0], fld.mask)
        self._h12 = GridInterpolator(g, hb[..., 1], fld.mask)
        self._h22 = GridInterpolator(g, hb[..., 2], fld.mask)
        self.reliable_mask = fld.mask & g.eroded(3)

    def log_r(self, pts):
        return np.log(self._r(pts))

    def hb_form(self, pts, vecs):
        """h_B(v, v) at chart points (vectorized; v per point)."""
        h11 = self._h11(pts)
        h12 = self._h12(pts)
        h22 = self._h22(pts)
        vx, vy = vecs[:, 0], vecs[:, 1]
        return h11 * vx ** 2 + 2.0 * h12 * vx * vy + h22 * vy ** 2

    def valid(self, pts):
        return self._h11.valid(pts) & self._r.valid(pts)


def alpha_profile(solution: MongeAmpereSolution, fld: BlaschkeField,
                  chord: Chord, t_min: float, t_max: float,
                  n_samples: int) -> ChordProfile:
    """Sample alpha, alpha', alpha'' and h_B(dx/dt) on [t_min, t_max].

    Derivatives are centered differences with a per-sample t step chosen so
    the chart displacement is ~4 grid cells (keeping the bicubic
    interpolation error subdominant). Samples whose stencils leave the
    reliable interior raise CollarError listing the offending t values.
    """
    if n_samples < 2 or t_max <= t_min:
        raise DegenerateConfigError("need n_samples >= 2 and t_max > t_min")
    sampler = FieldSampler(solution, fld)
    h = solution.grid.h
    span = np.linalg.norm(chord.b - chord.a)
    ts = np.linspace(t_min, t_max, n_samples)
    speed = 0.5 * span / np.cosh(ts) ** 2
    dt = np.clip(4.0 * h / speed, 1e-3, 0.5)
    t_eval = np.concatenate([ts, ts - dt, ts + dt])
    pts = chord.point_at(t_eval)
    ok = sampler.valid(pts)
    if not ok.all():
        bad_ts = np.unique(np.round(t_eval[~ok], 6))
        raise CollarError(
            f"{len(bad_ts)} profile sample(s) in the boundary collar",
            offending=bad_ts.tolist())
    a_all = sampler.log_r(pts) - np.log(2.0 * np.cosh(t_eval))
    a0 = a_all[:n_samples]
    am = a_all[n_samples:2 * n_samples]
    ap = a_all[2 * n_samples:]
    alpha_p = (ap - am) / (2.0 * dt)
    alpha_pp = (ap - 2.0 * a0 + am) / dt ** 2
    vel = chord.velocity_at(ts)
    hb_chord = sampler.hb_form(chord.point_at(ts), vel)
    return ChordProfile(chord=chord, ts=ts, alpha=a0, alpha_p=alpha_p,
                        alpha_pp=alpha_pp, hb_chord=hb_chord, dt_used=dt)


def reliable_t_window(solution: MongeAmpereSolution, fld: BlaschkeField,
                      chord: Chord, safety: float = 0.05) -> tuple[float, float]:
    """Largest t interval whose full profile stencils stay reliable.

    Validity is checked for x(t) together with the derivative stencil
    points x(t +/- dt(t)) that alpha_profile will use.
    """
    sampler = FieldSampler(solution, fld)
    h = solution.grid.h
    span = np.linalg.norm(chord.b - chord.a)
    ts = np.linspace(-8.0, 8.0, 1601)
    speed = 0.5 * span / np.cosh(ts) ** 2
    dt = np.clip(4.0 * h / speed, 1e-3, 0.5)
    ok = (sampler.valid(chord.point_at(ts))
          & sampler.valid(chord.point_at(ts - dt))
          & sampler.valid(chord.point_at(ts + dt)))
    if not ok.any():
        raise CollarError("chord has no reliable samples")
    idx = np.where(ok)[0]
    # largest contiguous block
    brk = np.where(np.diff(idx) > 1)[0]
    starts = np.concatenate([[0], brk + 1])
    ends = np.concatenate([brk, [len(idx) - 1]])
    k = np.argmax(idx[ends] - idx[starts])
    lo, hi = ts[idx[starts[k]]], ts[idx[ends[k]]]
    if hi - lo <= 2 * safety:
        raise CollarError("reliable window is empty after safety margin")
    return lo + safety, hi - safety


def chord_identity_check(profile: ChordProfile) -> float:
    """sup |(alpha'' - alpha'^2 + 1) - h_B(dx/dt, dx/dt)| over the samples."""
    return float(np.abs(profile.identity_residual()).max())


def slope_bound_check(profile: ChordProfile, comparison_constant: float):
    """(max |alpha'|, bound, pass) for the bound sqrt(1 - 1/C) + slack."""
    if comparison_constant < 1.0:
        raise ValueError("comparison constant must be >= 1")
    bound = np.sqrt(1.0 - 1.0 / comparison_constant)
    m = float(np.abs(profile.alpha_p).max())
    return m, float(bound), bool(m <= bound + SLOPE_SLACK)


def ode_barrier(f0: float, comparison_constant: float, t0: float, t):
    """Closed-form solution of f' = f^2 - (1 - 1/C), f(t0) = f0.

    Requires C > 1 and f0 >= sqrt(1 - 1/C); f0 at the equilibrium gives a
    constant solution, above it f blows up at
    t_max = t0 - log(D) / (2 sqrt(1 - 1/C)). Evaluation at or beyond t_max
    raises BarrierBlowupError carrying t_max.
    """
    if comparison_constant <= 1.0:
        raise ValueError("closed form needs C > 1")
    s = np.sqrt(1.0 - 1.0 / comparison_constant)
    if f0 < s:
        raise ValueError(f"f0 must be >= sqrt(1 - 1/C) = {s:.6g}")
    d = (f0 - s) / (f0 + s)
    t = np.asarray(t, dtype=float)
    if d == 0.0:
        out = np.full_like(t, s)
        return float(out) if out.ndim == 0 else out
    t_max = t0 - np.log(d) / (2.0 * s)
    if np.any(t >= t_max):
        raise BarrierBlowupError(f"barrier blows up at t_max = {t_max:.12g}",
                                 t_max=float(t_max))
    e = d * np.exp(2.0 * s * (t - t0))
    out = s * (1.0 + e) / (1.0 - e)
    return float(out) if out.ndim == 0 else out


def barrier_blowup_time(f0: float, comparison_constant: float, t0: float) -> float:
    s = np.sqrt(1.0 - 1.0 / comparison_constant)
    d = (f0 - s) / (f0 + s)
    if d <= 0.0:
        return np.inf
    return float(t0 - np.log(d) / (2.0 * s))


def estimate_comparison_constant(domain: ConvexDomain,
                                 solution: MongeAmpereSolution,
                                 fld: BlaschkeField) -> float:
    """C_est = sup F(x,v)^2 / h_B(v,v) off the collar, 16 directions.

    This estimates the constant in the lower metric comparison
    h_B >= (1/C) h_H; clamped below at 1.
    """
    g = solution.grid
    mask = fld.mask & g.eroded(3)
    pts = np.column_stack([g.X[mask], g.Y[mask]])
    best = 1.0
    for k in range(N_RATIO_DIRECTIONS):
        th = np.pi * k / N_RATIO_DIRECTIONS
        v = np.array([np.cos(th), np.sin(th)])
        f2 = hilbert_norm_many(domain, pts, v) ** 2
        q = fld.quadratic_form(mask, v)
        best = max(best, float((f2 / q).max()))
    return best


class _PathGraph:
    """16-neighbor grid graph with Riemannian (trapezoid) edge weights."""

    def __init__(self, fld: BlaschkeField):
        g = fld.grid
        self.grid = g
        self.mask = fld.mask & g.eroded(3)
        self.node_index = -np.ones(g.X.shape, dtype=np.int64)
        ij = np.argwhere(self.mask)
        self.ij = ij
        self.node_index[self.mask] = np.arange(len(ij))
        self.xy = np.column_stack([g.X[self.mask], g.Y[self.mask]])
        n = len(ij)
        rows, cols, data = [], [], []
        hb = fld.hb
        for di, dj in GRAPH_OFFSETS:
            ii, jj = ij[:, 0] + di, ij[:, 1] + dj
            ok = (ii >= 0) & (ii <= g.n) & (jj >= 0) & (jj <= g.n)
            tgt = np.full(n, -1, dtype=np.int64)
            tgt[ok] = self.node_index[ii[ok], jj[ok]]
            okk = tgt >= 0
            src = np.where(okk)[0]
            dst = tgt[okk]
            d = np.array([di * g.h, dj * g.h])
            qa = (hb[ij[src, 0], ij[src, 1], 0] * d[0] ** 2
                  + 2.0 * hb[ij[src, 0], ij[src, 1], 1] * d[0] * d[1]
                  + hb[ij[src, 0], ij[src, 1], 2] * d[1] ** 2)
            qb = (hb[ij[dst, 0], ij[dst, 1], 0] * d[0] ** 2
                  + 2.0 * hb[ij[dst, 0], ij[dst, 1], 1] * d[0] * d[1]
                  + hb[ij[dst, 0], ij[dst, 1], 2] * d[1] ** 2)
            w = 0.5 * (np.sqrt(qa) + np.sqrt(qb))
            rows.append(src); cols.append(dst); data.append(w)
        self.csr = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n))

    def nearest_node(self, p):
        g = self.grid
        i = int(round((p[0] + 1.0) / g.h))
        j = int(round((p[1] + 1.0) / g.h))
        i = min(max(i, 0), g.n)
        j = min(max(j, 0), g.n)
        if self.node_index[i, j] >= 0:
            return int(self.node_index[i, j])
        # search a small neighborhood
        for rad in range(1, 4):
            block = self.node_index[max(i - rad, 0):i + rad + 1,
                                    max(j - rad, 0):j + rad + 1]
            cand = block[block >= 0]
            if len(cand):
                d = np.linalg.norm(self.xy[cand] - p, axis=1)
                return int(cand[np.argmin(d)])
        raise CollarError(f"point {tuple(p)} has no reliable grid node nearby",
                          offending=[tuple(p)])

    def distances_from(self, sources):
        return dijkstra(self.csr, directed=False, indices=sources)


def _graph_of(fld: BlaschkeField) -> _PathGraph:
    if not hasattr(fld, "_path_graph"):
        fld._path_graph = _PathGraph(fld)
    return fld._path_graph


def _chord_quadrature(sampler: FieldSampler, chord: Chord,
                      tx: float, ty: float, nodes: int = 64) -> float:
    s, w = np.polynomial.legendre.leggauss(nodes)
    ts = 0.5 * (ty - tx) * s + 0.5 * (tx + ty)
    pts = chord.point_at(ts)
    if not sampler.valid(pts).all():
        raise CollarError("chord path exits the reliable interior")
    q = sampler.hb_form(pts, chord.velocity_at(ts))
    return float(0.5 * abs(ty - tx) * np.sum(w * np.sqrt(q)))


def _segment_length(fld: BlaschkeField, sampler: FieldSampler, a, b) -> float:
    """Trapezoid metric length of the straight segment a -> b."""
    d = b - a
    q = sampler.hb_form(np.stack([a, b]), np.stack([d, d]))
    return float(0.5 * (np.sqrt(q[0]) + np.sqrt(q[1])))


def blaschke_distance_upper(solution: MongeAmpereSolution, fld: BlaschkeField,
                            x, y, graph_distances=None) -> float:
    """Upper bound on d^B(x, y): min of the chord-path quadrature and a
    16-neighbor grid-graph shortest path. Decreases under refinement;
    always >= the true Blaschke distance up to quadrature error."""
    xc, yc = as_chart(x), as_chart(y)
    if np.linalg.norm(yc - xc) < 1e-15:
        return 0.0
    sampler = FieldSampler(solution, fld)
    dom = solution.domain
    chord = dom.chord_through(xc, yc)
    tx, ty = chord.param_of(xc), chord.param_of(yc)
    cand = []
    try:
        cand.append(_chord_quadrature(sampler, chord, tx, ty))
    except CollarError:
        pass
    graph = _graph_of(fld)
    try:
        nx_, ny_ = graph.nearest_node(xc), graph.nearest_node(yc)
        if graph_distances is not None:
            dist = graph_distances[ny_]
        else:
            dist = graph.distances_from([nx_])[0][ny_]
        lead = _segment_length(fld, sampler, xc, graph.xy[nx_])
        tail = _segment_length(fld, sampler, graph.xy[ny_], yc)
        cand.append(float(dist + lead + tail))
    except CollarError:
        pass
    if not cand:
        raise CollarError("both path candidates exit the reliable interior")
    return min(cand)


def sample_reliable_points(fld: BlaschkeField, rng, n: int) -> np.ndarray:
    """n deterministic pseudo-random points in the reliable interior."""
    g = fld.grid
    mask = fld.mask & g.eroded(4)
    ij = np.argwhere(mask)
    if len(ij) == 0:
        raise CollarError("no reliable interior nodes")
    out = []
    while len(out) < n:
        k = rng.integers(0, len(ij))
        jit = rng.uniform(-0.45, 0.45, size=2) * g.h
        p = np.array([g.X[ij[k, 0], ij[k, 1]], g.Y[ij[k, 0], ij[k, 1]]]) + jit
        out.append(p)
    return np.array(out)


@dataclass
class ComparisonAuditReport:
    domain_kind: str
    n_pairs: int
    seed: int
    comparison_constant: float
    rows: list                      # (pair_id, x, y, dH, dB_upper, b_sharp, b_lemma, ok)
    violations: int
    max_slack_consumed: float

    @property
    def ok(self):
        return self.violations == 0


def comparison_audit(domain: ConvexDomain, solution: MongeAmpereSolution,
                     fld: BlaschkeField, n_pairs: int, seed: int
                     ) -> ComparisonAuditReport:
    """Audit d^B_upper <= d^H + sqrt(1 - 1/C_est) and < d^H + 1 on seeded
    interior pairs."""
    rng = np.random.default_rng(seed)
    pts = sample_reliable_points(fld, rng, 2 * n_pairs)
    c_est = estimate_comparison_constant(domain, solution, fld)
    sharp = np.sqrt(1.0 - 1.0 / c_est)
    graph = _graph_of(fld)
    xs = pts[0::2]
    ys = pts[1::2]
    src = [graph.nearest_node(p) for p in xs]
    dmat = graph.distances_from(src)
    rows = []
    violations = 0
    max_slack = -np.inf
    for k in range(n_pairs):
        x, y = xs[k], ys[k]
        dh = hilbert_distance(domain, x, y)
        db = blaschke_distance_upper(solution, fld, x, y,
                                     graph_distances=dmat[k])
        b1 = dh + sharp
        b2 = dh + 1.0
        ok = (db <= b1 + 1e-12) and (db < b2)
        if not ok:
            violations += 1
        max_slack = max(max_slack, db - dh)
        rows.append((k, x, y, dh, db, b1, b2, ok))
    return ComparisonAuditReport(domain_kind=domain.kind, n_pairs=n_pairs,
                                 seed=seed, comparison_constant=c_est,
                                 rows=rows, violations=violations,
                                 max_slack_consumed=float(max_slack))
