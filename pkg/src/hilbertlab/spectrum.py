"""Translation lengths of projective transformations and the collar audit.

Eigenvalue lengths use (log lam_1 - log lam_3)/2 for proximal unimodular
3x3 matrices; dynamical lengths iterate the exact Hilbert distance along an
orbit. Limit sets are approximated by hulls of attracting fixed directions
of words; the Blaschke side reuses the grid upper bound.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blaschke import BlaschkeField
from .chords import blaschke_distance_upper
from .errors import (DegenerateHullError, InvarianceError, ProximalityError,
                     SpecParseError)
from .hilbert import hilbert_distance
from .monge_ampere import MongeAmpereSolution
from .projective import ConvexDomain, as_chart

DET_TOL = 1e-9
PROX_GAP = 1e-9
INVARIANCE_TOL = 1e-6


@dataclass(frozen=True)
class GroupElement:
    """A unimodular 3x3 matrix with its modulus-sorted eigenvalues."""

    m: np.ndarray
    eigenvalues: np.ndarray      # sorted by decreasing modulus
    proximal: bool

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float).reshape(3, 3)
        det = np.linalg.det(m)
        if abs(det) < 1e-300:
            raise ValueError("matrix is singular")
        m = m / np.cbrt(abs(det))
        if det < 0:
            m = -m          # same projective element, determinant +1
        lams = np.linalg.eigvals(m)
        order = np.argsort(-np.abs(lams))
        lams = lams[order]
        mods = np.abs(lams)
        gaps = (mods[0] - mods[1]) / mods[0], (mods[1] - mods[2]) / mods[1]
        real_ends = (abs(lams[0].imag) < PROX_GAP * mods[0]
                     and abs(lams[2].imag) < PROX_GAP * mods[0])
        proximal = bool(gaps[0] > PROX_GAP and gaps[1] > PROX_GAP and real_ends)
        return cls(m=m, eigenvalues=lams, proximal=proximal)

    @property
    def moduli(self):
        return np.abs(self.eigenvalues)


def translation_length_eig(g) -> float:
    """Hilbert translation length (log lam_1 - log lam_3)/2 for proximal g."""
    if not isinstance(g, GroupElement):
        g = GroupElement.from_matrix(g)
    if not g.proximal:
        raise ProximalityError(
            f"element not proximal (moduli {np.round(g.moduli, 6)})")
    mods = g.moduli
    return 0.5 * float(np.log(mods[0]) - np.log(mods[2]))


def iota3(a: float, b: float, c: float, d: float) -> np.ndarray:
    """Irreducible SL(2) -> SL(3): action on binary quadratic forms.

    Basis (x^2, xy, y^2) for the action (x, y) -> (ax + by, cx + dy).
    """
    if abs(a * d - b * c - 1.0) > 1e-12:
        raise ValueError(f"need ad - bc = 1, got {a * d - b * c}")
    return np.array([
        [a * a, a * b, b * b],
        [2 * a * c, a * d + b * c, 2 * b * d],
        [c * c, c * d, d * d]])


def check_invariance(domain: ConvexDomain, m, tol: float = INVARIANCE_TOL,
                     n_samples: int = 64):
    """Each boundary sample must map into the closed domain within tol."""
    bd = domain.sample_boundary(n_samples)
    vh = np.column_stack([bd, np.ones(len(bd))])
    im = vh @ np.asarray(m, dtype=float).T
    if np.any(np.abs(im[:, 2]) < 1e-12):
        raise InvarianceError("boundary sample maps to infinity of the chart")
    pts = im[:, :2] / im[:, 2:3]
    margins = domain.boundary_signed_margin(pts)
    worst = float(margins.min())
    if worst < -tol:
        raise InvarianceError(
            f"domain not preserved: sample leaves by {-worst:.2e}")


@dataclass
class DynamicalLength:
    value: float
    table: list                   # (n, d^H(x, g^n x)/n)


def translation_length_dyn(domain: ConvexDomain, g, x=None,
                           n_max: int = 200) -> DynamicalLength:
    """(1/n_max) d^H(x, g^n_max x), with the per-n convergence table."""
    m = g.m if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    check_invariance(domain, m)
    if x is None:
        x = domain.centroid
    xc = as_chart(x)
    if domain.contains(xc) != "inside":
        raise InvarianceError(f"base point {tuple(xc)} not interior")
    y = np.array([xc[0], xc[1], 1.0])
    table = []
    for n in range(1, n_max + 1):
        y = m @ y
        y = y / np.abs(y).max()          # guard overflow along the orbit
        if abs(y[2]) < 1e-13:
            raise InvarianceError(f"orbit left the chart at step {n}")
        p = y[:2] / y[2]
        if domain.contains(p) == "outside":
            raise InvarianceError(f"orbit left the domain at step {n}")
        table.append((n, hilbert_distance(domain, xc, p) / n))
    return DynamicalLength(value=table[-1][1], table=table)


def blaschke_length_upper(domain: ConvexDomain, solution: MongeAmpereSolution,
                          fld: BlaschkeField, g, x, n: int) -> float:
    """(1/n) d^B_upper(x, g^n x); collar and invariance errors propagate."""
    m = g.m if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    check_invariance(domain, m)
    xc = as_chart(x)
    y = np.array([xc[0], xc[1], 1.0])
    for _ in range(n):
        y = m @ y
        y = y / np.abs(y).max()
    if abs(y[2]) < 1e-13:
        raise InvarianceError("orbit endpoint at infinity of the chart")
    p = y[:2] / y[2]
    return blaschke_distance_upper(solution, fld, xc, p) / n


@dataclass
class SpectrumEntry:
    word: str
    l_H_eig: float
    l_H_dyn: float | None = None
    l_B_upper: float | None = None


def load_generators(path):
    """Read the generators config: {"generators": [{"label", "matrix"}]}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"invalid JSON in {path}: {exc}") from exc
    if "generators" not in spec:
        raise SpecParseError("missing 'generators'", key="generators")
    out = {}
    for entry in spec["generators"]:
        try:
            out[entry["label"]] = np.asarray(entry["matrix"], dtype=float).reshape(3, 3)
        except KeyError as exc:
            raise SpecParseError(f"generator entry missing {exc.args[0]!r}",
                                 key=exc.args[0]) from exc
    return out


def _reduced_words(labels, depth):
    """Nonempty reduced words over labels and their inverses (no x x^-1)."""
    letters = [(lab, +1) for lab in labels] + [(lab, -1) for lab in labels]
    words = [[lt] for lt in letters]
    for w in words:
        yield w
    frontier = words
    for _ in range(depth - 1):
        nxt = []
        for w in frontier:
            last = w[-1]
            for lt in letters:
                if lt[0] == last[0] and lt[1] == -last[1]:
                    continue
                nxt.append(w + [lt])
        for w in nxt:
            yield w
        frontier = nxt


def _word_label(word):
    return "".join(lab if s > 0 else lab.upper() if lab.islower() else lab + "'"
                   for lab, s in word)


@dataclass
class LimitSetResult:
    domain: ConvexDomain
    points: np.ndarray
    skipped_words: list
    invariance_hausdorff: dict     # label -> one-sided Hausdorff defect


def limit_set_domain(generators: dict, depth: int = 8) -> LimitSetResult:
    """Hull of attracting fixed directions of reduced words up to depth.

    Non-proximal words are skipped with a warning; a degenerate hull
    raises DegenerateHullError. The hull is NOT renormalized, so the
    invariance diagnostics read in the generators' own coordinates.
    """
    mats = {lab: np.asarray(m, dtype=float) for lab, m in generators.items()}
    inv = {lab: np.linalg.inv(m) for lab, m in mats.items()}
    pts = []
    skipped = []
    for word in _reduced_words(sorted(mats), depth):
        m = np.eye(3)
        for lab, s in word:
            m = m @ (mats[lab] if s > 0 else inv[lab])
        ge = GroupElement.from_matrix(m)
        if not ge.proximal:
            skipped.append(_word_label(word))
            continue
        lams, vecs = np.linalg.eig(ge.m)
        k = int(np.argmax(np.abs(lams)))
        v = vecs[:, k]
        if abs(v.imag).max() > 1e-9 * abs(v.real).max():
            skipped.append(_word_label(word))
            continue
        v = v.real
        if abs(v[2]) < 1e-10 * np.linalg.norm(v):
            skipped.append(_word_label(word))   # not visible in the chart
            continue
        pts.append(v[:2] / v[2])
    if skipped:
        warnings.warn(f"skipped {len(skipped)} non-proximal/invisible word(s)")
    pts = np.array(pts)
    if len(pts) < 3:
        raise DegenerateHullError(f"only {len(pts)} fixed direction(s) found")
    try:
        dom = ConvexDomain.hull(pts, normalize=False)
    except Exception as exc:
        raise DegenerateHullError(f"hull construction failed: {exc}") from exc
    if dom.area < 1e-8:
        raise DegenerateHullError(f"hull area {dom.area:.2e} is degenerate")
    haus = {}
    for lab, m in mats.items():
        vh = np.column_stack([dom.vertices, np.ones(len(dom.vertices))])
        im = vh @ m.T
        ipts = im[:, :2] / im[:, 2:3]
        margins = dom.boundary_signed_margin(ipts)
        haus[lab] = float(max(0.0, -margins.min()))
    return LimitSetResult(domain=dom, points=pts, skipped_words=skipped,
                          invariance_hausdorff=haus)


@dataclass
class CollarRow:
    label: str
    length_1: float
    length_2: float
    sinh_product: float
    sinh_pass: bool
    lee_zhang_product: float
    lee_zhang_pass: bool


def collar_audit(pairs) -> list:
    """Evaluate both collar inequalities per labeled length pair.

    pairs: iterables of (label, L, L') or pairs of SpectrumEntry. The
    caller vouches that each pair represents crossing curves; this is
    plain arithmetic on the supplied lengths (n = 3 in the Lee-Zhang form).
    """
    rows = []
    for pair in pairs:
        if isinstance(pair[0], SpectrumEntry):
            e1, e2 = pair
            label = f"{e1.word}|{e2.word}"
            l1, l2 = e1.l_H_eig, e2.l_H_eig
        else:
            label, l1, l2 = pair
        sp = float(np.sinh(l1 / 2.0) * np.sinh(l2 / 2.0))
        lz = float((np.exp(l1) - 1.0) * (np.exp(l2 / 2.0) - 1.0))
        rows.append(CollarRow(label=label, length_1=l1, length_2=l2,
                              sinh_product=sp, sinh_pass=bool(sp > 1.0),
                              lee_zhang_product=lz, lee_zhang_pass=bool(lz > 1.0)))
    return rows
